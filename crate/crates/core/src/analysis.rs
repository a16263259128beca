// Copyright 2026 The rifl-rs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Closed-form link analysis: efficiency, frame error and failure ratios,
//! MTBF and buffer sizing.

use statrs::function::factorial::ln_binomial;

use crate::config::{DATA_HEADER_BITS, VERIFICATION_BITS};

pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;
/// Probability of no undetected failure over the MTBF horizon.
pub const MTBF_CONFIDENCE: f64 = 0.99;
/// Widest checksum considered by [`min_checksum_bits`].
pub const MAX_CHECKSUM_BITS: u32 = 32;
/// Frame sizes of the design tables.
pub const TABLE_FRAME_SIZES: [u32; 5] = [128, 256, 512, 1024, 2048];
/// Default propagation delay, ns per meter of cable.
pub const DEFAULT_NS_PER_M: f64 = 5.0;

/// Sizes derived from a bit count are rounded up; the tolerance absorbs
/// floating-point noise in products such as `100e9 * 500e-9`.
fn ceil_bits(x: f64) -> u64 {
    if x <= 0.0 {
        return 0;
    }
    (x * (1.0 - 1e-12)).ceil() as u64
}

/// Round-trip time for a circuit delay per endpoint and a cable.
pub fn rtt_s(circuit_delay_s: f64, cable_m: f64, ns_per_m: f64) -> f64 {
    2.0 * (circuit_delay_s + cable_m * ns_per_m * 1e-9)
}

/// Probability that a frame of `frame_bits` carries at least one error.
pub fn fer(ber: f64, frame_bits: u32) -> f64 {
    if ber >= 1.0 {
        return 1.0;
    }
    -(frame_bits as f64 * (-ber).ln_1p()).exp_m1()
}

/// Error-free bandwidth efficiency.
pub fn eff_zero(frame_bits: u32, verification_bits: u32) -> f64 {
    1.0 - (verification_bits + 4) as f64 / frame_bits as f64
}

/// Bandwidth efficiency with `n_stall` lost frame slots per corrupted frame.
pub fn eff_bandwidth(frame_bits: u32, verification_bits: u32, n_stall: f64, fer: f64) -> f64 {
    eff_zero(frame_bits, verification_bits) * (1.0 - n_stall * fer).max(0.0)
}

/// Stall per error when the replay schedule runs once: the schedule plus
/// one round trip of frames.
pub fn n_stall_default(frame_id_bits: u32, line_rate_bps: f64, rtt_s: f64, frame_bits: u32) -> f64 {
    2.5 * (1u64 << frame_id_bits) as f64 + line_rate_bps * rtt_s / frame_bits as f64
}

/// Natural log of the probability of exactly `i` bit errors in a frame.
pub fn ln_p_exact_errors(i: u32, frame_bits: u32, ber: f64) -> f64 {
    if i > frame_bits {
        return f64::NEG_INFINITY;
    }
    let ok = if i == frame_bits {
        0.0
    } else {
        (frame_bits - i) as f64 * (-ber).ln_1p()
    };
    let bad = if i == 0 { 0.0 } else { i as f64 * ber.ln() };
    ln_binomial(frame_bits as u64, i as u64) + bad + ok
}

pub fn p_exact_errors(i: u32, frame_bits: u32, ber: f64) -> f64 {
    ln_p_exact_errors(i, frame_bits, ber).exp()
}

/// Natural log of the probability of at least `hd` bit errors.
fn ln_tail(hd: u32, frame_bits: u32, ber: f64) -> f64 {
    let terms: Vec<f64> = (hd..=frame_bits)
        .map(|i| ln_p_exact_errors(i, frame_bits, ber))
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Frame failure ratio for an m-bit checksum with Hamming distance `hd`.
pub fn ffr(checksum_bits: u32, hd: u32, frame_bits: u32, ber: f64) -> f64 {
    if ber <= 0.0 {
        return 0.0;
    }
    (ln_tail(hd, frame_bits, ber) - checksum_bits as f64 * std::f64::consts::LN_2).exp()
}

/// Frames until the failure probability reaches 1%.
pub fn mtbf_frames(ffr: f64) -> f64 {
    if ffr <= 0.0 {
        return f64::INFINITY;
    }
    MTBF_CONFIDENCE.ln() / (-ffr).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    pub frame_size_bits: u32,
    pub checksum_bits: u32,
    pub hd: u32,
    pub frame_id_bits: u32,
    pub line_rate_bps: f64,
    /// Measured throughput; replaces the line rate in the MTBF horizon.
    pub actual_rate_bps: Option<f64>,
    pub rtt_s: f64,
    pub ber: f64,
}

impl DesignPoint {
    pub fn ffr(&self) -> f64 {
        ffr(self.checksum_bits, self.hd, self.frame_size_bits, self.ber)
    }

    pub fn mtbf_years(&self) -> f64 {
        let rate = self.actual_rate_bps.unwrap_or(self.line_rate_bps);
        let frames_per_s = rate / self.frame_size_bits as f64;
        mtbf_frames(self.ffr()) / frames_per_s / SECONDS_PER_YEAR
    }
}

pub fn mtbf_years(point: &DesignPoint) -> f64 {
    point.mtbf_years()
}

/// Smallest frame-ID width covering one round trip of frames.
pub fn min_frame_id_bits(line_rate_bps: f64, rtt_s: f64, frame_bits: u32) -> u32 {
    let frames = ceil_bits(line_rate_bps * rtt_s / frame_bits as f64);
    if frames <= 1 {
        0
    } else {
        64 - (frames - 1).leading_zeros()
    }
}

/// Hamming distance of the best m-bit CRC on an n-bit dataword, from the
/// codeword-length limits of a primitive polynomial times (x + 1).
pub fn crc_hd_bound(checksum_bits: u32, dataword_bits: u32) -> u32 {
    let m = checksum_bits as u64;
    let n = dataword_bits as u64;
    if m >= 2 && n + m < 1 << (m - 1) {
        4
    } else if n + m < 1 << m.min(63) {
        3
    } else {
        2
    }
}

/// Bits covered by the checksum: payload and Meta Code.
pub fn dataword_bits(frame_bits: u32) -> u32 {
    frame_bits - DATA_HEADER_BITS + 2
}

/// Smallest checksum width whose MTBF meets the target, or `None` when no
/// width up to [`MAX_CHECKSUM_BITS`] does.
pub fn min_checksum_bits(
    frame_bits: u32,
    ber: f64,
    line_rate_bps: f64,
    target_years: f64,
    hd_table: impl Fn(u32, u32) -> u32,
) -> Option<(u32, u32)> {
    (1..=MAX_CHECKSUM_BITS).find_map(|m| {
        let hd = hd_table(m, dataword_bits(frame_bits));
        let point = DesignPoint {
            frame_size_bits: frame_bits,
            checksum_bits: m,
            hd,
            frame_id_bits: 0,
            line_rate_bps,
            actual_rate_bps: None,
            rtt_s: 0.0,
            ber,
        };
        (point.mtbf_years() >= target_years).then_some((m, hd))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sizing {
    pub s_retrans_bits: u64,
    pub s_fc_bits: u64,
    pub thr_on: u64,
    pub thr_off: u64,
}

/// Minimum retransmission and flow-control buffers for one round trip.
pub fn sizing(line_rate_bps: f64, rtt_s: f64) -> Sizing {
    let bdp = line_rate_bps * rtt_s;
    let s_fc_bits = ceil_bits(1.5 * bdp);
    Sizing {
        s_retrans_bits: ceil_bits(bdp),
        s_fc_bits,
        thr_on: (2 * s_fc_bits).div_ceil(3),
        thr_off: s_fc_bits.div_ceil(3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthRow {
    pub frame_size_bits: u32,
    pub frame_id_bits: u32,
    pub checksum_bits: u32,
    pub hd: u32,
    pub mtbf_years: f64,
}

/// Minimal frame-ID and checksum widths per frame size for a 100-year
/// lifetime.
pub fn width_table(line_rate_bps: f64, rtt_s: f64, ber: f64) -> Vec<WidthRow> {
    TABLE_FRAME_SIZES
        .iter()
        .map(|&s| {
            let frame_id_bits = min_frame_id_bits(line_rate_bps, rtt_s, s);
            let (checksum_bits, hd) = min_checksum_bits(s, ber, line_rate_bps, 100.0, crc_hd_bound)
                .unwrap_or((MAX_CHECKSUM_BITS, crc_hd_bound(MAX_CHECKSUM_BITS, dataword_bits(s))));
            let mtbf_years = DesignPoint {
                frame_size_bits: s,
                checksum_bits,
                hd,
                frame_id_bits,
                line_rate_bps,
                actual_rate_bps: None,
                rtt_s,
                ber,
            }
            .mtbf_years();
            WidthRow {
                frame_size_bits: s,
                frame_id_bits,
                checksum_bits,
                hd,
                mtbf_years,
            }
        })
        .collect()
}

/// Error-free efficiency per frame size with a 12-bit Verification Code.
pub fn efficiency_table() -> Vec<(u32, f64)> {
    TABLE_FRAME_SIZES
        .iter()
        .map(|&s| (s, eff_zero(s, VERIFICATION_BITS)))
        .collect()
}

/// MTBF against BER for a fixed design, at the given effective rate.
pub fn mtbf_table(bers: &[f64], frame_bits: u32, checksum_bits: u32, hd: u32, rate_bps: f64) -> Vec<(f64, f64)> {
    bers.iter()
        .map(|&ber| {
            let p = DesignPoint {
                frame_size_bits: frame_bits,
                checksum_bits,
                hd,
                frame_id_bits: 0,
                line_rate_bps: rate_bps,
                actual_rate_bps: None,
                rtt_s: 0.0,
                ber,
            };
            (ber, p.mtbf_years())
        })
        .collect()
}
