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

//! Run metrics and CSV reports.

use std::io::Write;

use serde::Serialize;

use crate::analysis;
use crate::error::Result;
use crate::sim::DirectionReport;

/// Nearest-rank percentile of an ascending sample set.
pub fn percentile(sorted: &[u64], p: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub scenario_id: String,
    pub ber: f64,
    pub goodput_bps: f64,
    /// Error-free duration of the delivered traffic over the measured one.
    pub bandwidth_ratio: f64,
    pub latency_avg_ns: f64,
    pub latency_p95_ns: f64,
    pub latency_p99_ns: f64,
    pub latency_samples_ps: Vec<u64>,
    pub retrans_events: u64,
    pub frames_sent: u64,
    pub frames_invalid: u64,
    pub frames_control: u64,
    pub fc_high_water_bits: u64,
    /// Slots that did not carry new user data, per lane-slot.
    pub stall_slots: f64,
    pub corrupted_frames: u64,
    /// Stall slots per corrupted frame of this direction, which also
    /// absorbs stalls caused by reverse-direction errors.
    pub n_stall: f64,
}

impl RunMetrics {
    pub fn from_report(scenario_id: impl Into<String>, r: &DirectionReport) -> Self {
        let mut samples = r.latencies_ps.clone();
        samples.sort_unstable();
        let ps_to_ns = |v: u64| v as f64 / 1e3;
        let avg = if samples.is_empty() {
            0.0
        } else {
            samples.iter().map(|&v| v as f64).sum::<f64>() / samples.len() as f64 / 1e3
        };
        let (mut goodput, mut ratio, mut stall) = (0.0, 0.0, 0.0);
        if let (Some(first), Some(last)) = (r.first_accept_ps, r.last_delivery_ps) {
            let window = (last as f64 - first as f64 - r.latency_floor_ps as f64 + r.slot_ps).max(r.slot_ps);
            let ideal = r.flits_delivered.div_ceil(r.lanes as u64) as f64 * r.slot_ps;
            ratio = (ideal / window).min(1.0);
            goodput = r.bytes_delivered as f64 * 8.0 / (window * 1e-12);
            stall = (window / r.slot_ps * r.lanes as f64 - r.flits_delivered as f64).max(0.0);
        }
        let n_stall = if r.corrupted_in_window > 0 {
            stall / r.corrupted_in_window as f64
        } else {
            r.n_stall_default
        };
        Self {
            scenario_id: scenario_id.into(),
            ber: r.ber,
            goodput_bps: goodput,
            bandwidth_ratio: ratio,
            latency_avg_ns: avg,
            latency_p95_ns: ps_to_ns(percentile(&samples, 95.0)),
            latency_p99_ns: ps_to_ns(percentile(&samples, 99.0)),
            latency_samples_ps: samples,
            retrans_events: r.tx.retrans_events,
            frames_sent: r.tx.frames,
            frames_invalid: r.tx.invalid_frames,
            frames_control: r.tx.control_frames.iter().sum(),
            fc_high_water_bits: r.fc_high_water_bits,
            stall_slots: stall,
            corrupted_frames: r.corrupted_in_window,
            n_stall,
        }
    }

    /// Bandwidth ratio predicted from the closed-form efficiency with the
    /// measured stall per error.
    pub fn predicted_ratio(&self, frame_bits: u32) -> f64 {
        (1.0 - self.n_stall * analysis::fer(self.ber, frame_bits)).max(0.0)
    }
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    scenario_id: &'a str,
    ber: f64,
    goodput_bps: f64,
    bandwidth_ratio: f64,
    latency_avg_ns: f64,
    latency_p95_ns: f64,
    latency_p99_ns: f64,
    retrans_events: u64,
    frames_sent: u64,
    frames_invalid: u64,
}

pub fn write_metrics_csv<W: Write>(w: W, rows: &[RunMetrics]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for m in rows {
        out.serialize(MetricsRow {
            scenario_id: &m.scenario_id,
            ber: m.ber,
            goodput_bps: m.goodput_bps,
            bandwidth_ratio: m.bandwidth_ratio,
            latency_avg_ns: m.latency_avg_ns,
            latency_p95_ns: m.latency_p95_ns,
            latency_p99_ns: m.latency_p99_ns,
            retrans_events: m.retrans_events,
            frames_sent: m.frames_sent,
            frames_invalid: m.frames_invalid,
        })?;
    }
    out.flush()?;
    Ok(())
}

pub fn metrics_csv_string(rows: &[RunMetrics]) -> String {
    let mut buf = Vec::new();
    write_metrics_csv(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Line efficiency of back-to-back packets of one size: payload bits over
/// the frame bits they occupy.
pub fn frame_efficiency(packet_bytes: u32, payload_bytes: u32, frame_bits: u32) -> f64 {
    let frames = packet_bytes.div_ceil(payload_bytes) as f64;
    packet_bytes as f64 * 8.0 / (frames * frame_bits as f64)
}

/// `payload_bytes,efficiency` series from measured goodput.
pub fn efficiency_curve<W: Write>(w: W, points: &[(u32, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["payload_bytes", "efficiency"])?;
    for (size, eff) in points {
        out.write_record([size.to_string(), eff.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank() {
        let v: Vec<u64> = (1..=100).collect();
        assert_eq!(percentile(&v, 95.0), 95);
        assert_eq!(percentile(&v, 99.0), 99);
        assert_eq!(percentile(&v, 100.0), 100);
        assert_eq!(percentile(&[7], 99.0), 7);
        assert_eq!(percentile(&[], 50.0), 0);
    }

    #[test]
    fn sawtooth_efficiency() {
        assert_eq!(frame_efficiency(30, 30, 256), 0.9375);
        assert!((frame_efficiency(31, 30, 256) - 0.9375 * 31.0 / 60.0).abs() < 1e-12);
        assert!(frame_efficiency(60, 30, 256) > frame_efficiency(61, 30, 256));
        assert!((frame_efficiency(8192, 30, 256) - 0.9375).abs() < 0.01 * 0.9375);
    }

    #[test]
    fn csv_header() {
        let s = metrics_csv_string(&[]);
        assert!(s.is_empty() || s.starts_with("scenario_id"));
        let mut buf = Vec::new();
        efficiency_curve(&mut buf, &[(30, 0.9375)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "payload_bytes,efficiency\n30,0.9375\n");
    }
}
