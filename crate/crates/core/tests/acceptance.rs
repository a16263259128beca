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

//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rifl::analysis;
use rifl::endpoint::{Endpoint, TxFsm, TxKind};
use rifl::frame::FrameCodec;
use rifl::harness::{metrics_csv_string, SizeDist};
use rifl::line_coding::{Descrambler, Scrambler};
use rifl::sim::{self, Burst, BurstKind, Direction, DrainStall, Side};
use rifl::{ControlCode, Flit, LinkScenario, MetaCode, ProtocolConfig, RunMetrics, RunOutcome, TrafficSpec};

/// Prints one result line on the raw stderr handle, outside output capture.
fn verdict(n: u32, title: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance {n:>2} {title:<44} {}  {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    std::io::stderr()
        .lock()
        .write_all(line.as_bytes())
        .expect("writing stderr");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn mixed(bytes: u64, seed: u64) -> TrafficSpec {
    TrafficSpec::saturating(SizeDist::Uniform { min: 1, max: 8192 }, bytes, seed)
}

fn run(cfg: &ProtocolConfig, s: &LinkScenario, bytes: u64) -> RunOutcome {
    sim::run(cfg, s, &mixed(bytes, 1), &mixed(bytes, 2)).expect("valid scenario")
}

fn both(out: &RunOutcome, id: &str) -> [RunMetrics; 2] {
    Direction::BOTH.map(|d| RunMetrics::from_report(format!("{id}-{}", d.label()), out.direction(d)))
}

// 10^8 bits per direction.
const SWEEP_BYTES: u64 = 12_500_000;

struct SweepPoint {
    ber: f64,
    lossless: bool,
    bits_delivered: [u64; 2],
    metrics: [RunMetrics; 2],
    frame_bits: u32,
}

impl SweepPoint {
    fn ratio(&self) -> f64 {
        (self.metrics[0].bandwidth_ratio + self.metrics[1].bandwidth_ratio) / 2.0
    }

    fn predicted(&self) -> f64 {
        (self.metrics[0].predicted_ratio(self.frame_bits) + self.metrics[1].predicted_ratio(self.frame_bits)) / 2.0
    }

    fn mean_latency_ns(&self) -> f64 {
        (self.metrics[0].latency_avg_ns + self.metrics[1].latency_avg_ns) / 2.0
    }

    fn p99_ns(&self) -> f64 {
        self.metrics[0].latency_p99_ns.max(self.metrics[1].latency_p99_ns)
    }
}

fn sweep_bers() -> Vec<f64> {
    (0..=16).map(|i| 10f64.powf(-9.0 + 0.25 * i as f64)).collect()
}

fn sweep_point(ber: f64) -> SweepPoint {
    let cfg = ProtocolConfig::default();
    let out = run(&cfg, &LinkScenario::with_ber(ber), SWEEP_BYTES);
    SweepPoint {
        ber,
        lossless: out.lossless(),
        bits_delivered: Direction::BOTH.map(|d| out.direction(d).bytes_delivered * 8),
        metrics: both(&out, &format!("ber-{ber:.3e}")),
        frame_bits: cfg.frame_size_bits,
    }
}

fn sweep() -> &'static [SweepPoint] {
    static SWEEP: OnceLock<Vec<SweepPoint>> = OnceLock::new();
    SWEEP.get_or_init(|| sweep_bers().into_iter().map(sweep_point).collect())
}

fn point(ber: f64) -> &'static SweepPoint {
    sweep()
        .iter()
        .find(|p| rel_err(p.ber, ber) < 1e-9)
        .expect("BER is on the sweep grid")
}

#[test]
fn c01_design_table_widths_and_mtbf() {
    let t0 = Instant::now();
    let rows = analysis::width_table(100e9, 500e-9, 1e-7);
    let elapsed = t0.elapsed();
    let ids: Vec<u32> = rows.iter().map(|r| r.frame_id_bits).collect();
    let want_mtbf = [9.7e4, 2.4e4, 5.9e3, 1.5e3, 3.6e2];
    let worst = rows
        .iter()
        .zip(want_mtbf)
        .map(|(r, w)| rel_err(r.mtbf_years, w))
        .fold(0.0, f64::max);
    let pass = ids == [9, 8, 7, 6, 5] && worst <= 0.05 && elapsed < Duration::from_secs(1);
    let mtbf: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.mtbf_years)).collect();
    verdict(
        1,
        "frame-ID widths and MTBF per frame size",
        pass,
        &format!("ids {ids:?} mtbf {mtbf:?} worst {:.2}% in {elapsed:?}", worst * 100.0),
    );
}

#[test]
fn c02_error_free_efficiency() {
    let t0 = Instant::now();
    let rows = analysis::efficiency_table();
    let elapsed = t0.elapsed();
    let want = [
        (128, 0.875),
        (256, 0.9375),
        (512, 0.96875),
        (1024, 0.984375),
        (2048, 0.9921875),
    ];
    let pass = rows == want && elapsed < Duration::from_secs(1);
    verdict(2, "error-free efficiency per frame size", pass, &format!("{rows:?}"));
}

#[test]
fn c03_lossless_under_noise() {
    let t0 = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for ber in [1e-8, 1e-7, 1e-6, 1e-5] {
        let p = point(ber);
        let enough = p.bits_delivered.iter().all(|&b| b >= 100_000_000);
        pass &= p.lossless && enough;
        detail.push(format!(
            "{ber:.0e}:{}",
            if p.lossless && enough { "ok" } else { "LOSS" }
        ));
    }
    verdict(
        3,
        "lossless duplex streams, 1e-8..1e-5",
        pass,
        &format!("{} ({:?} incl. sweep)", detail.join(" "), t0.elapsed()),
    );
}

#[test]
fn c04_bandwidth_degradation_shape() {
    let pts = sweep();
    let mut pass = true;
    let mut notes = Vec::new();
    for p in pts.iter().filter(|p| p.ber <= 1e-9 * (1.0 + 1e-9)) {
        if (p.ratio() - 1.0).abs() > 0.005 {
            pass = false;
            notes.push(format!("ratio {:.4} at {:.2e}", p.ratio(), p.ber));
        }
    }
    for w in pts.windows(2) {
        if w[1].ratio() > w[0].ratio() {
            pass = false;
            notes.push(format!("rise {:.2e}->{:.2e}", w[0].ber, w[1].ber));
        }
    }
    let r7 = point(1e-7).ratio();
    let r5 = point(1e-5).ratio();
    if r5 >= 0.5 * r7 {
        pass = false;
        notes.push(format!("r(1e-5) {r5:.4} vs r(1e-7) {r7:.4}"));
    }
    let mut worst = 0.0f64;
    for p in pts {
        let e = rel_err(p.predicted(), p.ratio());
        worst = worst.max(e);
        if e > 0.20 {
            pass = false;
            notes.push(format!(
                "prediction {:.4} vs {:.4} at {:.2e}",
                p.predicted(),
                p.ratio(),
                p.ber
            ));
        }
    }
    let curve: Vec<String> = pts.iter().map(|p| format!("{:.4}", p.ratio())).collect();
    verdict(
        4,
        "bandwidth ratio vs BER",
        pass,
        &format!(
            "r(1e-7) {r7:.4} r(1e-5) {r5:.4} worst prediction error {:.1}% curve [{}] {}",
            worst * 100.0,
            curve.join(" "),
            notes.join("; ")
        ),
    );
}

#[test]
fn c05_latency_floor_and_tails() {
    let cfg = ProtocolConfig::default();
    let s = LinkScenario::default();
    let out = run(&cfg, &s, 2_000_000);
    let slot_ps = (cfg.frame_size_bits as f64 / cfg.line_rate_bps * 1e12).round();
    let floor_ps = slot_ps + (s.circuit_delay_ns + s.cable_length_m * s.propagation_ns_per_m) * 1e3;
    let floor_ns = floor_ps / 1e3;
    let clean = Direction::BOTH.iter().all(|&d| {
        let r = out.direction(d);
        !r.latencies_ps.is_empty() && r.latencies_ps.iter().all(|&l| l as f64 == floor_ps)
    });
    let slot_ns = slot_ps / 1e3;
    let mut pass = clean && out.lossless();
    let mut notes = Vec::new();
    for p in sweep().iter().filter(|p| p.ber <= 1e-7 * (1.0 + 1e-9)) {
        if (p.p99_ns() - floor_ns).abs() > slot_ns || p.mean_latency_ns() > 1.05 * floor_ns {
            pass = false;
            notes.push(format!(
                "{:.2e}: p99 {:.1} mean {:.1}",
                p.ber,
                p.p99_ns(),
                p.mean_latency_ns()
            ));
        }
    }
    let rising: Vec<&SweepPoint> = sweep().iter().filter(|p| p.ber >= 1e-6 * (1.0 - 1e-9)).collect();
    for w in rising.windows(2) {
        if w[1].mean_latency_ns() <= w[0].mean_latency_ns() {
            pass = false;
            notes.push(format!("mean flat {:.2e}->{:.2e}", w[0].ber, w[1].ber));
        }
    }
    let m5 = point(1e-5).mean_latency_ns();
    if m5 < 2.0 * floor_ns {
        pass = false;
        notes.push(format!("mean at 1e-5 only {m5:.1} ns"));
    }
    verdict(
        5,
        "latency floor and tails",
        pass,
        &format!(
            "floor {floor_ns:.3} ns exact={clean} mean(1e-7) {:.2} mean(1e-6) {:.2} mean(1e-5) {m5:.2} {}",
            point(1e-7).mean_latency_ns(),
            point(1e-6).mean_latency_ns(),
            notes.join("; ")
        ),
    );
}

#[test]
fn c06_exhaustive_low_weight_errors_are_detected() {
    let t0 = Instant::now();
    let codec = FrameCodec::new(ProtocolConfig::default());
    let payload: Vec<u8> = (0..codec.config().payload_bytes())
        .map(|i| (i * 37 + 11) as u8)
        .collect();
    let id = 0x5A;
    let clean = codec.serialize_data(&codec.encode_data(MetaCode::ValidMid, payload, id).unwrap());
    let n = clean.len();
    let mut bits = clean.clone();
    let mut patterns = 0u64;
    let mut undetected = 0u64;
    let mut check = |bits: &rifl::FrameBits| {
        patterns += 1;
        if matches!(
            codec.decode(bits, id),
            Ok(rifl::Decoded::Data(_) | rifl::Decoded::Control(_))
        ) {
            undetected += 1;
        }
    };
    for i in 0..n {
        bits.flip(i);
        check(&bits);
        for j in i + 1..n {
            bits.flip(j);
            check(&bits);
            for k in j + 1..n {
                bits.flip(k);
                check(&bits);
                bits.flip(k);
            }
            bits.flip(j);
        }
        bits.flip(i);
    }
    let elapsed = t0.elapsed();
    let pass = patterns == 2_796_416 && undetected == 0 && elapsed < Duration::from_secs(60);
    verdict(
        6,
        "all 1/2/3-bit errors detected (256-bit frame)",
        pass,
        &format!("{patterns} patterns, {undetected} undetected, {elapsed:?}"),
    );
}

/// Lock-step duplex link with a tap on the A-to-B line that can rewrite the
/// cleartext of any frame.
struct TappedLink {
    a: Endpoint,
    b: Endpoint,
    tap: Descrambler,
    line: Scrambler,
    codec: FrameCodec,
}

impl TappedLink {
    fn new() -> Self {
        let cfg = ProtocolConfig::default();
        Self {
            a: Endpoint::new(cfg, 1 << 20),
            b: Endpoint::new(cfg, 1 << 20),
            tap: Descrambler::new(),
            line: Scrambler::new(),
            codec: FrameCodec::new(cfg),
        }
    }

    fn step(
        &mut self,
        flit: Option<&Flit>,
        rewrite: &mut dyn FnMut(&TxKind, &mut rifl::FrameBits, &FrameCodec),
    ) -> (TxKind, bool, rifl::endpoint::RxOutcome) {
        let out = self.a.transmit(flit).unwrap();
        let mut clear = out.bits.clone();
        self.tap.descramble_frame(&mut clear);
        rewrite(&out.kind, &mut clear, &self.codec);
        self.line.scramble_frame(&mut clear);
        let got = self.b.receive(clear);
        let back = self.b.transmit(None).unwrap();
        self.a.receive(back.bits);
        (out.kind, out.flit_consumed, got)
    }
}

#[test]
fn c07_rollback_warmup_and_alias_rejection() {
    let mut link = TappedLink::new();
    let mut noop = |_: &TxKind, _: &mut rifl::FrameBits, _: &FrameCodec| {};
    while link.a.tx().state() != TxFsm::Normal || link.b.tx().state() != TxFsm::Normal {
        link.step(None, &mut noop);
    }
    let flits: Vec<Flit> = (0..400u32)
        .map(|i| Flit::new((0..30).map(|j| (i * 7 + j) as u8).collect(), i % 5 == 4))
        .collect();
    let mut next = 0;
    let mut delivered = Vec::new();
    let mut corrupted_68 = false;
    let mut rollback_to = None;
    let mut aliases_left = 24u32;
    let mut verified_since_failure: Vec<u32> = Vec::new();
    let mut warmup_ok = None;
    for _ in 0..20_000 {
        let flit = flits.get(next);
        let mut rewrite = |kind: &TxKind, clear: &mut rifl::FrameBits, codec: &FrameCodec| {
            if let TxKind::Data { frame_id, replay, .. } = *kind {
                if frame_id == 68 && !replay && !corrupted_68 {
                    corrupted_68 = true;
                    clear.flip(100);
                } else if replay && aliases_left > 0 {
                    // valid under an ID one bit away from the expected one
                    aliases_left -= 1;
                    let alias = frame_id ^ (1 << (aliases_left % 8));
                    let junk = vec![0xA5; codec.config().payload_bytes()];
                    let frame = codec.encode_data(MetaCode::ValidMid, junk, alias).unwrap();
                    *clear = codec.serialize_data(&frame);
                }
            }
        };
        let (kind, consumed, got) = link.step(flit, &mut rewrite);
        if consumed {
            next += 1;
        }
        if got.failed {
            verified_since_failure.clear();
            if rollback_to.is_none() && corrupted_68 {
                rollback_to = Some(link.b.rx().frame_id());
            }
        } else if let TxKind::Data { frame_id, .. } = kind {
            if got.delivered && frame_id == 68 && warmup_ok.is_none() {
                warmup_ok = Some(verified_since_failure == (52..68).collect::<Vec<_>>());
            }
            verified_since_failure.push(frame_id);
        }
        while let Some(f) = link.b.drain() {
            delivered.push(f);
        }
        if delivered.len() == flits.len() {
            break;
        }
    }
    let exact = delivered == flits;
    let pass = exact && rollback_to == Some(52) && warmup_ok == Some(true) && aliases_left == 0;
    verdict(
        7,
        "rollback at frame 68, warm-up, alias rejection",
        pass,
        &format!(
            "rollback to {rollback_to:?}, 52..67 re-verified before 68: {warmup_ok:?}, {} aliases injected, stream exact: {exact}",
            24 - aliases_left
        ),
    );
}

fn fc_scenario(stall: DrainStall, corrupt_notifications: bool) -> LinkScenario {
    let mut s = LinkScenario {
        record_deliveries: true,
        ..LinkScenario::default()
    };
    s.drain_stalls.push(stall);
    if corrupt_notifications {
        s.bursts.push(Burst {
            direction: Direction::BToA,
            lane: 0,
            kind: BurstKind::FlowNotifications,
        });
    }
    s
}

/// Delivered bytes per ns over `[from, to)` ns.
fn rate(log: &[(u64, u32)], from: f64, to: f64) -> f64 {
    let bytes: u64 = log
        .iter()
        .filter(|(t, _)| (*t as f64 / 1e3) >= from && (*t as f64 / 1e3) < to)
        .map(|&(_, b)| b as u64)
        .sum();
    bytes as f64 / (to - from)
}

#[test]
fn c08_flow_control_safety_and_liveness() {
    let cfg = ProtocolConfig::default();
    let base = LinkScenario::default();
    let rtt_ns = base.rtt_s() * 1e9;
    let required = 1.5 * cfg.line_rate_bps * base.rtt_s();
    let mut notes = Vec::new();
    let mut pass = true;
    for corrupt in [false, true] {
        let tag = if corrupt { "corrupted" } else { "clean" };
        // indefinite stall
        let mut s = fc_scenario(
            DrainStall {
                side: Side::B,
                start_ns: 20_000.0,
                end_ns: None,
            },
            corrupt,
        );
        s.max_slots = Some(200_000);
        let out = run(&cfg, &s, 4_000_000);
        let r = out.direction(Direction::AToB);
        let safe = r.fc_high_water_bits <= r.fc_capacity_bits
            && r.fc_overflows == 0
            && r.fc_capacity_bits as f64 >= required
            && r.mismatch.is_none();
        pass &= safe;
        notes.push(format!(
            "{tag}: high water {} of {} bits (min {required:.0})",
            r.fc_high_water_bits, r.fc_capacity_bits
        ));
        // stall, then resume
        let (start, end) = (20_000.0, 60_000.0);
        let s = fc_scenario(
            DrainStall {
                side: Side::B,
                start_ns: start,
                end_ns: Some(end),
            },
            corrupt,
        );
        let out = run(&cfg, &s, 4_000_000);
        let r = out.direction(Direction::AToB);
        let window = 10_000.0;
        let before = rate(&r.deliveries, start - window, start);
        let slot_ns = cfg.frame_period_s() * 1e9;
        let delay = (0..)
            .map(|k| k as f64 * slot_ns)
            .take_while(|d| end + d < end + 100.0 * rtt_ns)
            .find(|d| rate(&r.deliveries, end + d, end + d + window) >= 0.99 * before);
        // a corrupted notification costs one replay schedule
        let budget = 2.0 * rtt_ns
            + if corrupt {
                cfg.replay_len() as f64 * slot_ns
            } else {
                0.0
            };
        let live = out.lossless() && delay.is_some_and(|d| d <= budget) && r.fc_overflows == 0;
        pass &= live;
        notes.push(format!(
            "back to 99% after {} ns (budget {budget:.0})",
            delay.map_or("never".into(), |d| format!("{d:.0}"))
        ));
    }
    verdict(8, "flow control bounded and live", pass, &notes.join(", "));
}

#[test]
fn c09_nack_only() {
    let cfg = ProtocolConfig::default();
    let s = LinkScenario {
        min_slots: 10_000_000,
        ..LinkScenario::default()
    };
    let out = run(&cfg, &s, 20_000_000);
    let counts: Vec<[u64; 3]> = Direction::BOTH
        .iter()
        .map(|&d| out.direction(d).tx.control_after_linkup)
        .collect();
    let requests: u64 = counts
        .iter()
        .map(|c| c[ControlCode::PauseRequest as usize] + c[ControlCode::RetransmitRequest as usize])
        .sum();
    let frames = out.slots[0].min(out.slots[1]);
    let pass = out.lossless() && frames >= 10_000_000 && requests == 0;
    verdict(
        9,
        "no requests on an error-free link",
        pass,
        &format!("{frames} frames per side, {requests} PAUSE/RETRANSMIT requests after link-up"),
    );
}

#[test]
fn c10_clock_compensation() {
    let cfg = ProtocolConfig::default();
    let s = LinkScenario {
        ppm_a: -200.0,
        ppm_b: 200.0,
        min_slots: 10_000_000,
        ..LinkScenario::default()
    };
    let out = run(&cfg, &s, 20_000_000);
    let credits: Vec<u64> = Direction::BOTH.iter().map(|&d| out.direction(d).comp_credits).collect();
    let fast = out.direction(Direction::AToB);
    let slow = out.direction(Direction::BToA);
    let skew = (1e12 + s.ppm_b * 1e6) / (1e12 + s.ppm_a * 1e6) - 1.0;
    let expected = skew * out.slots[0] as f64;
    let err = rel_err(fast.comp_credits as f64, expected);
    let pass =
        out.lossless() && err <= 1e-3 && slow.comp_credits == 0 && fast.fc_overflows == 0 && slow.fc_overflows == 0;
    verdict(
        10,
        "clock compensation at +-200 ppm",
        pass,
        &format!("credits {credits:?}, expected {expected:.1}, error {:.3}%", err * 100.0),
    );
}

#[test]
fn c11_channel_bonding() {
    let one = ProtocolConfig::default();
    let four = ProtocolConfig { lanes: 4, ..one };
    let skewed = LinkScenario {
        lane_skew_slots: vec![0, 3, 8, 5],
        ..LinkScenario::with_ber(1e-6)
    };
    let noisy = run(&four, &skewed, 4_000_000);
    let clean_skewed = LinkScenario {
        lane_skew_slots: vec![0, 3, 8, 5],
        ..LinkScenario::default()
    };
    let g4 = both(&run(&four, &clean_skewed, 8_000_000), "x4")[0].goodput_bps;
    let g1 = both(&run(&one, &LinkScenario::default(), 2_000_000), "x1")[0].goodput_bps;
    let speedup = g4 / g1;
    let pass = noisy.lossless() && speedup >= 3.96;
    verdict(
        11,
        "4-lane bonding with skew",
        pass,
        &format!("identity at 1e-6: {}, goodput x{speedup:.4}", noisy.lossless()),
    );
}

#[test]
fn c12_determinism() {
    let first = metrics_csv_string(&point(1e-6).metrics);
    let again = sweep_point(1e-6);
    let second = metrics_csv_string(&again.metrics);
    let pass = first == second;
    verdict(
        12,
        "identical seeds give identical metrics CSV",
        pass,
        &format!("{} bytes compared", first.len()),
    );
}
