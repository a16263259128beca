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

//! Duplex link event loop.

use std::collections::VecDeque;
use std::iter::Peekable;
use std::sync::Arc;

use super::errors::ErrorModel;
use super::queue::EventQueue;
use super::scenario::{BurstKind, Direction, LinkScenario, Side};
use crate::bits::FrameBits;
use crate::bonding::{Dispatcher, Gatherer};
use crate::config::{ProtocolConfig, SYN_BITS};
use crate::endpoint::{Endpoint, TxKind, TxStats};
use crate::error::Result;
use crate::frame::{ControlCode, Flit, FrameCodec, InvalidMarker};
use crate::harness::{FlitSource, MismatchReport, SourceFlit, StreamValidator, TrafficSpec};

/// Flits queued per lane between the user and the TX controller.
const DISPATCH_DEPTH: usize = 2;

/// Everything observed about one direction of the link.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionReport {
    pub direction: Direction,
    pub ber: f64,
    pub lanes: u32,
    pub frame_bits: u32,
    /// Nominal frame slot of the sender.
    pub slot_ps: f64,
    /// Serialization plus one-way delay.
    pub latency_floor_ps: u64,
    /// Lost slots per error when one replay schedule absorbs it.
    pub n_stall_default: f64,
    /// Every expected flit arrived and matched.
    pub complete: bool,
    pub mismatch: Option<MismatchReport>,
    pub flits_delivered: u64,
    pub packets_delivered: u64,
    pub bytes_delivered: u64,
    pub first_accept_ps: Option<u64>,
    pub last_accept_ps: Option<u64>,
    pub last_delivery_ps: Option<u64>,
    /// Per packet: delivery of the last flit minus its TX acceptance.
    pub latencies_ps: Vec<u64>,
    pub corrupted_frames: u64,
    /// Corrupted frames sent between the first and last user flit.
    pub corrupted_in_window: u64,
    pub flipped_bits: u64,
    pub bits_sent: u64,
    /// Sender counters, summed over lanes.
    pub tx: TxStats,
    /// Verification failures at the receiver.
    pub rx_failures: u64,
    pub fc_capacity_bits: u64,
    pub fc_high_water_bits: u64,
    pub fc_overflows: u64,
    /// Clock-compensation credits issued to the sender.
    pub comp_credits: u64,
    /// `(time, bytes)` of each user delivery, when recorded.
    pub deliveries: Vec<(u64, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Indexed by [`Direction::index`].
    pub directions: [DirectionReport; 2],
    pub completed: bool,
    pub end_ps: u64,
    /// Slots run per side.
    pub slots: [u64; 2],
}

impl RunOutcome {
    pub fn direction(&self, d: Direction) -> &DirectionReport {
        &self.directions[d.index()]
    }

    pub fn lossless(&self) -> bool {
        self.completed && self.directions.iter().all(|d| d.mismatch.is_none())
    }
}

enum Event {
    Tick(Side),
    Arrive { to: Side, lane: usize, bits: FrameBits },
}

const ARRIVAL: u8 = 0;
const TICK: u8 = 1;

/// Tick k happens at floor(k * num / den) ps.
#[derive(Debug, Clone, Copy)]
struct Clock {
    num: u128,
    den: u128,
}

impl Clock {
    fn new(cfg: &ProtocolConfig, ppm: f64) -> Self {
        let scale = 1_000_000_000_000i128 + (ppm * 1e6).round() as i128;
        Self {
            num: cfg.frame_size_bits as u128 * scale as u128,
            den: cfg.line_rate_bps.round() as u128,
        }
    }

    fn time(&self, k: u64) -> u64 {
        (k as u128 * self.num / self.den) as u64
    }
}

struct SideState {
    lanes: Vec<Endpoint>,
    clock: Clock,
    tick: u64,
    source: Peekable<FlitSource>,
    dispatcher: Dispatcher<SourceFlit>,
    gatherer: Gatherer,
    tokens: u32,
}

/// Bookkeeping for traffic flowing in one direction.
struct Flow {
    validator: StreamValidator,
    eop_accept: VecDeque<Option<u64>>,
    eop_base: u64,
    first_accept: Option<u64>,
    last_accept: Option<u64>,
    last_delivery: Option<u64>,
    flits: u64,
    packets: u64,
    bytes: u64,
    latencies: Vec<u64>,
    corrupt_times: Vec<u64>,
    flipped: u64,
    bits_sent: u64,
    errors: Vec<ErrorModel>,
    fc_bursts: Vec<usize>,
    rr_bursts: Vec<(usize, u64)>,
    frame_bursts: Vec<(usize, u64, u64)>,
    deliveries: Option<Vec<(u64, u32)>>,
}

impl Flow {
    fn accept(&mut self, f: &SourceFlit, now: u64) {
        self.first_accept.get_or_insert(now);
        self.last_accept = Some(now);
        if f.flit.last && f.packet >= self.eop_base {
            let idx = (f.packet - self.eop_base) as usize;
            if self.eop_accept.len() <= idx {
                self.eop_accept.resize(idx + 1, None);
            }
            self.eop_accept[idx] = Some(now);
        }
    }

    fn deliver(&mut self, flit: &Flit, now: u64) {
        self.validator.push(flit);
        self.flits += 1;
        self.bytes += flit.data.len() as u64;
        self.last_delivery = Some(now);
        if let Some(log) = &mut self.deliveries {
            log.push((now, flit.data.len() as u32));
        }
        if flit.last {
            self.packets += 1;
            self.eop_base += 1;
            if let Some(Some(t)) = self.eop_accept.pop_front() {
                self.latencies.push(now - t);
            }
        }
    }

    /// Deterministic burst corruption; returns bits flipped.
    fn burst(&mut self, lane: usize, index: u64, kind: &TxKind, bits: &mut FrameBits) -> u32 {
        let mut hit = self
            .frame_bursts
            .iter()
            .any(|&(l, start, count)| l == lane && (start..start + count).contains(&index));
        if let TxKind::Data {
            marker: Some(InvalidMarker::FlowPause | InvalidMarker::FlowResume),
            replay: false,
            ..
        } = kind
        {
            hit |= self.fc_bursts.contains(&lane);
        }
        if *kind == TxKind::Control(ControlCode::RetransmitRequest) {
            if let Some(b) = self.rr_bursts.iter_mut().find(|b| b.0 == lane && b.1 > 0) {
                b.1 -= 1;
                hit = true;
            }
        }
        if !hit {
            return 0;
        }
        let body = bits.len() - SYN_BITS as usize;
        let pos = SYN_BITS as usize + ((index * 7919 + lane as u64 * 31) % body as u64) as usize;
        bits.flip(pos);
        1
    }
}

fn estimated_flits(spec: &TrafficSpec, width: usize) -> u64 {
    match spec {
        TrafficSpec::Saturating(g) => 2 * g.total_bytes.div_ceil(width as u64) + 8192,
        TrafficSpec::Records(r) => r.len() as u64 + r.last().map_or(0, |r| r.cycle),
    }
}

struct Sim<'a> {
    scenario: &'a LinkScenario,
    cfg: ProtocolConfig,
    queue: EventQueue<Event>,
    sides: [SideState; 2],
    /// Indexed by sending side.
    flows: [Flow; 2],
    ser_ps: u64,
    one_way_ps: u64,
    skew_ps: Vec<u64>,
}

impl Sim<'_> {
    fn stalled(&self, s: Side, now: u64) -> bool {
        self.scenario.drain_stalls.iter().any(|w| w.side == s && w.covers(now))
    }

    fn drain(&mut self, s: Side, now: u64) {
        if self.stalled(s, now) {
            return;
        }
        let side = &mut self.sides[s.index()];
        let flow = &mut self.flows[s.peer().index()];
        while side.tokens > 0 {
            let Some(flit) = side.gatherer.next(&mut side.lanes) else {
                break;
            };
            side.tokens -= 1;
            flow.deliver(&flit, now);
        }
    }

    fn tick(&mut self, s: Side, now: u64) -> Result<()> {
        let si = s.index();
        let lanes = self.cfg.lanes;
        if !self.stalled(s, now) {
            let side = &mut self.sides[si];
            side.tokens = (side.tokens + lanes).min(2 * lanes);
        }
        self.drain(s, now);

        let side = &mut self.sides[si];
        let flow = &mut self.flows[si];
        while side.dispatcher.ready() {
            match side.source.peek() {
                Some(f) if f.cycle <= side.tick => {
                    let f = side.source.next().expect("peeked");
                    let _ = side.dispatcher.offer(f);
                }
                _ => break,
            }
        }
        for lane in 0..lanes as usize {
            let out = {
                let user = side.dispatcher.front(lane).map(|f| &f.flit);
                side.lanes[lane].transmit(user)?
            };
            if out.flit_consumed {
                let f = side.dispatcher.pop(lane).expect("consumed flit was queued");
                flow.accept(&f, now);
            }
            let mut bits = out.bits;
            let mut flips = flow.errors[lane].apply(side.tick, &mut bits);
            flips += flow.burst(lane, side.tick, &out.kind, &mut bits);
            if flips > 0 {
                flow.corrupt_times.push(now);
                flow.flipped += flips as u64;
            }
            flow.bits_sent += bits.len() as u64;
            let at = now + self.ser_ps + self.one_way_ps + self.skew_ps[lane];
            self.queue.push(
                at,
                ARRIVAL,
                Event::Arrive {
                    to: s.peer(),
                    lane,
                    bits,
                },
            );
        }
        side.tick += 1;
        self.queue.push(side.clock.time(side.tick), TICK, Event::Tick(s));
        Ok(())
    }

    fn complete(&mut self) -> bool {
        self.flows.iter_mut().all(|f| f.validator.complete())
    }
}

/// Runs a duplex link until both traffic streams have been delivered (plus
/// a settling tail), or until the slot limit.
pub fn run(
    cfg: &ProtocolConfig,
    scenario: &LinkScenario,
    traffic_ab: &TrafficSpec,
    traffic_ba: &TrafficSpec,
) -> Result<RunOutcome> {
    scenario.validate(cfg)?;
    let width = cfg.payload_bytes();
    traffic_ab.validate(width)?;
    traffic_ba.validate(width)?;
    let codec = Arc::new(FrameCodec::new(*cfg));
    let lanes = cfg.lanes as usize;
    let fc_bits = scenario.fc_capacity(cfg);
    let slot_ps = cfg.frame_size_bits as f64 * 1e12 / cfg.line_rate_bps;
    let traffic = [traffic_ab, traffic_ba];

    let make_side = |s: Side| {
        let endpoints = (0..lanes)
            .map(|_| {
                let mut e = Endpoint::with_codec(codec.clone(), fc_bits);
                e.set_clock_compensation(scenario.clock_compensation);
                e
            })
            .collect();
        SideState {
            lanes: endpoints,
            clock: Clock::new(cfg, scenario.ppm(s)),
            tick: 0,
            source: traffic[s.index()].source(width).peekable(),
            dispatcher: Dispatcher::new(lanes, DISPATCH_DEPTH),
            gatherer: Gatherer::new(),
            tokens: 2 * cfg.lanes,
        }
    };
    let make_flow = |d: Direction| {
        let mut flow = Flow {
            validator: StreamValidator::new(traffic[d.index()].source(width)),
            eop_accept: VecDeque::new(),
            eop_base: 0,
            first_accept: None,
            last_accept: None,
            last_delivery: None,
            flits: 0,
            packets: 0,
            bytes: 0,
            latencies: Vec::new(),
            corrupt_times: Vec::new(),
            flipped: 0,
            bits_sent: 0,
            errors: (0..lanes)
                .map(|l| ErrorModel::new(scenario.ber(d), cfg.frame_size_bits, scenario.seed(d), l as u64))
                .collect(),
            fc_bursts: Vec::new(),
            rr_bursts: Vec::new(),
            frame_bursts: Vec::new(),
            deliveries: scenario.record_deliveries.then(Vec::new),
        };
        for b in scenario.bursts.iter().filter(|b| b.direction == d) {
            let lane = b.lane as usize;
            match b.kind {
                BurstKind::Frames { start, count } => flow.frame_bursts.push((lane, start, count)),
                BurstKind::FlowNotifications => flow.fc_bursts.push(lane),
                BurstKind::RetransmitRequests { count } => flow.rr_bursts.push((lane, count)),
            }
        }
        flow
    };

    let mut sim = Sim {
        scenario,
        cfg: *cfg,
        queue: EventQueue::new(),
        sides: [make_side(Side::A), make_side(Side::B)],
        flows: [make_flow(Direction::AToB), make_flow(Direction::BToA)],
        ser_ps: slot_ps.round() as u64,
        one_way_ps: (scenario.one_way_delay_ns() * 1e3).round() as u64,
        skew_ps: (0..lanes)
            .map(|l| (scenario.skew_slots(l) as f64 * slot_ps).round() as u64)
            .collect(),
    };

    let rtt_slots = (scenario.rtt_s() * 1e12 / slot_ps).ceil() as u64;
    let tail = 2 * cfg.replay_len() as u64 + rtt_slots + scenario.max_skew_slots() as u64;
    let est = estimated_flits(traffic_ab, width).max(estimated_flits(traffic_ba, width));
    let max_slots = scenario
        .max_slots
        .unwrap_or(scenario.min_slots + 1_000_000 + 100 * est.div_ceil(lanes as u64));

    sim.queue.push(0, TICK, Event::Tick(Side::A));
    sim.queue.push(0, TICK, Event::Tick(Side::B));
    let mut done_at: Option<u64> = None;
    let mut end_ps = 0;
    while let Some((now, event)) = sim.queue.pop() {
        end_ps = now;
        match event {
            Event::Tick(s) => {
                if s == Side::A {
                    let t = sim.sides[0].tick;
                    if done_at.is_none() && sim.complete() {
                        done_at = Some(t);
                    }
                    let stop = match done_at {
                        Some(d) => t >= scenario.min_slots.max(d + tail),
                        None => false,
                    };
                    if stop || t >= max_slots {
                        break;
                    }
                }
                sim.tick(s, now)?;
            }
            Event::Arrive { to, lane, bits } => {
                sim.sides[to.index()].lanes[lane].receive(bits);
                sim.drain(to, now);
            }
        }
    }

    let completed = sim.complete();
    let Sim {
        sides,
        flows,
        ser_ps,
        one_way_ps,
        ..
    } = sim;
    let slots = [sides[0].tick, sides[1].tick];
    let reports = flows.into_iter().enumerate().map(|(i, mut f)| {
        let d = Direction::BOTH[i];
        let sender = &sides[i];
        let receiver = &sides[1 - i];
        let mut tx = TxStats::default();
        for e in &sender.lanes {
            tx.accumulate(e.tx().stats());
        }
        let in_window = match (f.first_accept, f.last_accept) {
            (Some(a), Some(b)) => f.corrupt_times.iter().filter(|&&t| t >= a && t <= b).count() as u64,
            _ => 0,
        };
        DirectionReport {
            direction: d,
            ber: scenario.ber(d),
            lanes: cfg.lanes,
            frame_bits: cfg.frame_size_bits,
            slot_ps,
            latency_floor_ps: ser_ps + one_way_ps,
            n_stall_default: crate::analysis::n_stall_default(
                cfg.frame_id_bits,
                cfg.line_rate_bps,
                scenario.rtt_s(),
                cfg.frame_size_bits,
            ),
            complete: f.validator.complete(),
            mismatch: f.validator.mismatch().cloned(),
            flits_delivered: f.flits,
            packets_delivered: f.packets,
            bytes_delivered: f.bytes,
            first_accept_ps: f.first_accept,
            last_accept_ps: f.last_accept,
            last_delivery_ps: f.last_delivery,
            latencies_ps: std::mem::take(&mut f.latencies),
            corrupted_frames: f.corrupt_times.len() as u64,
            corrupted_in_window: in_window,
            flipped_bits: f.flipped,
            bits_sent: f.bits_sent,
            tx,
            rx_failures: receiver.lanes.iter().map(|e| e.rx().stats().failures).sum(),
            fc_capacity_bits: fc_bits,
            fc_high_water_bits: receiver
                .lanes
                .iter()
                .map(|e| e.fc().high_water_bits())
                .max()
                .unwrap_or(0),
            fc_overflows: receiver.lanes.iter().map(|e| e.fc().overflows()).sum(),
            comp_credits: sender.lanes.iter().map(|e| e.comp().total_credits()).sum(),
            deliveries: f.deliveries.take().unwrap_or_default(),
        }
    });
    let directions: Vec<DirectionReport> = reports.collect();
    let directions: [DirectionReport; 2] = directions.try_into().expect("two directions");
    Ok(RunOutcome {
        completed,
        end_ps,
        slots,
        directions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SizeDist;
    use crate::sim::{Burst, DrainStall};

    fn traffic(bytes: u64, seed: u64) -> TrafficSpec {
        TrafficSpec::saturating(SizeDist::Uniform { min: 1, max: 2000 }, bytes, seed)
    }

    fn go(cfg: &ProtocolConfig, s: &LinkScenario, bytes: u64) -> RunOutcome {
        run(cfg, s, &traffic(bytes, 1), &traffic(bytes, 2)).unwrap()
    }

    #[test]
    fn error_free_identity_and_latency_floor() {
        let cfg = ProtocolConfig::default();
        let s = LinkScenario::default();
        let out = go(&cfg, &s, 200_000);
        assert!(out.lossless());
        for d in &out.directions {
            assert_eq!(d.tx.retrans_events, 0);
            assert!(d.latencies_ps.iter().all(|&l| l == d.latency_floor_ps));
            // 256 bits at 28 Gbps plus 40 ns circuit and 10 m at 5 ns/m
            assert_eq!(d.latency_floor_ps, 9143 + 90_000);
        }
    }

    #[test]
    fn noisy_link_is_lossless() {
        let cfg = ProtocolConfig::default();
        let out = go(&cfg, &LinkScenario::with_ber(1e-5), 300_000);
        assert!(out.lossless(), "{:?}", out.directions[0].mismatch);
        assert!(out.directions.iter().all(|d| d.tx.retrans_events > 0));
    }

    #[test]
    fn deterministic() {
        let cfg = ProtocolConfig::default();
        let s = LinkScenario::with_ber(1e-5);
        assert_eq!(go(&cfg, &s, 50_000), go(&cfg, &s, 50_000));
    }

    #[test]
    fn burst_of_eight_frames_recovers() {
        let cfg = ProtocolConfig::default();
        let mut s = LinkScenario::default();
        s.bursts.push(Burst {
            direction: Direction::AToB,
            lane: 0,
            kind: BurstKind::Frames { start: 1000, count: 8 },
        });
        let out = go(&cfg, &s, 100_000);
        assert!(out.lossless());
        assert!(out.direction(Direction::AToB).tx.retrans_events >= 1);
    }

    #[test]
    fn both_directions_at_once() {
        let cfg = ProtocolConfig::default();
        let mut s = LinkScenario::default();
        for d in Direction::BOTH {
            s.bursts.push(Burst {
                direction: d,
                lane: 0,
                kind: BurstKind::Frames { start: 1500, count: 3 },
            });
        }
        let out = go(&cfg, &s, 100_000);
        assert!(out.lossless());
        assert!(out.directions.iter().all(|d| d.tx.retrans_events >= 1));
    }

    #[test]
    fn errors_during_warmup_do_not_stall() {
        let cfg = ProtocolConfig::default();
        let clean = go(&cfg, &LinkScenario::default(), 100_000).slots[0];
        for start in 240..300 {
            for dirs in [&Direction::BOTH[..], &[Direction::AToB], &[Direction::BToA]] {
                let mut s = LinkScenario::default();
                for &d in dirs {
                    s.bursts.push(Burst {
                        direction: d,
                        lane: 0,
                        kind: BurstKind::Frames { start, count: 1 },
                    });
                }
                let out = go(&cfg, &s, 100_000);
                assert!(out.lossless(), "start {start} {dirs:?}");
                assert!(
                    out.slots[0] < clean + 4 * cfg.replay_len() as u64,
                    "start {start} {dirs:?}"
                );
            }
        }
    }

    #[test]
    fn stalled_drain_stays_within_buffer() {
        let cfg = ProtocolConfig::default();
        let mut s = LinkScenario::default();
        s.drain_stalls.push(DrainStall {
            side: Side::B,
            start_ns: 20_000.0,
            end_ns: Some(60_000.0),
        });
        s.bursts.push(Burst {
            direction: Direction::BToA,
            lane: 0,
            kind: BurstKind::FlowNotifications,
        });
        let out = go(&cfg, &s, 300_000);
        assert!(out.lossless());
        let ab = out.direction(Direction::AToB);
        assert!(ab.fc_high_water_bits <= ab.fc_capacity_bits);
        assert!(ab.fc_high_water_bits > ab.fc_capacity_bits / 2);
        assert_eq!(ab.fc_overflows, 0);
    }

    #[test]
    fn bonded_lanes_with_skew() {
        let cfg = ProtocolConfig {
            lanes: 4,
            ..ProtocolConfig::default()
        };
        let s = LinkScenario {
            lane_skew_slots: vec![0, 3, 8, 1],
            ..LinkScenario::with_ber(1e-6)
        };
        let out = go(&cfg, &s, 300_000);
        assert!(out.lossless());
    }

    #[test]
    fn rejects_bad_scenarios() {
        let cfg = ProtocolConfig::default();
        let s = LinkScenario {
            cable_length_m: 2000.0,
            ..Default::default()
        };
        assert!(run(&cfg, &s, &TrafficSpec::empty(), &TrafficSpec::empty()).is_err());
    }
}
