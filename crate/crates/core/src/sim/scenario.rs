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

//! Simulation parameters.

use serde::{Deserialize, Serialize};

use crate::config::ProtocolConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn peer(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Link direction, named by the sending side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AToB,
    BToA,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::AToB, Direction::BToA];

    pub fn from_sender(side: Side) -> Self {
        match side {
            Side::A => Direction::AToB,
            Side::B => Direction::BToA,
        }
    }

    pub fn sender(self) -> Side {
        match self {
            Direction::AToB => Side::A,
            Direction::BToA => Side::B,
        }
    }

    pub fn index(self) -> usize {
        self.sender().index()
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::AToB => "ab",
            Direction::BToA => "ba",
        }
    }
}

/// Deterministic corruption overlaid on the random error process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BurstKind {
    /// Frames with slot index in `start..start + count`.
    Frames { start: u64, count: u64 },
    /// The first transmission of every flow-control notification.
    FlowNotifications,
    /// The first `count` RETRANSMIT_REQUEST frames.
    RetransmitRequests { count: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub direction: Direction,
    #[serde(default)]
    pub lane: u32,
    #[serde(flatten)]
    pub kind: BurstKind,
}

/// Window during which a side's user stops draining its receive buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrainStall {
    pub side: Side,
    pub start_ns: f64,
    /// Open-ended when absent.
    #[serde(default)]
    pub end_ns: Option<f64>,
}

impl DrainStall {
    pub fn covers(&self, t_ps: u64) -> bool {
        let t = t_ps as f64 / 1e3;
        t >= self.start_ns && self.end_ns.is_none_or(|e| t < e)
    }
}

fn d_cable() -> f64 {
    10.0
}
fn d_ns_per_m() -> f64 {
    crate::analysis::DEFAULT_NS_PER_M
}
fn d_circuit() -> f64 {
    40.0
}
fn d_seed_forward() -> u64 {
    1
}
fn d_seed_reverse() -> u64 {
    2
}
fn d_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkScenario {
    #[serde(default = "d_cable")]
    pub cable_length_m: f64,
    #[serde(default = "d_ns_per_m")]
    pub propagation_ns_per_m: f64,
    /// Per-endpoint circuit delay.
    #[serde(default = "d_circuit")]
    pub circuit_delay_ns: f64,
    #[serde(default)]
    pub ber_forward: f64,
    #[serde(default)]
    pub ber_reverse: f64,
    #[serde(default = "d_seed_forward")]
    pub seed_forward: u64,
    #[serde(default = "d_seed_reverse")]
    pub seed_reverse: u64,
    /// Positive values slow the side's clock down.
    #[serde(default)]
    pub ppm_a: f64,
    #[serde(default)]
    pub ppm_b: f64,
    /// Extra delay per lane, in frame slots, both directions.
    #[serde(default)]
    pub lane_skew_slots: Vec<u32>,
    /// Per-lane receive buffer; derived from the round trip when absent.
    #[serde(default)]
    pub fc_capacity_bits: Option<u64>,
    #[serde(default = "d_true")]
    pub clock_compensation: bool,
    /// Run at least this many side-A slots.
    #[serde(default)]
    pub min_slots: u64,
    /// Hard stop, in side-A slots.
    #[serde(default)]
    pub max_slots: Option<u64>,
    #[serde(default)]
    pub drain_stalls: Vec<DrainStall>,
    #[serde(default)]
    pub bursts: Vec<Burst>,
    /// Keep a (time, bytes) log of user deliveries.
    #[serde(default)]
    pub record_deliveries: bool,
}

impl Default for LinkScenario {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl LinkScenario {
    pub fn with_ber(ber: f64) -> Self {
        Self {
            ber_forward: ber,
            ber_reverse: ber,
            ..Self::default()
        }
    }

    pub fn ber(&self, d: Direction) -> f64 {
        match d {
            Direction::AToB => self.ber_forward,
            Direction::BToA => self.ber_reverse,
        }
    }

    pub fn seed(&self, d: Direction) -> u64 {
        match d {
            Direction::AToB => self.seed_forward,
            Direction::BToA => self.seed_reverse,
        }
    }

    pub fn ppm(&self, s: Side) -> f64 {
        match s {
            Side::A => self.ppm_a,
            Side::B => self.ppm_b,
        }
    }

    pub fn cable_delay_ns(&self) -> f64 {
        self.cable_length_m * self.propagation_ns_per_m
    }

    /// Circuit plus cable delay.
    pub fn one_way_delay_ns(&self) -> f64 {
        self.circuit_delay_ns + self.cable_delay_ns()
    }

    pub fn rtt_s(&self) -> f64 {
        2.0 * self.one_way_delay_ns() * 1e-9
    }

    pub fn skew_slots(&self, lane: usize) -> u32 {
        self.lane_skew_slots.get(lane).copied().unwrap_or(0)
    }

    pub fn max_skew_slots(&self) -> u32 {
        self.lane_skew_slots.iter().copied().max().unwrap_or(0)
    }

    /// Receive buffer per lane: three times the round-trip volume plus
    /// four frames, plus the lane skew.
    pub fn default_fc_capacity_bits(&self, cfg: &ProtocolConfig) -> u64 {
        let s = cfg.frame_size_bits as u64;
        let bdp = (cfg.line_rate_bps * self.rtt_s()).ceil() as u64;
        3 * (bdp + 4 * s) + self.max_skew_slots() as u64 * s
    }

    pub fn fc_capacity(&self, cfg: &ProtocolConfig) -> u64 {
        self.fc_capacity_bits
            .unwrap_or_else(|| self.default_fc_capacity_bits(cfg))
    }

    pub fn validate(&self, cfg: &ProtocolConfig) -> Result<()> {
        cfg.validate()?;
        let bad = |m: String| Err(Error::Scenario(m));
        for (name, v) in [
            ("cable_length_m", self.cable_length_m),
            ("circuit_delay_ns", self.circuit_delay_ns),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        if !(self.propagation_ns_per_m.is_finite() && self.propagation_ns_per_m > 0.0) {
            return bad("propagation_ns_per_m must be positive".into());
        }
        for d in Direction::BOTH {
            let b = self.ber(d);
            if !(0.0..1.0).contains(&b) {
                return bad(format!("BER {b} outside [0, 1)"));
            }
        }
        for s in [Side::A, Side::B] {
            if self.ppm(s).abs() >= 1e5 || !self.ppm(s).is_finite() {
                return bad("clock offset must be below 1e5 ppm".into());
            }
        }
        if self.lane_skew_slots.len() > cfg.lanes as usize {
            return bad(format!(
                "{} skew entries for {} lanes",
                self.lane_skew_slots.len(),
                cfg.lanes
            ));
        }
        if let Some(b) = self.bursts.iter().find(|b| b.lane >= cfg.lanes) {
            return bad(format!("burst on lane {} of {}", b.lane, cfg.lanes));
        }
        cfg.check_frame_id_bound(self.rtt_s())?;
        let required = 1.5 * cfg.line_rate_bps * self.rtt_s();
        let s_fc = self.fc_capacity(cfg);
        if (s_fc as f64) < required {
            return Err(Error::FlowControlBound { s_fc, required });
        }
        Ok(())
    }
}
