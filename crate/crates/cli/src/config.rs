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

//! Experiment configuration files.
//!
//! A config is TOML with a leading `schema = 1` and optional `[protocol]`,
//! `[scenario]`, `[traffic]`, `[output]` and `[sweep]` sections. Every run
//! point is checked against the frame-ID and flow-control bounds before
//! anything is simulated.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use rifl::harness::{read_records, SizeDist, TrafficSpec};
use rifl::{LinkScenario, ProtocolConfig};

pub const SCHEMA: u32 = 1;

/// Bytes per direction and point in the default scaled runs.
pub const SCALED_BYTES: u64 = 12_500_000;

/// Bytes per direction and point with `--full`.
pub const FULL_BYTES: u64 = 10_000_000_000;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub scenario: LinkScenario,
    #[serde(default)]
    pub traffic: TrafficSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default = "d_frame_size")]
    pub frame_size_bits: u32,
    /// Defaults to the design-table width for the frame size.
    pub frame_id_bits: Option<u32>,
    #[serde(default = "d_one")]
    pub lanes: u32,
    pub line_rate_bps: Option<f64>,
    pub crc_poly: Option<u16>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ProtocolSection {
    pub fn build(&self) -> Result<ProtocolConfig> {
        let mut cfg = ProtocolConfig::with_frame_size(self.frame_size_bits)?;
        cfg.lanes = self.lanes;
        if let Some(bits) = self.frame_id_bits {
            cfg.frame_id_bits = bits;
        }
        if let Some(rate) = self.line_rate_bps {
            cfg.line_rate_bps = rate;
        }
        if let Some(poly) = self.crc_poly {
            cfg.crc_poly = poly;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    #[serde(default = "d_sizes")]
    pub sizes: SizeDist,
    /// Bytes per direction; `--full` raises it to the hardware volume.
    pub total_bytes: Option<u64>,
    #[serde(default = "d_one_u64")]
    pub seed: u64,
    /// Also send generated traffic from B to A.
    #[serde(default = "d_true")]
    pub duplex: bool,
    /// Replay a trace from A to B instead of generating traffic.
    pub csv: Option<PathBuf>,
    /// Trace for B to A.
    pub csv_reverse: Option<PathBuf>,
}

impl Default for TrafficSection {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub bers: Vec<f64>,
    pub ber_range: Option<BerRange>,
    pub payload: Option<PayloadRange>,
    #[serde(default)]
    pub lanes: Vec<u32>,
}

/// Log-spaced BERs from `from` to `to`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerRange {
    pub from: f64,
    pub to: f64,
    pub step_decades: f64,
}

impl BerRange {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.from > 0.0 && self.to >= self.from && self.step_decades > 0.0) {
            bail!("ber_range needs 0 < from <= to and step_decades > 0");
        }
        let (lo, hi) = (self.from.log10(), self.to.log10());
        let n = ((hi - lo) / self.step_decades + 1e-9).floor() as u32;
        Ok((0..=n).map(|i| 10f64.powf(lo + i as f64 * self.step_decades)).collect())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PayloadRange {
    pub min: u32,
    pub max: u32,
    #[serde(default = "d_one")]
    pub step: u32,
    /// Packets sent at each size.
    #[serde(default = "d_packets")]
    pub packets: u64,
}

fn d_frame_size() -> u32 {
    256
}
fn d_one() -> u32 {
    1
}
fn d_one_u64() -> u64 {
    1
}
fn d_true() -> bool {
    true
}
fn d_packets() -> u64 {
    64
}
fn d_sizes() -> SizeDist {
    SizeDist::Uniform { min: 1, max: 8192 }
}

/// Sweep dimension of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    Ber,
    Payload,
    Lanes,
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub full: bool,
}

/// One independent simulation.
#[derive(Debug, Clone)]
pub struct Point {
    pub id: String,
    pub cfg: ProtocolConfig,
    pub scenario: LinkScenario,
    pub ab: TrafficSpec,
    pub ba: TrafficSpec,
    /// Packet size for payload sweeps.
    pub payload: Option<u32>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.traffic.csv,
            &mut cfg.traffic.csv_reverse,
            &mut cfg.output.metrics,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).context("malformed config")?;
        match table.remove("schema").map(|v| v.as_integer()) {
            Some(Some(v)) if v == SCHEMA as i64 => {}
            Some(v) => bail!("unsupported schema {v:?}, expected {SCHEMA}"),
            None => bail!("missing `schema = {SCHEMA}` line"),
        }
        table.try_into().context("invalid config")
    }

    fn bers(&self) -> Result<Vec<f64>> {
        let mut bers = self.sweep.bers.clone();
        if let Some(r) = self.sweep.ber_range {
            bers.extend(r.points()?);
        }
        Ok(bers)
    }

    /// Expands the config into run points, validating each one.
    pub fn points(&self, axis: Option<Axis>, ov: Overrides) -> Result<Vec<Point>> {
        let base = self.base_point(ov)?;
        let points = match axis {
            None => match self.bers()? {
                bers if bers.is_empty() => vec![base],
                bers => ber_points(&base, &bers),
            },
            Some(Axis::Ber) => {
                let bers = self.bers()?;
                if bers.is_empty() {
                    bail!("BER sweep needs `sweep.bers` or `sweep.ber_range`");
                }
                ber_points(&base, &bers)
            }
            Some(Axis::Payload) => {
                let Some(r) = self.sweep.payload else {
                    bail!("payload sweep needs a `sweep.payload` table");
                };
                if r.min == 0 || r.min > r.max || r.step == 0 || r.packets == 0 {
                    bail!("sweep.payload needs 1 <= min <= max, step >= 1 and packets >= 1");
                }
                (r.min..=r.max)
                    .step_by(r.step as usize)
                    .map(|n| {
                        let spec =
                            |seed| TrafficSpec::saturating(SizeDist::Fixed { bytes: n }, n as u64 * r.packets, seed);
                        Point {
                            id: format!("payload={n}"),
                            ab: spec(self.seed(ov)),
                            ba: if self.traffic.duplex {
                                spec(self.seed(ov) + 1)
                            } else {
                                TrafficSpec::empty()
                            },
                            payload: Some(n),
                            ..base.clone()
                        }
                    })
                    .collect()
            }
            Some(Axis::Lanes) => {
                if self.sweep.lanes.is_empty() {
                    bail!("lane sweep needs `sweep.lanes`");
                }
                self.sweep
                    .lanes
                    .iter()
                    .map(|&n| {
                        let mut p = base.clone();
                        p.id = format!("lanes={n}");
                        p.cfg.lanes = n;
                        p
                    })
                    .collect()
            }
        };
        for p in &points {
            p.scenario.validate(&p.cfg).with_context(|| format!("point {}", p.id))?;
            let width = p.cfg.payload_bytes();
            p.ab.validate(width)
                .with_context(|| format!("point {} A->B traffic", p.id))?;
            p.ba.validate(width)
                .with_context(|| format!("point {} B->A traffic", p.id))?;
        }
        Ok(points)
    }

    fn seed(&self, ov: Overrides) -> u64 {
        ov.seed.unwrap_or(self.traffic.seed)
    }

    fn base_point(&self, ov: Overrides) -> Result<Point> {
        let cfg = self.protocol.build()?;
        let mut scenario = self.scenario.clone();
        if let Some(seed) = ov.seed {
            scenario.seed_forward = seed.wrapping_mul(2).wrapping_add(1);
            scenario.seed_reverse = seed.wrapping_mul(2).wrapping_add(2);
        }
        let t = &self.traffic;
        let total = if ov.full {
            FULL_BYTES
        } else {
            t.total_bytes.unwrap_or(SCALED_BYTES)
        };
        let seed = self.seed(ov);
        let trace = |path: &Option<PathBuf>| -> Result<Option<TrafficSpec>> {
            let Some(path) = path else { return Ok(None) };
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let records = read_records(file).with_context(|| format!("reading {}", path.display()))?;
            Ok(Some(TrafficSpec::Records(records)))
        };
        let ab = match trace(&t.csv)? {
            Some(spec) => spec,
            None => TrafficSpec::saturating(t.sizes, total, seed),
        };
        let ba = match trace(&t.csv_reverse)? {
            Some(spec) => spec,
            None if t.duplex && t.csv.is_none() => TrafficSpec::saturating(t.sizes, total, seed + 1),
            None => TrafficSpec::empty(),
        };
        Ok(Point {
            id: "run".into(),
            cfg,
            scenario,
            ab,
            ba,
            payload: None,
        })
    }
}

fn ber_points(base: &Point, bers: &[f64]) -> Vec<Point> {
    bers.iter()
        .map(|&ber| {
            let mut p = base.clone();
            p.id = format!("ber={ber:.3e}");
            p.scenario.ber_forward = ber;
            p.scenario.ber_reverse = ber;
            p
        })
        .collect()
}
