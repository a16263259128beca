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

//! Traffic definitions: seeded packet generators and cycle-stamped CSV
//! records.

use std::io::{Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::Flit;

/// Packet-size law for generated traffic, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SizeDist {
    Fixed {
        bytes: u32,
    },
    Uniform {
        min: u32,
        max: u32,
    },
    /// Each size in `min..=max` (by `step`) repeated for about
    /// `bytes_per_size` bytes, in ascending order.
    Sweep {
        min: u32,
        max: u32,
        step: u32,
        bytes_per_size: u64,
    },
}

impl SizeDist {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SizeDist::Fixed { bytes } => bytes >= 1,
            SizeDist::Uniform { min, max } => min >= 1 && min <= max,
            SizeDist::Sweep {
                min,
                max,
                step,
                bytes_per_size,
            } => min >= 1 && min <= max && step >= 1 && bytes_per_size >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Traffic(format!("bad size distribution {self:?}")))
        }
    }
}

/// Generated traffic: packets drawn from `sizes` until `total_bytes` have
/// been produced (the last packet may overshoot).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub sizes: SizeDist,
    pub total_bytes: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrafficSpec {
    /// Offered whenever the link accepts a flit.
    Saturating(GeneratorSpec),
    /// Replayed exactly; a flit is not offered before its cycle.
    Records(Vec<TrafficRecord>),
}

impl TrafficSpec {
    pub fn saturating(sizes: SizeDist, total_bytes: u64, seed: u64) -> Self {
        TrafficSpec::Saturating(GeneratorSpec {
            sizes,
            total_bytes,
            seed,
        })
    }

    pub fn empty() -> Self {
        TrafficSpec::Records(Vec::new())
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        match self {
            TrafficSpec::Saturating(g) => g.sizes.validate(),
            TrafficSpec::Records(records) => {
                for (i, r) in records.iter().enumerate() {
                    r.validate(width)
                        .map_err(|e| Error::Traffic(format!("record {i}: {e}")))?;
                }
                if records.iter().rev().find(|r| r.valid).is_some_and(|r| !r.last) {
                    return Err(Error::Traffic("stream ends inside a packet".into()));
                }
                Ok(())
            }
        }
    }

    pub fn source(&self, width: usize) -> FlitSource {
        FlitSource::new(self.clone(), width)
    }
}

/// Deterministic packet stream for a [`GeneratorSpec`].
#[derive(Debug, Clone)]
pub struct PacketGenerator {
    spec: GeneratorSpec,
    size_rng: ChaCha8Rng,
    data_rng: ChaCha8Rng,
    emitted: u64,
    sweep_size: u32,
    sweep_bytes: u64,
}

impl PacketGenerator {
    pub fn new(spec: GeneratorSpec) -> Self {
        let mut size_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        size_rng.set_stream(1);
        let mut data_rng = ChaCha8Rng::seed_from_u64(spec.seed);
        data_rng.set_stream(2);
        let sweep_size = match spec.sizes {
            SizeDist::Sweep { min, .. } => min,
            _ => 0,
        };
        Self {
            spec,
            size_rng,
            data_rng,
            emitted: 0,
            sweep_size,
            sweep_bytes: 0,
        }
    }

    fn next_size(&mut self) -> Option<u32> {
        match self.spec.sizes {
            SizeDist::Fixed { bytes } => Some(bytes),
            SizeDist::Uniform { min, max } => Some(self.size_rng.gen_range(min..=max)),
            SizeDist::Sweep {
                max,
                step,
                bytes_per_size,
                ..
            } => {
                if self.sweep_bytes >= bytes_per_size {
                    self.sweep_size = self.sweep_size.checked_add(step)?;
                    self.sweep_bytes = 0;
                }
                if self.sweep_size > max {
                    return None;
                }
                self.sweep_bytes += self.sweep_size as u64;
                Some(self.sweep_size)
            }
        }
    }
}

impl Iterator for PacketGenerator {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        if self.emitted >= self.spec.total_bytes {
            return None;
        }
        let size = self.next_size()?;
        let mut data = vec![0u8; size as usize];
        self.data_rng.fill_bytes(&mut data);
        self.emitted += size as u64;
        Some(data)
    }
}

/// One cycle of a user-interface trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficRecord {
    pub cycle: u64,
    pub valid: bool,
    /// Valid bytes only.
    pub data: Vec<u8>,
    pub last: bool,
}

impl TrafficRecord {
    pub fn valid_bytes(&self) -> usize {
        self.data.len()
    }

    fn validate(&self, width: usize) -> Result<()> {
        if !self.valid {
            return Ok(());
        }
        let n = self.data.len();
        if n == 0 || n > width {
            return Err(Error::Traffic(format!("valid_bytes {n} outside 1..={width}")));
        }
        if n < width && !self.last {
            return Err(Error::Traffic("partial flit without last".into()));
        }
        Ok(())
    }

    pub fn flit(&self) -> Option<Flit> {
        self.valid.then(|| Flit::new(self.data.clone(), self.last))
    }
}

/// Splits a packet into payload-width flits.
pub fn packet_flits(packet: &[u8], width: usize) -> Vec<Flit> {
    let n = packet.len().div_ceil(width);
    packet
        .chunks(width)
        .enumerate()
        .map(|(i, c)| Flit::new(c.to_vec(), i + 1 == n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFlit {
    pub flit: Flit,
    pub packet: u64,
    /// Earliest TX cycle at which the flit may be offered.
    pub cycle: u64,
}

/// Lazily expands a [`TrafficSpec`] into flits. Two sources built from the
/// same spec yield identical streams, which lets a validator regenerate the
/// expected traffic instead of storing it.
#[derive(Debug, Clone)]
pub struct FlitSource {
    inner: SourceInner,
    width: usize,
    packet: u64,
    pending: std::collections::VecDeque<Flit>,
}

#[derive(Debug, Clone)]
enum SourceInner {
    Generator(Box<PacketGenerator>),
    Records(std::vec::IntoIter<TrafficRecord>),
}

impl FlitSource {
    pub fn new(spec: TrafficSpec, width: usize) -> Self {
        let inner = match spec {
            TrafficSpec::Saturating(g) => SourceInner::Generator(Box::new(PacketGenerator::new(g))),
            TrafficSpec::Records(r) => SourceInner::Records(r.into_iter()),
        };
        Self {
            inner,
            width,
            packet: 0,
            pending: Default::default(),
        }
    }
}

impl Iterator for FlitSource {
    type Item = SourceFlit;

    fn next(&mut self) -> Option<SourceFlit> {
        match &mut self.inner {
            SourceInner::Generator(g) => {
                if self.pending.is_empty() {
                    let packet = g.next()?;
                    self.pending.extend(packet_flits(&packet, self.width));
                }
                let flit = self.pending.pop_front()?;
                let out = SourceFlit {
                    packet: self.packet,
                    cycle: 0,
                    flit,
                };
                if out.flit.last {
                    self.packet += 1;
                }
                Some(out)
            }
            SourceInner::Records(records) => {
                let r = records.find(|r| r.valid)?;
                let out = SourceFlit {
                    flit: r.flit().expect("valid record"),
                    packet: self.packet,
                    cycle: r.cycle,
                };
                if r.last {
                    self.packet += 1;
                }
                Some(out)
            }
        }
    }
}

/// Renders a trace for the given flits, one per cycle from `start_cycle`.
pub fn records_from_flits(flits: &[Flit], start_cycle: u64) -> Vec<TrafficRecord> {
    flits
        .iter()
        .enumerate()
        .map(|(i, f)| TrafficRecord {
            cycle: start_cycle + i as u64,
            valid: true,
            data: f.data.clone(),
            last: f.last,
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    cycle: u64,
    valid: u8,
    data_hex: String,
    valid_bytes: usize,
    last: u8,
}

/// Writes `cycle,valid,data_hex,valid_bytes,last`. `data_hex` is the full
/// payload width, little-endian: byte 0 is the last two hex digits.
pub fn write_records<W: Write>(w: W, records: &[TrafficRecord], width: usize) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        let mut bytes = vec![0u8; width.max(r.data.len())];
        bytes[..r.data.len()].copy_from_slice(&r.data);
        bytes.reverse();
        out.serialize(CsvRow {
            cycle: r.cycle,
            valid: r.valid as u8,
            data_hex: hex::encode(&bytes),
            valid_bytes: r.data.len(),
            last: r.last as u8,
        })?;
    }
    out.flush()?;
    Ok(())
}

fn parse_flag(v: u8, name: &str, line: usize) -> Result<bool> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(Error::Parse(format!("row {line}: {name} must be 0 or 1"))),
    }
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<TrafficRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row?;
        let line = i + 2;
        let mut bytes = hex::decode(&row.data_hex).map_err(|e| Error::Parse(format!("row {line}: data_hex: {e}")))?;
        bytes.reverse();
        let valid = parse_flag(row.valid, "valid", line)?;
        if valid && row.valid_bytes > bytes.len() {
            return Err(Error::Parse(format!(
                "row {line}: valid_bytes {} exceeds data width {}",
                row.valid_bytes,
                bytes.len()
            )));
        }
        bytes.truncate(if valid { row.valid_bytes } else { 0 });
        out.push(TrafficRecord {
            cycle: row.cycle,
            valid,
            data: bytes,
            last: parse_flag(row.last, "last", line)?,
        });
    }
    if out.windows(2).any(|w| w[1].cycle < w[0].cycle) {
        return Err(Error::Parse("cycles must be non-decreasing".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        let spec = GeneratorSpec {
            sizes: SizeDist::Uniform { min: 1, max: 8192 },
            total_bytes: 200_000,
            seed: 9,
        };
        let a: Vec<_> = PacketGenerator::new(spec).collect();
        let b: Vec<_> = PacketGenerator::new(spec).collect();
        assert_eq!(a, b);
        assert!(a.iter().map(Vec::len).sum::<usize>() >= 200_000);
        assert!(a.iter().all(|p| (1..=8192).contains(&p.len())));
        let c: Vec<_> = PacketGenerator::new(GeneratorSpec { seed: 10, ..spec }).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn sweep_walks_sizes_in_order() {
        let spec = GeneratorSpec {
            sizes: SizeDist::Sweep {
                min: 1,
                max: 4,
                step: 1,
                bytes_per_size: 4,
            },
            total_bytes: u64::MAX,
            seed: 0,
        };
        let sizes: Vec<usize> = PacketGenerator::new(spec).map(|p| p.len()).collect();
        assert_eq!(sizes, [1, 1, 1, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn one_record_one_flit() {
        let rec = TrafficRecord {
            cycle: 0,
            valid: true,
            data: vec![7; 30],
            last: true,
        };
        let spec = TrafficSpec::Records(vec![rec]);
        spec.validate(30).unwrap();
        let flits: Vec<_> = spec.source(30).collect();
        assert_eq!(flits.len(), 1);
        assert!(flits[0].flit.last);
    }

    #[test]
    fn packets_split_into_width_flits() {
        let f = packet_flits(&[1u8; 61], 30);
        assert_eq!(f.iter().map(Flit::valid_bytes).collect::<Vec<_>>(), [30, 30, 1]);
        assert_eq!(f.iter().filter(|f| f.last).count(), 1);
    }

    #[test]
    fn csv_roundtrip_and_byte_order() {
        let records = vec![
            TrafficRecord {
                cycle: 0,
                valid: true,
                data: vec![0x01, 0x02, 0x03, 0x04],
                last: false,
            },
            TrafficRecord {
                cycle: 1,
                valid: false,
                data: vec![],
                last: false,
            },
            TrafficRecord {
                cycle: 2,
                valid: true,
                data: vec![0xAA, 0xBB],
                last: true,
            },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &records, 4).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("cycle,valid,data_hex,valid_bytes,last\n"));
        assert!(text.contains("0,1,04030201,4,0"));
        assert!(text.contains("2,1,0000bbaa,2,1"));
        assert_eq!(read_records(&buf[..]).unwrap(), records);
    }

    #[test]
    fn rejects_malformed_traces() {
        assert!(read_records("cycle,valid,data_hex,valid_bytes,last\n0,1,zz,1,1\n".as_bytes()).is_err());
        assert!(read_records("cycle,valid,data_hex,valid_bytes,last\n0,2,00,1,1\n".as_bytes()).is_err());
        let partial = TrafficRecord {
            cycle: 0,
            valid: true,
            data: vec![1; 3],
            last: false,
        };
        assert!(TrafficSpec::Records(vec![partial]).validate(30).is_err());
    }
}
