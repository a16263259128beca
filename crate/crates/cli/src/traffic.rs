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

//! Traffic trace generation and offline validation.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};

use rifl::harness::{read_records, records_from_flits, validate, write_records, SizeDist, TrafficSpec};
use rifl::Flit;

/// Parses `fixed:N` or `uniform:MIN:MAX`.
pub fn parse_sizes(s: &str) -> Result<SizeDist> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |v: &str| v.parse::<u32>().with_context(|| format!("bad size {v:?}"));
    let dist = match parts.as_slice() {
        ["fixed", n] => SizeDist::Fixed { bytes: num(n)? },
        ["uniform", a, b] => SizeDist::Uniform {
            min: num(a)?,
            max: num(b)?,
        },
        _ => bail!("sizes must be fixed:N or uniform:MIN:MAX, got {s:?}"),
    };
    Ok(dist)
}

/// Writes a trace of generated packets, one flit per cycle.
pub fn generate<W: Write>(out: W, sizes: SizeDist, total_bytes: u64, seed: u64, width: usize) -> Result<u64> {
    let spec = TrafficSpec::saturating(sizes, total_bytes, seed);
    spec.validate(width)?;
    let flits: Vec<Flit> = spec.source(width).map(|f| f.flit).collect();
    let records = records_from_flits(&flits, 0);
    write_records(out, &records, width)?;
    Ok(flits.iter().filter(|f| f.last).count() as u64)
}

/// Compares two traces flit by flit; returns the number of packets that
/// matched.
pub fn compare<R1: Read, R2: Read>(sent: R1, received: R2) -> Result<std::result::Result<u64, String>> {
    let flits =
        |records: Vec<rifl::harness::TrafficRecord>| -> Vec<Flit> { records.iter().filter_map(|r| r.flit()).collect() };
    let sent = flits(read_records(sent).context("reading sent trace")?);
    let received = flits(read_records(received).context("reading received trace")?);
    Ok(validate(&sent, &received).map_err(|m| m.to_string()))
}
