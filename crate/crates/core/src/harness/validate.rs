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

//! Loopback validation: delivered flits against the regenerated stream.

use std::fmt;

use super::traffic::{records_from_flits, FlitSource, TrafficSpec};
use crate::frame::Flit;

/// First divergence between the expected and delivered streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchReport {
    pub packet: u64,
    pub flit: u64,
    /// Byte offset of the divergence within the packet.
    pub offset: u64,
    /// Up to eight bytes from the divergence onwards.
    pub expected: Vec<u8>,
    pub actual: Vec<u8>,
    pub reason: String,
}

impl fmt::Display for MismatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mismatch at packet {} (flit {}, byte {}): {}; expected [{}] actual [{}]",
            self.packet,
            self.flit,
            self.offset,
            self.reason,
            hex::encode(&self.expected),
            hex::encode(&self.actual)
        )
    }
}

impl std::error::Error for MismatchReport {}

fn window(bytes: &[u8], from: usize) -> Vec<u8> {
    bytes.iter().skip(from).take(8).copied().collect()
}

/// Streaming, order-sensitive comparator.
#[derive(Debug, Clone)]
pub struct StreamValidator {
    expected: std::iter::Peekable<FlitSource>,
    flits: u64,
    packets: u64,
    packet_offset: u64,
    mismatch: Option<MismatchReport>,
}

impl StreamValidator {
    pub fn new(expected: FlitSource) -> Self {
        Self {
            expected: expected.peekable(),
            flits: 0,
            packets: 0,
            packet_offset: 0,
            mismatch: None,
        }
    }

    pub fn from_flits(flits: &[Flit]) -> Self {
        let width = flits.iter().map(Flit::valid_bytes).max().unwrap_or(1);
        Self::new(TrafficSpec::Records(records_from_flits(flits, 0)).source(width))
    }

    pub fn flits(&self) -> u64 {
        self.flits
    }

    pub fn packets(&self) -> u64 {
        self.packets
    }

    pub fn mismatch(&self) -> Option<&MismatchReport> {
        self.mismatch.as_ref()
    }

    /// All expected flits seen and nothing diverged.
    pub fn complete(&mut self) -> bool {
        self.mismatch.is_none() && self.expected.peek().is_none()
    }

    /// Checks one delivered flit. Returns `false` once a mismatch is known.
    pub fn push(&mut self, got: &Flit) -> bool {
        if self.mismatch.is_some() {
            return false;
        }
        let report = |s: &Self, offset: u64, expected: Vec<u8>, reason: &str| MismatchReport {
            packet: s.packets,
            flit: s.flits,
            offset,
            expected,
            actual: Vec::new(),
            reason: reason.to_string(),
        };
        let Some(want) = self.expected.next() else {
            let mut r = report(self, self.packet_offset, Vec::new(), "unexpected extra flit");
            r.actual = window(&got.data, 0);
            self.mismatch = Some(r);
            return false;
        };
        let want = want.flit;
        if let Some(i) = want.data.iter().zip(&got.data).position(|(a, b)| a != b) {
            let mut r = report(
                self,
                self.packet_offset + i as u64,
                window(&want.data, i),
                "byte differs",
            );
            r.actual = window(&got.data, i);
            self.mismatch = Some(r);
            return false;
        }
        if want.data.len() != got.data.len() || want.last != got.last {
            let i = want.data.len().min(got.data.len());
            let reason = if want.last != got.last {
                "end-of-packet flag differs"
            } else {
                "flit length differs"
            };
            let mut r = report(self, self.packet_offset + i as u64, window(&want.data, i), reason);
            r.actual = window(&got.data, i);
            self.mismatch = Some(r);
            return false;
        }
        self.flits += 1;
        if got.last {
            self.packets += 1;
            self.packet_offset = 0;
        } else {
            self.packet_offset += got.data.len() as u64;
        }
        true
    }

    /// Final verdict: any divergence, or flits that never arrived.
    pub fn finish(mut self) -> Result<u64, MismatchReport> {
        if let Some(r) = self.mismatch.take() {
            return Err(r);
        }
        if let Some(next) = self.expected.next() {
            return Err(MismatchReport {
                packet: self.packets,
                flit: self.flits,
                offset: self.packet_offset,
                expected: window(&next.flit.data, 0),
                actual: Vec::new(),
                reason: "stream ended early".into(),
            });
        }
        Ok(self.packets)
    }
}

/// Byte-exact, order-exact comparison of two flit streams.
pub fn validate(sent: &[Flit], delivered: &[Flit]) -> Result<u64, MismatchReport> {
    let mut v = StreamValidator::from_flits(sent);
    for f in delivered {
        if !v.push(f) {
            break;
        }
    }
    v.finish()
}
