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

//! Protocol sizing parameters shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header overhead of a Data Frame: SYN (2) + Meta Code (2) + Verification Code (12).
pub const DATA_HEADER_BITS: u32 = 16;
/// Width of the Verification Code, and of the checksum it is built from.
pub const VERIFICATION_BITS: u32 = 12;
pub const SYN_BITS: u32 = 2;
pub const META_BITS: u32 = 2;
/// Generator polynomial x^12 + x^11 + x^3 + x^2 + x + 1, leading term implicit.
pub const DEFAULT_CRC_POLY: u16 = 0x80F;
/// Frame sizes the codec supports.
pub const SUPPORTED_FRAME_SIZES: [u32; 4] = [256, 512, 1024, 2048];

fn default_lanes() -> u32 {
    1
}

fn default_line_rate() -> f64 {
    28e9
}

fn default_poly() -> u16 {
    DEFAULT_CRC_POLY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub frame_size_bits: u32,
    pub frame_id_bits: u32,
    #[serde(default = "default_lanes")]
    pub lanes: u32,
    /// Per-lane line rate in bits per second.
    #[serde(default = "default_line_rate")]
    pub line_rate_bps: f64,
    #[serde(default = "default_poly")]
    pub crc_poly: u16,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self::with_frame_size(256).expect("256-bit frames are supported")
    }
}

impl ProtocolConfig {
    /// Config for one of the supported frame sizes, with the frame-ID width
    /// from the 100 Gbps / 500 ns design table.
    pub fn with_frame_size(frame_size_bits: u32) -> Result<Self> {
        let frame_id_bits = match frame_size_bits {
            256 => 8,
            512 => 7,
            1024 => 6,
            2048 => 5,
            other => {
                return Err(Error::Config(format!(
                    "frame size {other} not in {SUPPORTED_FRAME_SIZES:?}"
                )))
            }
        };
        let cfg = Self {
            frame_size_bits,
            frame_id_bits,
            lanes: default_lanes(),
            line_rate_bps: default_line_rate(),
            crc_poly: DEFAULT_CRC_POLY,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn payload_bits(&self) -> u32 {
        self.frame_size_bits - DATA_HEADER_BITS
    }

    pub fn payload_bytes(&self) -> usize {
        (self.payload_bits() / 8) as usize
    }

    pub fn verification_bits(&self) -> u32 {
        VERIFICATION_BITS
    }

    pub fn checksum_bits(&self) -> u32 {
        VERIFICATION_BITS
    }

    /// Number of distinct frame IDs, which is also the retransmission
    /// buffer depth in frames.
    pub fn id_space(&self) -> u32 {
        1 << self.frame_id_bits
    }

    pub fn id_mask(&self) -> u32 {
        self.id_space() - 1
    }

    /// Frames in one full replay schedule: 2.5 * 2^frame_id_bits.
    pub fn replay_len(&self) -> u32 {
        self.id_space() * 5 / 2
    }

    /// Seconds per frame slot on one lane.
    pub fn frame_period_s(&self) -> f64 {
        self.frame_size_bits as f64 / self.line_rate_bps
    }

    /// Structural invariants that hold independently of any scenario.
    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_FRAME_SIZES.contains(&self.frame_size_bits) {
            return Err(Error::Config(format!(
                "frame size {} not in {SUPPORTED_FRAME_SIZES:?}",
                self.frame_size_bits
            )));
        }
        let payload = self.payload_bits();
        if !payload.is_multiple_of(8) {
            return Err(Error::Config("payload must be a whole number of bytes".into()));
        }
        if VERIFICATION_BITS % 8 != 4 {
            return Err(Error::Config("verification width must be 4 mod 8".into()));
        }
        if payload + VERIFICATION_BITS + 4 != self.frame_size_bits {
            return Err(Error::Config("frame size must equal payload + verification + 4".into()));
        }
        if self.frame_id_bits == 0 || self.frame_id_bits > VERIFICATION_BITS {
            return Err(Error::Config(format!(
                "frame_id_bits must be in 1..={VERIFICATION_BITS}, got {}",
                self.frame_id_bits
            )));
        }
        // warm-up after a rollback spans 16 IDs
        if self.id_space() <= 16 {
            return Err(Error::Config(
                "frame ID space must exceed the 16-frame rollback window".into(),
            ));
        }
        if self.lanes == 0 {
            return Err(Error::Config("lanes must be at least 1".into()));
        }
        if !(self.line_rate_bps.is_finite() && self.line_rate_bps > 0.0) {
            return Err(Error::Config("line rate must be positive".into()));
        }
        if self.crc_poly & 0x800 == 0 || self.crc_poly & 1 == 0 {
            return Err(Error::Config(format!(
                "CRC polynomial {:#05x} must have x^11 and x^0 terms",
                self.crc_poly
            )));
        }
        Ok(())
    }

    /// Frame-ID sizing: 2^frame_id_bits >= line_rate * rtt / frame_size.
    pub fn check_frame_id_bound(&self, rtt_s: f64) -> Result<()> {
        let required = self.line_rate_bps * rtt_s / self.frame_size_bits as f64;
        let capacity = self.id_space() as u64;
        if (capacity as f64) < required {
            return Err(Error::FrameIdBound {
                frame_id_bits: self.frame_id_bits,
                capacity,
                required,
            });
        }
        Ok(())
    }
}
