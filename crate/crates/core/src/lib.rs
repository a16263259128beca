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

//! Software model of the RIFL link layer.
//!
//! The crate is split along the data path of one link endpoint:
//!
//! * [`frame`] and [`crc`]: bit-exact Data/Control Frame codec and the
//!   12-bit checksum behind the Verification Code.
//! * [`line_coding`]: the self-synchronizing `1 + x^13 + x^33` scrambler and
//!   the SYN-based lane aligner.
//! * [`endpoint`]: TX state machine, retransmission buffer, RX verification,
//!   event monitors, ON/OFF flow control and clock compensation.
//! * [`bonding`]: round-robin striping of one user stream over several lanes.
//! * [`sim`]: deterministic discrete-event duplex link with bit-error
//!   injection.
//! * [`analysis`]: closed-form efficiency, FER/FFR/MTBF and buffer sizing.
//! * [`harness`]: traffic generation, loopback validation and run metrics.
//!
//! ```
//! use rifl::harness::SizeDist;
//! use rifl::sim::{self, Direction};
//! use rifl::{LinkScenario, ProtocolConfig, RunMetrics, TrafficSpec};
//!
//! let cfg = ProtocolConfig::default();
//! let scenario = LinkScenario { ber_forward: 1e-6, ber_reverse: 1e-6, ..Default::default() };
//! let traffic = |seed| TrafficSpec::saturating(SizeDist::Uniform { min: 1, max: 8192 }, 1_000_000, seed);
//! let out = sim::run(&cfg, &scenario, &traffic(1), &traffic(2))?;
//! assert!(out.lossless());
//! let m = RunMetrics::from_report("a-to-b", out.direction(Direction::AToB));
//! println!("{:.3} Gbps, ratio {:.4}", m.goodput_bps / 1e9, m.bandwidth_ratio);
//! # Ok::<(), rifl::Error>(())
//! ```

pub mod analysis;
pub mod bits;
pub mod bonding;
pub mod config;
pub mod crc;
pub mod endpoint;
pub mod error;
pub mod frame;
pub mod harness;
pub mod line_coding;
pub mod sim;

pub use bits::FrameBits;
pub use config::ProtocolConfig;
pub use error::{Error, Result};
pub use frame::{ControlCode, ControlFrame, DataFrame, Decoded, Flit, MetaCode};

pub use harness::{RunMetrics, TrafficSpec};
pub use sim::{LinkScenario, RunOutcome};
