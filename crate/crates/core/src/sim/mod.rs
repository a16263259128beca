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

//! Deterministic discrete-event simulation of a duplex link.
//!
//! Time is kept in integer picoseconds. Each side ticks once per frame slot
//! of its own clock; a frame leaves at its tick and arrives after the
//! serialization time, the circuit and cable delay and any lane skew.

mod engine;
mod errors;
mod queue;
mod scenario;

pub use engine::{run, DirectionReport, RunOutcome};
pub use errors::ErrorModel;
pub use queue::EventQueue;
pub use scenario::{Burst, BurstKind, Direction, DrainStall, LinkScenario, Side};
