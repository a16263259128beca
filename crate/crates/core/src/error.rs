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

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid protocol configuration: {0}")]
    Config(String),

    #[error("frame ID {id} does not fit in {bits} bits")]
    FrameIdRange { id: u32, bits: u32 },

    #[error("payload is {got} bits, expected {expected}")]
    PayloadLength { got: usize, expected: usize },

    #[error("frame is {got} bits, expected {expected}")]
    FrameLength { got: usize, expected: usize },

    #[error("unknown control code {0:#04x}")]
    UnknownControlCode(u64),

    #[error("invalid flit: {0}")]
    Flit(String),

    #[error("frame-ID bound violated: 2^{frame_id_bits} = {capacity} < line_rate*RTT/frame_size = {required:.3}")]
    FrameIdBound {
        frame_id_bits: u32,
        capacity: u64,
        required: f64,
    },

    #[error("flow-control buffer bound violated: S_FC = {s_fc} bits < 3/2*line_rate*RTT = {required:.1} bits")]
    FlowControlBound { s_fc: u64, required: f64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("traffic: {0}")]
    Traffic(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
