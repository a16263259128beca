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

//! Event monitors for remote requests.

use crate::frame::{Classified, ControlCode};

/// Consecutive matching control frames needed to raise a request flag.
pub const REQUEST_THRESHOLD: u32 = 8;

/// Tracks runs of PAUSE_REQUEST and RETRANSMIT_REQUEST frames from the peer.
///
/// A flag falls on an IDLE frame, on the opposite request, or on two Data
/// Frames in a row. Replay interleaves fillers with single Data Frames, so a
/// lone Data Frame neither breaks a run of requests nor clears a flag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventMonitor {
    consecutive_pause: u32,
    consecutive_retrans_req: u32,
    data_run: u32,
    pause_req: bool,
    retrans_req: bool,
}

impl EventMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pause_req(&self) -> bool {
        self.pause_req
    }

    pub fn retrans_req(&self) -> bool {
        self.retrans_req
    }

    /// `None` for a frame that failed the integrity check.
    pub fn observe(&mut self, frame: Option<&Classified>) {
        match frame {
            Some(Classified::Control { code, .. }) => {
                self.data_run = 0;
                match code {
                    ControlCode::PauseRequest => {
                        self.consecutive_retrans_req = 0;
                        self.retrans_req = false;
                        self.consecutive_pause += 1;
                        if self.consecutive_pause >= REQUEST_THRESHOLD {
                            self.pause_req = true;
                        }
                    }
                    ControlCode::RetransmitRequest => {
                        self.consecutive_pause = 0;
                        self.pause_req = false;
                        self.consecutive_retrans_req += 1;
                        if self.consecutive_retrans_req >= REQUEST_THRESHOLD {
                            self.retrans_req = true;
                        }
                    }
                    ControlCode::Idle => self.clear(),
                }
            }
            Some(Classified::Data { .. }) => {
                self.data_run += 1;
                if self.data_run >= 2 {
                    self.consecutive_pause = 0;
                    self.consecutive_retrans_req = 0;
                    self.pause_req = false;
                    self.retrans_req = false;
                }
            }
            None => {
                self.consecutive_pause = 0;
                self.consecutive_retrans_req = 0;
                self.data_run = 0;
            }
        }
    }

    fn clear(&mut self) {
        *self = Self::default();
    }
}
