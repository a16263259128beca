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

//! Receive-side frame verification.

use crate::bits::FrameBits;
use crate::frame::{ControlCode, DataFrame, Decoded, FrameCodec};

/// Frames that must verify in sequence before delivery resumes.
pub const ROLLBACK_DEPTH: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RxVerdict {
    /// Verified and in order: hand the frame to the user side.
    Deliver(DataFrame),
    /// Verified during warm-up after a rollback; nothing delivered.
    Advanced,
    Control(ControlCode),
    /// Verification failed; counters rolled back.
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RxStats {
    pub verified_data: u64,
    pub delivered: u64,
    pub control: u64,
    pub failures: u64,
}

#[derive(Debug, Clone)]
pub struct RxVerifier {
    frame_id: u32,
    threshold_id: u32,
    frame_error: bool,
    /// A frame verified since the last failure.
    resumed: bool,
    mask: u32,
    stats: RxStats,
}

impl RxVerifier {
    pub fn new(frame_id_bits: u32) -> Self {
        Self {
            frame_id: 0,
            threshold_id: ROLLBACK_DEPTH,
            frame_error: false,
            resumed: false,
            mask: (1 << frame_id_bits) - 1,
            stats: RxStats::default(),
        }
    }

    pub fn frame_id(&self) -> u32 {
        self.frame_id
    }

    pub fn threshold_id(&self) -> u32 {
        self.threshold_id
    }

    pub fn frame_error(&self) -> bool {
        self.frame_error
    }

    /// True from a failure until any frame verifies against the expected ID
    /// again. After that the missing frames either follow in the same replay
    /// or have not been sent yet, so another request would only restart the
    /// replay schedule.
    pub fn awaiting_replay(&self) -> bool {
        self.frame_error && !self.resumed
    }

    pub fn stats(&self) -> &RxStats {
        &self.stats
    }

    /// Forces the counters, for tests and scenario set-up.
    pub fn set_counters(&mut self, frame_id: u32, threshold_id: u32) {
        self.frame_id = frame_id & self.mask;
        self.threshold_id = threshold_id & self.mask;
    }

    /// Records a failed frame: roll back and raise the error flag.
    pub fn fail(&mut self) -> RxVerdict {
        self.frame_id = self.threshold_id.wrapping_sub(ROLLBACK_DEPTH) & self.mask;
        self.frame_error = true;
        self.resumed = false;
        self.stats.failures += 1;
        RxVerdict::Failed
    }

    pub fn verify(&mut self, codec: &FrameCodec, bits: &FrameBits) -> RxVerdict {
        match codec.decode(bits, self.frame_id) {
            Ok(Decoded::Data(frame)) => {
                self.stats.verified_data += 1;
                self.resumed = true;
                let at_threshold = self.frame_id == self.threshold_id;
                self.frame_id = (self.frame_id + 1) & self.mask;
                if at_threshold {
                    self.threshold_id = (self.threshold_id + 1) & self.mask;
                    self.frame_error = false;
                    self.stats.delivered += 1;
                    RxVerdict::Deliver(frame)
                } else {
                    RxVerdict::Advanced
                }
            }
            Ok(Decoded::Control(frame)) => {
                self.stats.control += 1;
                self.resumed = true;
                RxVerdict::Control(frame.code)
            }
            Ok(Decoded::VerificationFailure | Decoded::SynIllegal) | Err(_) => self.fail(),
        }
    }
}
