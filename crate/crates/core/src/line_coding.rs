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

//! Self-synchronizing scrambler and SYN-based frame alignment.
//!
//! The scrambler is multiplicative with polynomial `1 + x^13 + x^33`:
//! `s(t) = d(t) ^ s(t-13) ^ s(t-33)`. The descrambler feeds forward on the
//! received bits, `d(t) = r(t) ^ r(t-13) ^ r(t-33)`, so it recovers after 33
//! bits from any state and turns each line error into three data errors.
//! SYN bits bypass both so the aligner can search for them in cleartext.

use crate::bits::FrameBits;
use crate::config::SYN_BITS;
use crate::frame::{SYN_CONTROL, SYN_DATA};

const TAP_NEAR: u32 = 13;
const TAP_FAR: u32 = 33;
const STATE_MASK: u64 = (1 << TAP_FAR) - 1;
/// Bits processed per step. Equal to the near tap, so every tap of a chunk
/// reads history rather than the chunk itself.
const CHUNK: usize = TAP_NEAR as usize;

/// Consecutive legal SYNs required to declare lock.
pub const LOCK_N: u32 = 64;

#[inline]
fn taps(history: u64, k: usize) -> u64 {
    let mask = (1u64 << k) - 1;
    ((history >> (TAP_NEAR as usize - k)) ^ (history >> (TAP_FAR as usize - k))) & mask
}

/// State: the last 33 line bits, most recent in bit 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScramblerState {
    pub lfsr: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Scrambler {
    state: ScramblerState,
}

impl Scrambler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_state(lfsr: u64) -> Self {
        Self {
            state: ScramblerState {
                lfsr: lfsr & STATE_MASK,
            },
        }
    }

    pub fn state(&self) -> ScramblerState {
        self.state
    }

    pub fn scramble_bit(&mut self, bit: bool) -> bool {
        let h = self.state.lfsr;
        let out = bit ^ ((h >> (TAP_NEAR - 1)) & 1 == 1) ^ ((h >> (TAP_FAR - 1)) & 1 == 1);
        self.state.lfsr = ((h << 1) | out as u64) & STATE_MASK;
        out
    }

    /// Scrambles everything after the SYN in place.
    pub fn scramble_frame(&mut self, bits: &mut FrameBits) {
        let mut pos = SYN_BITS as usize;
        while pos < bits.len() {
            let k = CHUNK.min(bits.len() - pos);
            let out = bits.field(pos, k) ^ taps(self.state.lfsr, k);
            bits.set_field(pos, k, out);
            self.state.lfsr = ((self.state.lfsr << k) | out) & STATE_MASK;
            pos += k;
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Descrambler {
    state: ScramblerState,
}

impl Descrambler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_state(lfsr: u64) -> Self {
        Self {
            state: ScramblerState {
                lfsr: lfsr & STATE_MASK,
            },
        }
    }

    pub fn state(&self) -> ScramblerState {
        self.state
    }

    pub fn descramble_bit(&mut self, bit: bool) -> bool {
        let h = self.state.lfsr;
        let out = bit ^ ((h >> (TAP_NEAR - 1)) & 1 == 1) ^ ((h >> (TAP_FAR - 1)) & 1 == 1);
        self.state.lfsr = ((h << 1) | bit as u64) & STATE_MASK;
        out
    }

    pub fn descramble_frame(&mut self, bits: &mut FrameBits) {
        let mut pos = SYN_BITS as usize;
        while pos < bits.len() {
            let k = CHUNK.min(bits.len() - pos);
            let line = bits.field(pos, k);
            bits.set_field(pos, k, line ^ taps(self.state.lfsr, k));
            self.state.lfsr = ((self.state.lfsr << k) | line) & STATE_MASK;
            pos += k;
        }
    }
}

fn syn_legal(syn: u8) -> bool {
    syn == SYN_DATA || syn == SYN_CONTROL
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignEvent {
    Frame(FrameBits),
    OutOfSync,
}

/// Serial-stream frame aligner. Checks the SYN at the hypothesized frame
/// boundary; an illegal SYN slips the boundary by one bit. Locks after
/// [`LOCK_N`] consecutive legal SYNs and drops lock on the first illegal one.
#[derive(Debug, Clone)]
pub struct AlignerState {
    pub bit_offset: usize,
    pub locked: bool,
    pub consecutive_legal: u32,
}

#[derive(Debug, Clone)]
pub struct LaneAligner {
    frame_size: usize,
    lock_n: u32,
    window: Vec<bool>,
    consumed: u64,
    frame_start: u64,
    locked: bool,
    consecutive_legal: u32,
}

impl LaneAligner {
    pub fn new(frame_size: usize) -> Self {
        Self::with_lock_threshold(frame_size, LOCK_N)
    }

    pub fn with_lock_threshold(frame_size: usize, lock_n: u32) -> Self {
        Self {
            frame_size,
            lock_n,
            window: Vec::with_capacity(frame_size),
            consumed: 0,
            frame_start: 0,
            locked: false,
            consecutive_legal: 0,
        }
    }

    pub fn state(&self) -> AlignerState {
        AlignerState {
            bit_offset: (self.frame_start % self.frame_size as u64) as usize,
            locked: self.locked,
            consecutive_legal: self.consecutive_legal,
        }
    }

    pub fn push_bit(&mut self, bit: bool) -> Option<AlignEvent> {
        if self.window.is_empty() {
            self.frame_start = self.consumed;
        }
        self.consumed += 1;
        self.window.push(bit);
        if self.window.len() < self.frame_size {
            return None;
        }
        let syn = ((self.window[0] as u8) << 1) | self.window[1] as u8;
        if syn_legal(syn) {
            self.consecutive_legal = self.consecutive_legal.saturating_add(1);
            let frame = std::mem::take(&mut self.window);
            if self.locked {
                return Some(AlignEvent::Frame(FrameBits::from_bools(&frame)));
            }
            if self.consecutive_legal >= self.lock_n {
                self.locked = true;
            }
            self.window = frame;
            self.window.clear();
            None
        } else {
            let was_locked = self.locked;
            self.locked = false;
            self.consecutive_legal = 0;
            // slip one bit
            self.window.remove(0);
            self.frame_start += 1;
            was_locked.then_some(AlignEvent::OutOfSync)
        }
    }

    pub fn push_bits(&mut self, bits: impl IntoIterator<Item = bool>) -> Vec<AlignEvent> {
        bits.into_iter().filter_map(|b| self.push_bit(b)).collect()
    }
}

/// Lock tracker for a stream that is already frame-granular: same lock and
/// unlock rules as [`LaneAligner`] at a fixed boundary.
#[derive(Debug, Clone)]
pub struct SyncTracker {
    lock_n: u32,
    locked: bool,
    consecutive_legal: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncVerdict {
    /// Frame is passed downstream.
    pub emit: bool,
    /// Lock was just lost.
    pub lost_lock: bool,
}

impl Default for SyncTracker {
    fn default() -> Self {
        Self::new(LOCK_N)
    }
}

impl SyncTracker {
    pub fn new(lock_n: u32) -> Self {
        Self {
            lock_n,
            locked: false,
            consecutive_legal: 0,
        }
    }

    pub fn locked(&self) -> bool {
        self.locked
    }

    pub fn observe(&mut self, syn: u8) -> SyncVerdict {
        if syn_legal(syn) {
            self.consecutive_legal = self.consecutive_legal.saturating_add(1);
            if self.locked {
                return SyncVerdict {
                    emit: true,
                    lost_lock: false,
                };
            }
            if self.consecutive_legal >= self.lock_n {
                self.locked = true;
            }
            SyncVerdict {
                emit: false,
                lost_lock: false,
            }
        } else {
            let lost = self.locked;
            self.locked = false;
            self.consecutive_legal = 0;
            SyncVerdict {
                emit: false,
                lost_lock: lost,
            }
        }
    }
}
