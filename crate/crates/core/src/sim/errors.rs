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

//! Bit-error injection keyed by frame position, independent of event order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::FrameBits;

/// Keystream words reserved per frame index.
const WORDS_PER_FRAME: u128 = 1 << 13;

/// Independent bit flips with probability `ber` on every bit of a frame.
///
/// Each frame index owns a fixed slice of a ChaCha8 keystream. The first
/// draw decides whether the frame is hit at all and gives the smallest of
/// the per-bit uniforms; the others are drawn conditioned on it. Two models
/// with the same seed and different rates therefore flip nested sets of
/// bits, which keeps BER sweeps monotone.
#[derive(Debug, Clone)]
pub struct ErrorModel {
    ber: f64,
    frame_bits: u32,
    clean: f64,
    rng: ChaCha8Rng,
}

impl ErrorModel {
    pub fn new(ber: f64, frame_bits: u32, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            ber,
            frame_bits,
            clean: (frame_bits as f64 * (-ber).ln_1p()).exp(),
            rng,
        }
    }

    pub fn ber(&self) -> f64 {
        self.ber
    }

    /// Flips the bits hit in frame `index`; returns the number flipped.
    pub fn apply(&mut self, index: u64, bits: &mut FrameBits) -> u32 {
        if self.ber <= 0.0 {
            return 0;
        }
        self.rng.set_word_pos(index as u128 * WORDS_PER_FRAME);
        let v: f64 = self.rng.gen();
        if v <= self.clean {
            return 0;
        }
        let s = self.frame_bits;
        let min_u = 1.0 - v.powf(1.0 / s as f64);
        let first = self.rng.gen_range(0..s);
        bits.flip(first as usize);
        let mut flips = 1;
        for i in 0..s {
            let w: f64 = self.rng.gen();
            if i != first && min_u + (1.0 - min_u) * w < self.ber {
                bits.flip(i as usize);
                flips += 1;
            }
        }
        flips
    }
}
