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

//! Fixed-length bit vector in transmission order.
//!
//! Bit 0 is the first bit on the wire. Internally bit `i` lives in word
//! `i / 64` at position `63 - i % 64`, so the big-endian byte image of the
//! words is the serialized frame.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FrameBits {
    words: Vec<u64>,
    len: usize,
}

impl FrameBits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (63 - (i & 63))) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (63 - (i & 63));
        if bit {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (63 - (i & 63));
    }

    /// Reads `n <= 64` bits starting at `start`, first bit most significant.
    pub fn field(&self, start: usize, n: usize) -> u64 {
        debug_assert!(n <= 64 && start + n <= self.len);
        if n == 0 {
            return 0;
        }
        let w = start >> 6;
        let off = start & 63;
        let hi = self.words[w] << off;
        let combined = if off + n > 64 {
            hi | (self.words[w + 1] >> (64 - off))
        } else {
            hi
        };
        combined >> (64 - n)
    }

    /// Writes the low `n <= 64` bits of `value` starting at `start`.
    pub fn set_field(&mut self, start: usize, n: usize, value: u64) {
        debug_assert!(n <= 64 && start + n <= self.len);
        if n == 0 {
            return;
        }
        let w = start >> 6;
        let off = start & 63;
        let v = if n == 64 { value } else { value & ((1u64 << n) - 1) };
        let shift = 128 - off - n;
        let window = (v as u128) << shift;
        let mask = (if n == 64 { u64::MAX as u128 } else { (1u128 << n) - 1 }) << shift;
        let (hi, mhi) = ((window >> 64) as u64, (mask >> 64) as u64);
        self.words[w] = (self.words[w] & !mhi) | hi;
        if off + n > 64 {
            let (lo, mlo) = (window as u64, mask as u64);
            self.words[w + 1] = (self.words[w + 1] & !mlo) | lo;
        }
    }

    /// Copies whole bytes into the bit range starting at `start`.
    pub fn set_bytes(&mut self, start: usize, bytes: &[u8]) {
        if start.is_multiple_of(8) {
            let mut i = start;
            for &b in bytes {
                let w = i >> 6;
                let shift = 56 - (i & 63);
                self.words[w] = (self.words[w] & !(0xFFu64 << shift)) | ((b as u64) << shift);
                i += 8;
            }
        } else {
            for (k, &b) in bytes.iter().enumerate() {
                self.set_field(start + 8 * k, 8, b as u64);
            }
        }
    }

    pub fn bytes_at(&self, start: usize, count: usize) -> Vec<u8> {
        (0..count).map(|k| self.field(start + 8 * k, 8) as u8).collect()
    }

    /// Big-endian byte image, zero-padded to a whole byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for w in &self.words {
            out.extend_from_slice(&w.to_be_bytes());
        }
        out.truncate(n);
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        assert!(bytes.len() * 8 >= len);
        let mut bits = Self::zeros(len);
        for (k, chunk) in bytes.chunks(8).enumerate() {
            if k >= bits.words.len() {
                break;
            }
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            bits.words[k] = u64::from_be_bytes(buf);
        }
        bits.clear_tail();
        bits
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut out = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// XOR of two equal-length vectors.
    pub fn xor(&self, other: &FrameBits) -> FrameBits {
        assert_eq!(self.len, other.len);
        FrameBits {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len & 63;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 << (64 - rem);
            }
        }
    }
}

impl fmt::Debug for FrameBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrameBits({}; {})", self.len, hex::encode(self.to_bytes()))
    }
}
