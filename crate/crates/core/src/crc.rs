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

//! 12-bit CRC: MSB-first, zero initial register, no reflection, no final XOR.
//!
//! With a zero initial register the checksum is linear over XOR, which the
//! error-detection arguments below rely on.

use std::collections::HashMap;

use crate::config::DEFAULT_CRC_POLY;

const WIDTH: u32 = 12;
const MASK: u16 = (1 << WIDTH) - 1;

#[derive(Clone)]
pub struct Crc12 {
    poly: u16,
    table: [u16; 256],
}

impl Default for Crc12 {
    fn default() -> Self {
        Self::new(DEFAULT_CRC_POLY)
    }
}

impl std::fmt::Debug for Crc12 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Crc12({:#05x})", self.poly)
    }
}

impl Crc12 {
    /// `poly` is the generator without its x^12 term.
    pub fn new(poly: u16) -> Self {
        let poly = poly & MASK;
        let mut table = [0u16; 256];
        for (i, slot) in table.iter_mut().enumerate() {
            let mut reg = (i as u16) << (WIDTH - 8);
            for _ in 0..8 {
                reg = if reg & 0x800 != 0 {
                    ((reg << 1) ^ poly) & MASK
                } else {
                    (reg << 1) & MASK
                };
            }
            *slot = reg;
        }
        Self { poly, table }
    }

    pub fn poly(&self) -> u16 {
        self.poly
    }

    #[inline]
    pub fn update_bit(&self, crc: u16, bit: bool) -> u16 {
        let top = ((crc >> (WIDTH - 1)) & 1 == 1) ^ bit;
        let shifted = (crc << 1) & MASK;
        if top {
            shifted ^ self.poly
        } else {
            shifted
        }
    }

    /// Feeds the low `n` bits of `value`, most significant first.
    #[inline]
    pub fn update_bits(&self, mut crc: u16, value: u64, n: u32) -> u16 {
        for k in (0..n).rev() {
            crc = self.update_bit(crc, (value >> k) & 1 == 1);
        }
        crc
    }

    #[inline]
    pub fn update_byte(&self, crc: u16, byte: u8) -> u16 {
        let idx = ((crc >> (WIDTH - 8)) as u8 ^ byte) as usize;
        ((crc << 8) & MASK) ^ self.table[idx]
    }

    pub fn update_bytes(&self, crc: u16, bytes: &[u8]) -> u16 {
        bytes.iter().fold(crc, |c, &b| self.update_byte(c, b))
    }

    /// Checksum over the Meta Code followed by the payload bytes.
    pub fn meta_payload(&self, meta: u8, payload: &[u8]) -> u16 {
        let crc = self.update_bits(0, meta as u64, 2);
        self.update_bytes(crc, payload)
    }

    /// Checksum of an arbitrary bit sequence.
    pub fn bits(&self, bits: impl IntoIterator<Item = bool>) -> u16 {
        bits.into_iter().fold(0, |c, b| self.update_bit(c, b))
    }

    /// Syndrome contributed by each codeword bit, indexed from the last bit
    /// of the check field: `x^j mod g`.
    pub fn position_syndromes(&self, codeword_len: usize) -> Vec<u16> {
        let mut out = Vec::with_capacity(codeword_len);
        let mut s: u16 = 1;
        for _ in 0..codeword_len {
            out.push(s);
            s = if s & 0x800 != 0 {
                ((s << 1) ^ self.poly) & MASK
            } else {
                (s << 1) & MASK
            };
        }
        out
    }

    /// Counts error patterns of weight 1, 2 and 3 in a codeword of
    /// `data_len + 12` bits that leave a zero syndrome. Exhaustive.
    pub fn undetected_low_weight(&self, data_len: usize) -> [u64; 3] {
        let syn = self.position_syndromes(data_len + WIDTH as usize);
        let n = syn.len();
        let mut undetected = [0u64; 3];
        undetected[0] = syn.iter().filter(|&&s| s == 0).count() as u64;
        let mut by_value: HashMap<u16, Vec<usize>> = HashMap::new();
        for (i, &s) in syn.iter().enumerate() {
            by_value.entry(s).or_default().push(i);
        }
        for positions in by_value.values() {
            let k = positions.len() as u64;
            undetected[1] += k * (k - 1) / 2;
        }
        // weight 3: s_i ^ s_j == s_k with i < j < k
        for i in 0..n {
            for j in (i + 1)..n {
                let target = syn[i] ^ syn[j];
                if let Some(ks) = by_value.get(&target) {
                    undetected[2] += ks.iter().filter(|&&k| k > j).count() as u64;
                }
            }
        }
        undetected
    }

    /// Whether every 1-, 2- and 3-bit error in a `data_len`-bit dataword plus
    /// its check field is detected.
    pub fn detects_all_up_to_3(&self, data_len: usize) -> bool {
        self.undetected_low_weight(data_len) == [0, 0, 0]
    }
}
