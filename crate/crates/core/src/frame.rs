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

//! Data and Control Frame codec.
//!
//! Serialized layout, first bit on the wire first:
//!
//! ```text
//! | SYN (2) | payload (S - 16) | meta (2) | verification (12) |
//! ```
//!
//! The Verification Code is `crc12(meta ++ payload) ^ frame_id`, with the
//! frame ID zero-extended to 12 bits. Control Frames reuse the same layout:
//! the meta and payload positions hold a code field whose last byte is the
//! control code and whose other bits are zero.

use crate::bits::FrameBits;
use crate::config::{ProtocolConfig, META_BITS, SYN_BITS, VERIFICATION_BITS};
use crate::crc::Crc12;
use crate::error::{Error, Result};

pub const SYN_DATA: u8 = 0b01;
pub const SYN_CONTROL: u8 = 0b10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetaCode {
    /// Payload not valid.
    Invalid = 0b00,
    /// Valid, not end of packet, all bytes valid.
    ValidMid = 0b01,
    /// Valid, end of packet, all bytes valid.
    ValidEopFull = 0b10,
    /// Valid, end of packet, last payload byte is the Format Code.
    ValidEopPartial = 0b11,
}

impl MetaCode {
    pub fn from_bits(bits: u8) -> Self {
        match bits & 0b11 {
            0b00 => MetaCode::Invalid,
            0b01 => MetaCode::ValidMid,
            0b10 => MetaCode::ValidEopFull,
            _ => MetaCode::ValidEopPartial,
        }
    }

    pub fn bits(self) -> u8 {
        self as u8
    }

    pub fn payload_valid(self) -> bool {
        self != MetaCode::Invalid
    }

    pub fn end_of_packet(self) -> bool {
        matches!(self, MetaCode::ValidEopFull | MetaCode::ValidEopPartial)
    }

    pub fn all_bytes_valid(self) -> bool {
        matches!(self, MetaCode::ValidMid | MetaCode::ValidEopFull)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlCode {
    Idle = 0x00,
    PauseRequest = 0x01,
    RetransmitRequest = 0x02,
}

impl ControlCode {
    pub const ALL: [ControlCode; 3] = [
        ControlCode::Idle,
        ControlCode::PauseRequest,
        ControlCode::RetransmitRequest,
    ];

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0x00 => Some(ControlCode::Idle),
            0x01 => Some(ControlCode::PauseRequest),
            0x02 => Some(ControlCode::RetransmitRequest),
            _ => None,
        }
    }
}

/// Marker carried in the last payload byte of a Data Frame with
/// [`MetaCode::Invalid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvalidMarker {
    Filler = 0x00,
    FlowPause = 0x01,
    FlowResume = 0x02,
}

impl InvalidMarker {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0x00 => Some(InvalidMarker::Filler),
            0x01 => Some(InvalidMarker::FlowPause),
            0x02 => Some(InvalidMarker::FlowResume),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFrame {
    pub meta: MetaCode,
    pub payload: Vec<u8>,
    pub verification: u16,
}

impl DataFrame {
    pub fn syn(&self) -> u8 {
        SYN_DATA
    }

    pub fn format_code(&self) -> Option<u8> {
        (self.meta == MetaCode::ValidEopPartial).then(|| *self.payload.last().unwrap())
    }

    pub fn invalid_marker(&self) -> Option<InvalidMarker> {
        if self.meta == MetaCode::Invalid {
            self.payload.last().and_then(|&b| InvalidMarker::from_byte(b))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlFrame {
    pub code: ControlCode,
    pub verification: u16,
}

impl ControlFrame {
    pub fn syn(&self) -> u8 {
        SYN_CONTROL
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Data(DataFrame),
    Control(ControlFrame),
    VerificationFailure,
    SynIllegal,
}

/// Frame whose checksum is consistent with *some* in-range frame ID.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classified {
    Data { meta: MetaCode, frame_id: u32 },
    Control { code: ControlCode, frame_id: u32 },
}

/// One user-interface flit: the valid bytes of one payload and the
/// end-of-packet flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flit {
    pub data: Vec<u8>,
    pub last: bool,
}

impl Flit {
    pub fn new(data: Vec<u8>, last: bool) -> Self {
        Self { data, last }
    }

    pub fn valid_bytes(&self) -> usize {
        self.data.len()
    }
}

#[derive(Debug, Clone)]
pub struct FrameCodec {
    cfg: ProtocolConfig,
    crc: Crc12,
}

impl FrameCodec {
    pub fn new(cfg: ProtocolConfig) -> Self {
        Self {
            cfg,
            crc: Crc12::new(cfg.crc_poly),
        }
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn crc(&self) -> &Crc12 {
        &self.crc
    }

    fn payload_start(&self) -> usize {
        SYN_BITS as usize
    }

    fn meta_start(&self) -> usize {
        (SYN_BITS + self.cfg.payload_bits()) as usize
    }

    fn verification_start(&self) -> usize {
        (SYN_BITS + self.cfg.payload_bits() + META_BITS) as usize
    }

    fn check_id(&self, frame_id: u32) -> Result<()> {
        if frame_id >= self.cfg.id_space() {
            return Err(Error::FrameIdRange {
                id: frame_id,
                bits: self.cfg.frame_id_bits,
            });
        }
        Ok(())
    }

    pub fn encode_data(&self, meta: MetaCode, payload: Vec<u8>, frame_id: u32) -> Result<DataFrame> {
        self.check_id(frame_id)?;
        let expected = self.cfg.payload_bytes();
        if payload.len() != expected {
            return Err(Error::PayloadLength {
                got: payload.len() * 8,
                expected: expected * 8,
            });
        }
        let verification = self.crc.meta_payload(meta.bits(), &payload) ^ frame_id as u16;
        Ok(DataFrame {
            meta,
            payload,
            verification,
        })
    }

    /// Data Frame with meta 00 and the given marker in the last payload byte.
    pub fn encode_invalid(&self, marker: InvalidMarker, frame_id: u32) -> Result<DataFrame> {
        let mut payload = vec![0u8; self.cfg.payload_bytes()];
        *payload.last_mut().unwrap() = marker as u8;
        self.encode_data(MetaCode::Invalid, payload, frame_id)
    }

    fn control_field(&self, code: ControlCode) -> Vec<u8> {
        let mut field = vec![0u8; self.cfg.payload_bytes()];
        *field.last_mut().unwrap() = code as u8;
        field
    }

    pub fn encode_control(&self, code: ControlCode, frame_id: u32) -> Result<ControlFrame> {
        self.check_id(frame_id)?;
        let verification = self.crc.meta_payload(0, &self.control_field(code)) ^ frame_id as u16;
        Ok(ControlFrame { code, verification })
    }

    pub fn serialize_data(&self, frame: &DataFrame) -> FrameBits {
        let mut bits = FrameBits::zeros(self.cfg.frame_size_bits as usize);
        bits.set_field(0, SYN_BITS as usize, SYN_DATA as u64);
        bits.set_bytes(self.payload_start(), &frame.payload);
        bits.set_field(self.meta_start(), META_BITS as usize, frame.meta.bits() as u64);
        bits.set_field(
            self.verification_start(),
            VERIFICATION_BITS as usize,
            frame.verification as u64,
        );
        bits
    }

    pub fn serialize_control(&self, frame: &ControlFrame) -> FrameBits {
        let mut bits = FrameBits::zeros(self.cfg.frame_size_bits as usize);
        bits.set_field(0, SYN_BITS as usize, SYN_CONTROL as u64);
        bits.set_bytes(self.payload_start(), &self.control_field(frame.code));
        bits.set_field(
            self.verification_start(),
            VERIFICATION_BITS as usize,
            frame.verification as u64,
        );
        bits
    }

    fn split(&self, bits: &FrameBits) -> (u8, Vec<u8>, u8, u16) {
        let syn = bits.field(0, SYN_BITS as usize) as u8;
        let payload = bits.bytes_at(self.payload_start(), self.cfg.payload_bytes());
        let meta = bits.field(self.meta_start(), META_BITS as usize) as u8;
        let vcode = bits.field(self.verification_start(), VERIFICATION_BITS as usize) as u16;
        (syn, payload, meta, vcode)
    }

    fn check_len(&self, bits: &FrameBits) -> Result<()> {
        if bits.len() != self.cfg.frame_size_bits as usize {
            return Err(Error::FrameLength {
                got: bits.len(),
                expected: self.cfg.frame_size_bits as usize,
            });
        }
        Ok(())
    }

    fn parse_control(&self, meta: u8, field: &[u8]) -> Result<ControlCode> {
        let (last, rest) = field.split_last().expect("payload is never empty");
        if meta != 0 || rest.iter().any(|&b| b != 0) {
            // report the low 8 bytes of the field for diagnostics
            let tail = field.iter().rev().take(8).rev().fold(0u64, |a, &b| (a << 8) | b as u64);
            return Err(Error::UnknownControlCode(tail));
        }
        ControlCode::from_code(*last).ok_or(Error::UnknownControlCode(*last as u64))
    }

    /// Verifies a frame-aligned, descrambled frame against the receiver's
    /// expected frame ID.
    pub fn decode(&self, bits: &FrameBits, expected_frame_id: u32) -> Result<Decoded> {
        self.check_len(bits)?;
        let (syn, payload, meta, vcode) = self.split(bits);
        if syn != SYN_DATA && syn != SYN_CONTROL {
            return Ok(Decoded::SynIllegal);
        }
        let checksum = self.crc.meta_payload(meta, &payload);
        let id = (expected_frame_id & self.cfg.id_mask()) as u16;
        if vcode != checksum ^ id {
            return Ok(Decoded::VerificationFailure);
        }
        if syn == SYN_DATA {
            Ok(Decoded::Data(DataFrame {
                meta: MetaCode::from_bits(meta),
                payload,
                verification: vcode,
            }))
        } else {
            let code = self.parse_control(meta, &payload)?;
            Ok(Decoded::Control(ControlFrame {
                code,
                verification: vcode,
            }))
        }
    }

    /// Integrity check that does not need the receiver's frame counter: the
    /// frame passes when `vcode ^ checksum` is a valid frame ID. Control
    /// frames must also carry a well-formed code field.
    pub fn classify(&self, bits: &FrameBits) -> Option<Classified> {
        if bits.len() != self.cfg.frame_size_bits as usize {
            return None;
        }
        let (syn, payload, meta, vcode) = self.split(bits);
        let id = (vcode ^ self.crc.meta_payload(meta, &payload)) as u32;
        if id >= self.cfg.id_space() {
            return None;
        }
        match syn {
            SYN_DATA => Some(Classified::Data {
                meta: MetaCode::from_bits(meta),
                frame_id: id,
            }),
            SYN_CONTROL => self
                .parse_control(meta, &payload)
                .ok()
                .map(|code| Classified::Control { code, frame_id: id }),
            _ => None,
        }
    }

    /// Maps one user flit onto a Meta Code and a full-width payload.
    pub fn pack_flit(&self, flit: &Flit) -> Result<(MetaCode, Vec<u8>)> {
        let width = self.cfg.payload_bytes();
        let n = flit.valid_bytes();
        if n == 0 {
            return Err(Error::Flit("flit has zero valid bytes".into()));
        }
        if n > width {
            return Err(Error::Flit(format!("flit has {n} bytes, payload holds {width}")));
        }
        let mut payload = vec![0u8; width];
        payload[..n].copy_from_slice(&flit.data);
        let meta = match (n == width, flit.last) {
            (true, false) => MetaCode::ValidMid,
            (true, true) => MetaCode::ValidEopFull,
            (false, true) => {
                payload[width - 1] = n as u8;
                MetaCode::ValidEopPartial
            }
            (false, false) => {
                return Err(Error::Flit(format!(
                    "partial flit ({n} of {width} bytes) without last flag"
                )))
            }
        };
        Ok((meta, payload))
    }

    /// Inverse of [`pack_flit`](Self::pack_flit). Returns `None` for invalid
    /// frames and for a Format Code outside `1..width`.
    pub fn unpack_flit(&self, meta: MetaCode, payload: &[u8]) -> Option<Flit> {
        let width = self.cfg.payload_bytes();
        match meta {
            MetaCode::Invalid => None,
            MetaCode::ValidMid => Some(Flit::new(payload[..width].to_vec(), false)),
            MetaCode::ValidEopFull => Some(Flit::new(payload[..width].to_vec(), true)),
            MetaCode::ValidEopPartial => {
                let n = payload[width - 1] as usize;
                (1..width).contains(&n).then(|| Flit::new(payload[..n].to_vec(), true))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn codec() -> FrameCodec {
        FrameCodec::new(ProtocolConfig::default())
    }

    fn sample_payload(seed: u8) -> Vec<u8> {
        (0..30u8).map(|i| i.wrapping_mul(37).wrapping_add(seed)).collect()
    }

    #[test]
    fn zero_invalid_frame_has_zero_verification() {
        let c = codec();
        let f = c.encode_invalid(InvalidMarker::Filler, 0).unwrap();
        assert_eq!(f.verification, 0);
        let idle = c.encode_control(ControlCode::Idle, 0).unwrap();
        assert_eq!(idle.verification, 0);
    }

    #[test]
    fn verification_is_checksum_xor_id() {
        let c = codec();
        let p = sample_payload(3);
        let f = c.encode_data(MetaCode::ValidEopFull, p.clone(), 5).unwrap();
        let bits: Vec<bool> = [true, false]
            .into_iter()
            .chain(p.iter().flat_map(|b| (0..8).rev().map(move |k| (b >> k) & 1 == 1)))
            .collect();
        assert_eq!(f.verification, c.crc().bits(bits) ^ 5);

        let pause = c.encode_control(ControlCode::PauseRequest, 3).unwrap();
        let mut field = vec![false; 242];
        field[241] = true;
        assert_eq!(pause.verification, c.crc().bits(field) ^ 3);
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        let c = codec();
        assert!(matches!(
            c.encode_data(MetaCode::ValidMid, sample_payload(0), 256),
            Err(Error::FrameIdRange { .. })
        ));
        assert!(matches!(
            c.encode_data(MetaCode::ValidMid, vec![0; 29], 0),
            Err(Error::PayloadLength { .. })
        ));
        assert!(c.encode_control(ControlCode::Idle, 300).is_err());
    }

    #[test]
    fn decode_roundtrip_and_id_mismatch() {
        let c = codec();
        let f = c.encode_data(MetaCode::ValidMid, sample_payload(9), 7).unwrap();
        let bits = c.serialize_data(&f);
        assert_eq!(c.decode(&bits, 7).unwrap(), Decoded::Data(f));
        assert_eq!(c.decode(&bits, 8).unwrap(), Decoded::VerificationFailure);
        for code in ControlCode::ALL {
            let cf = c.encode_control(code, 42).unwrap();
            let b = c.serialize_control(&cf);
            assert_eq!(c.decode(&b, 42).unwrap(), Decoded::Control(cf));
            assert_eq!(c.classify(&b), Some(Classified::Control { code, frame_id: 42 }));
        }
    }

    #[test]
    fn illegal_syn() {
        let c = codec();
        let f = c.encode_data(MetaCode::ValidMid, sample_payload(1), 0).unwrap();
        let mut bits = c.serialize_data(&f);
        bits.set_field(0, 2, 0b00);
        assert_eq!(c.decode(&bits, 0).unwrap(), Decoded::SynIllegal);
        bits.set_field(0, 2, 0b11);
        assert_eq!(c.decode(&bits, 0).unwrap(), Decoded::SynIllegal);
        assert_eq!(c.classify(&bits), None);
    }

    #[test]
    fn unknown_control_code_is_an_error() {
        let c = codec();
        let cf = c.encode_control(ControlCode::Idle, 0).unwrap();
        let mut bits = c.serialize_control(&cf);
        // code byte 0x07 with a matching checksum
        let mut field = vec![0u8; 30];
        field[29] = 0x07;
        bits.set_bytes(2, &field);
        bits.set_field(244, 12, c.crc().meta_payload(0, &field) as u64);
        assert_eq!(c.decode(&bits, 0), Err(Error::UnknownControlCode(7)));
    }

    #[test]
    fn id_aliasing_on_low_bit() {
        // a frame built for ID 69 whose verification low bit flips verifies as 68
        let c = codec();
        let f = c.encode_data(MetaCode::ValidMid, sample_payload(4), 69).unwrap();
        let mut bits = c.serialize_data(&f);
        bits.flip(255);
        assert!(matches!(c.decode(&bits, 68).unwrap(), Decoded::Data(_)));
        assert_eq!(c.decode(&bits, 69).unwrap(), Decoded::VerificationFailure);
    }

    #[test]
    fn flit_packing_follows_meta_table() {
        let c = codec();
        let full = Flit::new(vec![0xAA; 30], false);
        assert_eq!(c.pack_flit(&full).unwrap().0, MetaCode::ValidMid);
        let eop = Flit::new(vec![0xAA; 30], true);
        assert_eq!(c.pack_flit(&eop).unwrap().0, MetaCode::ValidEopFull);
        let partial = Flit::new(vec![1, 2, 3, 4, 5, 6, 7], true);
        let (meta, payload) = c.pack_flit(&partial).unwrap();
        assert_eq!(meta, MetaCode::ValidEopPartial);
        assert_eq!(payload[29], 0x07);
        assert_eq!(c.unpack_flit(meta, &payload), Some(partial));
        assert!(c.pack_flit(&Flit::new(vec![1; 7], false)).is_err());
        assert!(c.pack_flit(&Flit::new(vec![], true)).is_err());
        assert!(c.pack_flit(&Flit::new(vec![0; 31], true)).is_err());
    }

    #[test]
    fn meta_table() {
        use MetaCode::*;
        let rows = [
            (Invalid, false, false, false),
            (ValidMid, true, false, true),
            (ValidEopFull, true, true, true),
            (ValidEopPartial, true, true, false),
        ];
        for (m, valid, eop, abv) in rows {
            assert_eq!(
                (m.payload_valid(), m.end_of_packet(), m.all_bytes_valid()),
                (valid, eop, abv)
            );
            assert_eq!(MetaCode::from_bits(m.bits()), m);
        }
    }
}
