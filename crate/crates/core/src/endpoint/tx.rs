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

//! Transmit side: state machine, retransmission buffer and replay schedule.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::bits::FrameBits;
use crate::error::Result;
use crate::frame::{ControlCode, Flit, FrameCodec, InvalidMarker, MetaCode};

/// Invalid Data Frames sent on the first entry to NORMAL.
pub const WARMUP_FRAMES: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TxFsm {
    Init,
    SendPause,
    Pause,
    Retrans,
    SendRetrans,
    Normal,
}

impl TxFsm {
    pub const ALL: [TxFsm; 6] = [
        TxFsm::Init,
        TxFsm::SendPause,
        TxFsm::Pause,
        TxFsm::Retrans,
        TxFsm::SendRetrans,
        TxFsm::Normal,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// Inputs from the local event monitors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventFlags {
    pub out_of_sync: bool,
    pub pause_req: bool,
    pub retrans_req: bool,
    /// The local receiver wants a replay.
    pub frame_error: bool,
    /// The local receiver has not delivered since its last failure; user
    /// data waits.
    pub hold_data: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxKind {
    Control(ControlCode),
    Data {
        frame_id: u32,
        meta: MetaCode,
        marker: Option<InvalidMarker>,
        replay: bool,
    },
}

impl TxKind {
    pub fn is_user_data(&self) -> bool {
        matches!(self, TxKind::Data { meta, replay: false, .. } if meta.payload_valid())
    }
}

#[derive(Debug, Clone)]
pub struct TxOutput {
    /// Unscrambled frame.
    pub bits: FrameBits,
    pub kind: TxKind,
    pub state: TxFsm,
    pub flit_consumed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TxStats {
    pub frames: u64,
    pub user_frames: u64,
    pub invalid_frames: u64,
    pub replayed_frames: u64,
    pub control_frames: [u64; 3],
    /// Control frames sent after the first entry to NORMAL.
    pub control_after_linkup: [u64; 3],
    pub retrans_events: u64,
    pub comp_pauses: u64,
    pub fc_notifications: u64,
    pub slots_in_state: [u64; 6],
}

impl TxStats {
    pub fn slots(&self, state: TxFsm) -> u64 {
        self.slots_in_state[state.index()]
    }

    /// Adds another lane's counters.
    pub fn accumulate(&mut self, other: &TxStats) {
        self.frames += other.frames;
        self.user_frames += other.user_frames;
        self.invalid_frames += other.invalid_frames;
        self.replayed_frames += other.replayed_frames;
        self.retrans_events += other.retrans_events;
        self.comp_pauses += other.comp_pauses;
        self.fc_notifications += other.fc_notifications;
        for i in 0..3 {
            self.control_frames[i] += other.control_frames[i];
            self.control_after_linkup[i] += other.control_after_linkup[i];
        }
        for i in 0..6 {
            self.slots_in_state[i] += other.slots_in_state[i];
        }
    }
}

#[derive(Debug, Clone)]
struct Buffered {
    bits: FrameBits,
    meta: MetaCode,
    marker: Option<InvalidMarker>,
}

#[derive(Debug, Clone)]
pub struct TxController {
    codec: Arc<FrameCodec>,
    fsm: TxFsm,
    frame_id: u32,
    buffer: Vec<Buffered>,
    replay_active: bool,
    replay_cursor: u32,
    warmup_remaining: u32,
    linked_up: bool,
    fc_paused: bool,
    comp_pause_credits: u64,
    pending_fc: VecDeque<InvalidMarker>,
    stats: TxStats,
}

impl TxController {
    pub fn new(codec: Arc<FrameCodec>) -> Self {
        let space = codec.config().id_space() as usize;
        Self {
            codec,
            fsm: TxFsm::Init,
            frame_id: 0,
            buffer: Vec::with_capacity(space),
            replay_active: false,
            replay_cursor: 0,
            warmup_remaining: WARMUP_FRAMES,
            linked_up: false,
            fc_paused: false,
            comp_pause_credits: 0,
            pending_fc: VecDeque::new(),
            stats: TxStats::default(),
        }
    }

    pub fn state(&self) -> TxFsm {
        self.fsm
    }

    /// ID the next new Data Frame will carry.
    pub fn frame_id(&self) -> u32 {
        self.frame_id
    }

    pub fn stats(&self) -> &TxStats {
        &self.stats
    }

    pub fn replay_cursor(&self) -> Option<u32> {
        self.replay_active.then_some(self.replay_cursor)
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    /// Buffered frame for `id`, if the buffer has been filled that far.
    pub fn buffered(&self, id: u32) -> Option<&FrameBits> {
        self.buffer.get(id as usize).map(|b| &b.bits)
    }

    pub fn fc_paused(&self) -> bool {
        self.fc_paused
    }

    /// Remote receiver asked us to stop (or resume) sending user data.
    pub fn set_fc_paused(&mut self, paused: bool) {
        self.fc_paused = paused;
    }

    /// Queues a flow-control notification for the local receive buffer.
    pub fn queue_fc_notification(&mut self, marker: InvalidMarker) {
        self.pending_fc.push_back(marker);
    }

    pub fn add_comp_credits(&mut self, n: u64) {
        self.comp_pause_credits += n;
    }

    pub fn comp_pause_credits(&self) -> u64 {
        self.comp_pause_credits
    }

    /// Whether the next NORMAL slot could carry a user flit.
    pub fn ready_for_user(&self) -> bool {
        self.fsm == TxFsm::Normal
            && self.warmup_remaining == 0
            && self.pending_fc.is_empty()
            && !self.fc_paused
            && self.comp_pause_credits == 0
    }

    fn space(&self) -> u32 {
        self.codec.config().id_space()
    }

    fn mask(&self) -> u32 {
        self.codec.config().id_mask()
    }

    /// ID a receiver following this stream expects next. Control frames
    /// carry it in their Verification Code.
    pub fn next_data_id(&self) -> u32 {
        if self.fsm == TxFsm::Init {
            return 0;
        }
        if self.replay_active && self.replay_cursor < 2 * self.space() {
            return (self.frame_id + self.replay_cursor / 2) & self.mask();
        }
        self.frame_id
    }

    /// Advances one frame slot.
    pub fn tick(&mut self, flags: EventFlags, user: Option<&Flit>) -> Result<TxOutput> {
        self.stats.frames += 1;
        if self.fsm == TxFsm::Init {
            let id = self.buffer.len() as u32;
            let frame = self.codec.encode_invalid(InvalidMarker::Filler, id)?;
            self.buffer.push(Buffered {
                bits: self.codec.serialize_data(&frame),
                meta: MetaCode::Invalid,
                marker: Some(InvalidMarker::Filler),
            });
            self.stats.slots_in_state[TxFsm::Init.index()] += 1;
            let out = self.control(ControlCode::PauseRequest, TxFsm::Init)?;
            if self.buffer.len() as u32 == self.space() {
                self.fsm = TxFsm::SendPause;
            }
            return Ok(out);
        }

        if self.replay_active && self.replay_cursor == self.codec.config().replay_len() {
            if flags.retrans_req {
                self.replay_cursor = 0;
                self.stats.retrans_events += 1;
            } else {
                self.replay_active = false;
            }
        }
        let next = if flags.out_of_sync {
            TxFsm::SendPause
        } else if flags.pause_req {
            TxFsm::Pause
        } else if flags.retrans_req || self.replay_active {
            TxFsm::Retrans
        } else if flags.frame_error {
            TxFsm::SendRetrans
        } else {
            TxFsm::Normal
        };
        if next == TxFsm::Retrans && !self.replay_active {
            self.replay_active = true;
            self.replay_cursor = 0;
            self.stats.retrans_events += 1;
        }
        self.fsm = next;
        self.stats.slots_in_state[next.index()] += 1;
        if next == TxFsm::Normal {
            self.linked_up = true;
        }
        match next {
            TxFsm::SendPause => self.control(ControlCode::PauseRequest, next),
            TxFsm::Pause => self.control(ControlCode::Idle, next),
            TxFsm::SendRetrans => self.control(ControlCode::RetransmitRequest, next),
            TxFsm::Retrans => self.replay_step(flags),
            TxFsm::Normal => self.normal_step(flags, user),
            TxFsm::Init => unreachable!(),
        }
    }

    fn control(&mut self, code: ControlCode, state: TxFsm) -> Result<TxOutput> {
        let frame = self.codec.encode_control(code, self.next_data_id())?;
        self.stats.control_frames[code as usize] += 1;
        if self.linked_up {
            self.stats.control_after_linkup[code as usize] += 1;
        }
        Ok(TxOutput {
            bits: self.codec.serialize_control(&frame),
            kind: TxKind::Control(code),
            state,
            flit_consumed: false,
        })
    }

    fn replay_step(&mut self, flags: EventFlags) -> Result<TxOutput> {
        let c = self.replay_cursor;
        // The oldest entry shares its ID with the next fresh frame, so a
        // caught-up receiver would take it as new. It is never replayed.
        if c < 2 * self.space() && c % 2 == 1 && c > 1 {
            self.replay_cursor += 1;
            let id = (self.frame_id + c / 2) & self.mask();
            let entry = &self.buffer[id as usize];
            self.stats.replayed_frames += 1;
            return Ok(TxOutput {
                bits: entry.bits.clone(),
                kind: TxKind::Data {
                    frame_id: id,
                    meta: entry.meta,
                    marker: entry.marker,
                    replay: true,
                },
                state: TxFsm::Retrans,
                flit_consumed: false,
            });
        }
        let filler = if flags.frame_error {
            ControlCode::RetransmitRequest
        } else {
            ControlCode::Idle
        };
        let out = self.control(filler, TxFsm::Retrans);
        self.replay_cursor += 1;
        out
    }

    fn normal_step(&mut self, flags: EventFlags, user: Option<&Flit>) -> Result<TxOutput> {
        if self.warmup_remaining > 0 {
            self.warmup_remaining -= 1;
            return self.emit_invalid(InvalidMarker::Filler);
        }
        if let Some(marker) = self.pending_fc.pop_front() {
            self.stats.fc_notifications += 1;
            return self.emit_invalid(marker);
        }
        if self.fc_paused || flags.hold_data {
            return self.emit_invalid(InvalidMarker::Filler);
        }
        if self.comp_pause_credits > 0 {
            self.comp_pause_credits -= 1;
            self.stats.comp_pauses += 1;
            return self.emit_invalid(InvalidMarker::Filler);
        }
        match user {
            Some(flit) => {
                let (meta, payload) = self.codec.pack_flit(flit)?;
                self.stats.user_frames += 1;
                let mut out = self.emit_data(meta, payload, None)?;
                out.flit_consumed = true;
                Ok(out)
            }
            None => self.emit_invalid(InvalidMarker::Filler),
        }
    }

    fn emit_invalid(&mut self, marker: InvalidMarker) -> Result<TxOutput> {
        self.stats.invalid_frames += 1;
        let mut payload = vec![0u8; self.codec.config().payload_bytes()];
        *payload.last_mut().unwrap() = marker as u8;
        self.emit_data(MetaCode::Invalid, payload, Some(marker))
    }

    fn emit_data(&mut self, meta: MetaCode, payload: Vec<u8>, marker: Option<InvalidMarker>) -> Result<TxOutput> {
        let id = self.frame_id;
        let frame = self.codec.encode_data(meta, payload, id)?;
        let bits = self.codec.serialize_data(&frame);
        self.buffer[id as usize] = Buffered {
            bits: bits.clone(),
            meta,
            marker,
        };
        self.frame_id = (id + 1) & self.mask();
        Ok(TxOutput {
            bits,
            kind: TxKind::Data {
                frame_id: id,
                meta,
                marker,
                replay: false,
            },
            state: TxFsm::Normal,
            flit_consumed: false,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ProtocolConfig;

    fn tx() -> TxController {
        TxController::new(Arc::new(FrameCodec::new(ProtocolConfig::default())))
    }

    fn through_init(tx: &mut TxController) {
        while tx.state() == TxFsm::Init {
            tx.tick(EventFlags::default(), None).unwrap();
        }
    }

    fn flit() -> Flit {
        Flit::new(vec![0xAB; 30], false)
    }

    #[test]
    fn init_fills_buffer_while_requesting_pause() {
        let mut tx = tx();
        let mut pauses = 0;
        for _ in 0..256 {
            assert_eq!(tx.state(), TxFsm::Init);
            let out = tx.tick(EventFlags::default(), Some(&flit())).unwrap();
            assert!(!out.flit_consumed);
            if out.kind == TxKind::Control(ControlCode::PauseRequest) {
                pauses += 1;
            }
        }
        assert_eq!(pauses, 256);
        assert_eq!(tx.buffer_len(), 256);
        assert_eq!(tx.state(), TxFsm::SendPause);
        assert_eq!(tx.frame_id(), 0);
    }

    #[test]
    fn normal_without_data_sends_consecutive_invalid_frames() {
        let mut tx = tx();
        through_init(&mut tx);
        let ids: Vec<u32> = (0..10)
            .map(|_| match tx.tick(EventFlags::default(), None).unwrap().kind {
                TxKind::Data {
                    frame_id,
                    meta: MetaCode::Invalid,
                    ..
                } => frame_id,
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        assert_eq!(ids, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn warmup_precedes_user_data() {
        let mut tx = tx();
        through_init(&mut tx);
        for _ in 0..WARMUP_FRAMES {
            assert!(!tx.tick(EventFlags::default(), Some(&flit())).unwrap().flit_consumed);
        }
        let out = tx.tick(EventFlags::default(), Some(&flit())).unwrap();
        assert!(out.flit_consumed);
        assert!(out.kind.is_user_data());
    }

    #[test]
    fn fc_pause_blocks_user_flits() {
        let mut tx = tx();
        through_init(&mut tx);
        for _ in 0..WARMUP_FRAMES {
            tx.tick(EventFlags::default(), None).unwrap();
        }
        tx.set_fc_paused(true);
        let out = tx.tick(EventFlags::default(), Some(&flit())).unwrap();
        assert!(!out.flit_consumed);
        assert!(matches!(
            out.kind,
            TxKind::Data {
                meta: MetaCode::Invalid,
                ..
            }
        ));
        tx.set_fc_paused(false);
        assert!(tx.tick(EventFlags::default(), Some(&flit())).unwrap().flit_consumed);
    }

    #[test]
    fn comp_credits_become_single_slot_pauses() {
        let mut tx = tx();
        through_init(&mut tx);
        for _ in 0..WARMUP_FRAMES {
            tx.tick(EventFlags::default(), None).unwrap();
        }
        tx.add_comp_credits(2);
        let consumed: Vec<bool> = (0..3)
            .map(|_| tx.tick(EventFlags::default(), Some(&flit())).unwrap().flit_consumed)
            .collect();
        assert_eq!(consumed, [false, false, true]);
        assert_eq!(tx.stats().comp_pauses, 2);
    }

    #[test]
    fn priority_order() {
        let mut tx = tx();
        through_init(&mut tx);
        let all = EventFlags {
            out_of_sync: true,
            pause_req: true,
            retrans_req: true,
            frame_error: true,
            hold_data: true,
        };
        assert_eq!(tx.tick(all, None).unwrap().state, TxFsm::SendPause);
        let f = EventFlags {
            out_of_sync: false,
            ..all
        };
        assert_eq!(tx.tick(f, None).unwrap().state, TxFsm::Pause);
        let f = EventFlags { pause_req: false, ..f };
        assert_eq!(tx.tick(f, None).unwrap().state, TxFsm::Retrans);
    }

    fn schedule(frame_error: bool) -> Vec<TxKind> {
        let mut tx = tx();
        through_init(&mut tx);
        for _ in 0..40 {
            tx.tick(EventFlags::default(), None).unwrap();
        }
        let flags = EventFlags {
            retrans_req: true,
            frame_error,
            ..Default::default()
        };
        let mut kinds = vec![tx.tick(flags, None).unwrap().kind];
        let flags = EventFlags {
            retrans_req: false,
            ..flags
        };
        while tx.replay_cursor().is_some_and(|c| c < 640) {
            kinds.push(tx.tick(flags, None).unwrap().kind);
        }
        assert_eq!(tx.stats().retrans_events, 1);
        kinds
    }

    #[test]
    fn replay_schedule_layout() {
        let kinds = schedule(false);
        assert_eq!(kinds.len(), 640);
        for (i, k) in kinds.iter().enumerate() {
            if i < 512 && i % 2 == 1 && i > 1 {
                let expect = (40 + i as u32 / 2) & 0xFF;
                assert!(
                    matches!(k, TxKind::Data { frame_id, replay: true, .. } if *frame_id == expect),
                    "position {i}: {k:?}"
                );
            } else {
                assert_eq!(*k, TxKind::Control(ControlCode::Idle), "position {i}");
            }
        }
    }

    #[test]
    fn replay_fillers_request_retransmission_on_local_error() {
        let kinds = schedule(true);
        let fillers: Vec<_> = kinds.iter().filter(|k| matches!(k, TxKind::Control(_))).collect();
        assert_eq!(fillers.len(), 257 + 128);
        assert!(fillers
            .iter()
            .all(|k| **k == TxKind::Control(ControlCode::RetransmitRequest)));
    }

    #[test]
    fn schedule_restarts_while_request_persists() {
        let mut tx = tx();
        through_init(&mut tx);
        let flags = EventFlags {
            retrans_req: true,
            ..Default::default()
        };
        for _ in 0..641 {
            tx.tick(flags, None).unwrap();
        }
        assert_eq!(tx.stats().retrans_events, 2);
        assert_eq!(tx.replay_cursor(), Some(1));
        for _ in 0..639 {
            tx.tick(EventFlags::default(), None).unwrap();
        }
        assert_eq!(tx.tick(EventFlags::default(), None).unwrap().state, TxFsm::Normal);
    }

    #[test]
    fn held_data_sends_fresh_fillers() {
        let mut tx = tx();
        through_init(&mut tx);
        for _ in 0..WARMUP_FRAMES {
            tx.tick(EventFlags::default(), None).unwrap();
        }
        let hold = EventFlags {
            hold_data: true,
            ..Default::default()
        };
        let f = Flit::new(vec![1; 30], true);
        let id = tx.frame_id();
        let out = tx.tick(hold, Some(&f)).unwrap();
        assert_eq!(out.state, TxFsm::Normal);
        assert!(!out.flit_consumed);
        assert!(matches!(
            out.kind,
            TxKind::Data { frame_id, marker: Some(InvalidMarker::Filler), replay: false, .. } if frame_id == id
        ));
        assert!(tx.tick(EventFlags::default(), Some(&f)).unwrap().flit_consumed);
    }

    #[test]
    fn replayed_bits_match_original() {
        let mut tx = tx();
        through_init(&mut tx);
        let mut originals = Vec::new();
        for i in 0..300u32 {
            let f = Flit::new(vec![i as u8; 30], false);
            let out = tx.tick(EventFlags::default(), Some(&f)).unwrap();
            originals.push(out);
        }
        let flags = EventFlags {
            retrans_req: true,
            ..Default::default()
        };
        tx.tick(flags, None).unwrap();
        for _ in 0..2 {
            let filler = tx.tick(EventFlags::default(), None).unwrap();
            assert!(matches!(filler.kind, TxKind::Control(ControlCode::Idle)));
        }
        let replayed = tx.tick(EventFlags::default(), None).unwrap();
        // oldest live frame is the one sent 255 slots ago
        assert_eq!(replayed.bits, originals[300 - 255].bits);
    }
}
