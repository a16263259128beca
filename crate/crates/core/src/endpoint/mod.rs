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

//! One link endpoint: everything between the user flit interface and the
//! transceiver.

mod clock;
mod flow;
mod monitor;
mod rx;
mod tx;

use std::sync::Arc;

pub use clock::ClockCompensator;
pub use flow::{FlowControlBuffer, FlowState};
pub use monitor::{EventMonitor, REQUEST_THRESHOLD};
pub use rx::{RxStats, RxVerdict, RxVerifier, ROLLBACK_DEPTH};
pub use tx::{EventFlags, TxController, TxFsm, TxKind, TxOutput, TxStats, WARMUP_FRAMES};

use crate::bits::FrameBits;
use crate::config::ProtocolConfig;
use crate::error::Result;
use crate::frame::{Flit, FrameCodec, InvalidMarker, MetaCode};
use crate::line_coding::{Descrambler, Scrambler, SyncTracker};

/// Outcome of one received line frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RxOutcome {
    /// Frame was held back by the sync tracker.
    pub unsynced: bool,
    pub failed: bool,
    /// A user flit entered the flow-control buffer.
    pub delivered: bool,
    pub end_of_packet: bool,
}

#[derive(Debug, Clone)]
pub struct Endpoint {
    codec: Arc<FrameCodec>,
    tx: TxController,
    rx: RxVerifier,
    monitor: EventMonitor,
    sync: SyncTracker,
    scrambler: Scrambler,
    descrambler: Descrambler,
    fc: FlowControlBuffer<Flit>,
    comp: ClockCompensator,
    clock_compensation: bool,
}

impl Endpoint {
    pub fn new(cfg: ProtocolConfig, fc_capacity_bits: u64) -> Self {
        Self::with_codec(Arc::new(FrameCodec::new(cfg)), fc_capacity_bits)
    }

    pub fn with_codec(codec: Arc<FrameCodec>, fc_capacity_bits: u64) -> Self {
        let cfg = *codec.config();
        Self {
            tx: TxController::new(codec.clone()),
            rx: RxVerifier::new(cfg.frame_id_bits),
            monitor: EventMonitor::new(),
            sync: SyncTracker::default(),
            scrambler: Scrambler::new(),
            descrambler: Descrambler::new(),
            fc: FlowControlBuffer::new(fc_capacity_bits, cfg.frame_size_bits as u64),
            comp: ClockCompensator::new(),
            clock_compensation: true,
            codec,
        }
    }

    pub fn set_clock_compensation(&mut self, on: bool) {
        self.clock_compensation = on;
    }

    pub fn codec(&self) -> &FrameCodec {
        &self.codec
    }

    pub fn tx(&self) -> &TxController {
        &self.tx
    }

    pub fn rx(&self) -> &RxVerifier {
        &self.rx
    }

    pub fn monitor(&self) -> &EventMonitor {
        &self.monitor
    }

    pub fn fc(&self) -> &FlowControlBuffer<Flit> {
        &self.fc
    }

    pub fn comp(&self) -> &ClockCompensator {
        &self.comp
    }

    pub fn in_sync(&self) -> bool {
        self.sync.locked()
    }

    pub fn flags(&self) -> EventFlags {
        EventFlags {
            out_of_sync: !self.sync.locked(),
            pause_req: self.monitor.pause_req(),
            retrans_req: self.monitor.retrans_req(),
            frame_error: self.rx.awaiting_replay(),
            hold_data: self.rx.frame_error(),
        }
    }

    /// Whether the next call to [`transmit`](Self::transmit) would accept a
    /// user flit, assuming the flags do not change.
    pub fn ready_for_user(&self) -> bool {
        let f = self.flags();
        self.tx.ready_for_user()
            && !(f.out_of_sync || f.pause_req || f.retrans_req || f.frame_error || f.hold_data)
            && self.tx.replay_cursor().is_none()
    }

    /// One TX frame slot. The returned bits are scrambled and ready for the
    /// line.
    pub fn transmit(&mut self, user: Option<&Flit>) -> Result<TxOutput> {
        let credits = self.comp.on_tx_tick();
        if self.clock_compensation {
            self.tx.add_comp_credits(credits);
        }
        let mut out = self.tx.tick(self.flags(), user)?;
        self.scrambler.scramble_frame(&mut out.bits);
        Ok(out)
    }

    /// One frame arriving from the line.
    pub fn receive(&mut self, mut bits: FrameBits) -> RxOutcome {
        self.comp.on_rx_frame();
        self.descrambler.descramble_frame(&mut bits);
        let syn = bits.field(0, crate::config::SYN_BITS as usize) as u8;
        if !self.sync.observe(syn).emit {
            return RxOutcome {
                unsynced: true,
                ..Default::default()
            };
        }
        self.monitor.observe(self.codec.classify(&bits).as_ref());
        let mut outcome = RxOutcome::default();
        match self.rx.verify(&self.codec, &bits) {
            RxVerdict::Failed => outcome.failed = true,
            RxVerdict::Deliver(frame) => match frame.meta {
                MetaCode::Invalid => match frame.invalid_marker() {
                    Some(InvalidMarker::FlowPause) => self.tx.set_fc_paused(true),
                    Some(InvalidMarker::FlowResume) => self.tx.set_fc_paused(false),
                    _ => {}
                },
                meta => {
                    if let Some(flit) = self.codec.unpack_flit(meta, &frame.payload) {
                        outcome.delivered = true;
                        outcome.end_of_packet = flit.last;
                        if let Some(note) = self.fc.push(flit) {
                            self.tx.queue_fc_notification(note);
                        }
                    }
                }
            },
            RxVerdict::Advanced | RxVerdict::Control(_) => {}
        }
        outcome
    }

    pub fn peek_delivered(&self) -> Option<&Flit> {
        self.fc.front()
    }

    /// User side takes one flit from the receive buffer.
    pub fn drain(&mut self) -> Option<Flit> {
        let (flit, note) = self.fc.pop();
        if let Some(note) = note {
            self.tx.queue_fc_notification(note);
        }
        flit
    }
}
