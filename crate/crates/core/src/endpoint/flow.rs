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

//! ON/OFF flow control on the receive buffer.

use std::collections::VecDeque;

use crate::frame::InvalidMarker;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowState {
    Flowing,
    Paused,
}

/// Receive-side flit queue with ON/OFF thresholds. Occupancy is counted in
/// payload-slot bits: every queued entry occupies one full frame.
#[derive(Debug, Clone)]
pub struct FlowControlBuffer<T> {
    queue: VecDeque<T>,
    capacity_bits: u64,
    entry_bits: u64,
    thr_on: u64,
    thr_off: u64,
    state: FlowState,
    high_water_bits: u64,
    overflows: u64,
}

impl<T> FlowControlBuffer<T> {
    pub fn new(capacity_bits: u64, entry_bits: u64) -> Self {
        Self {
            queue: VecDeque::new(),
            capacity_bits,
            entry_bits,
            thr_on: (2 * capacity_bits).div_ceil(3),
            thr_off: capacity_bits.div_ceil(3),
            state: FlowState::Flowing,
            high_water_bits: 0,
            overflows: 0,
        }
    }

    pub fn capacity_bits(&self) -> u64 {
        self.capacity_bits
    }

    pub fn thr_on(&self) -> u64 {
        self.thr_on
    }

    pub fn thr_off(&self) -> u64 {
        self.thr_off
    }

    pub fn state(&self) -> FlowState {
        self.state
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn occupancy_bits(&self) -> u64 {
        self.queue.len() as u64 * self.entry_bits
    }

    pub fn high_water_bits(&self) -> u64 {
        self.high_water_bits
    }

    /// Entries that arrived while the buffer was full. They are still
    /// queued so no data is lost, but the safety bound was broken.
    pub fn overflows(&self) -> u64 {
        self.overflows
    }

    pub fn front(&self) -> Option<&T> {
        self.queue.front()
    }

    pub fn push(&mut self, item: T) -> Option<InvalidMarker> {
        if self.occupancy_bits() + self.entry_bits > self.capacity_bits {
            self.overflows += 1;
        }
        self.queue.push_back(item);
        self.high_water_bits = self.high_water_bits.max(self.occupancy_bits());
        self.update()
    }

    pub fn pop(&mut self) -> (Option<T>, Option<InvalidMarker>) {
        let item = self.queue.pop_front();
        (item, self.update())
    }

    /// Threshold check; returns the notification to send, if any.
    pub fn update(&mut self) -> Option<InvalidMarker> {
        let occ = self.occupancy_bits();
        match self.state {
            FlowState::Flowing if occ > self.thr_on => {
                self.state = FlowState::Paused;
                Some(InvalidMarker::FlowPause)
            }
            FlowState::Paused if occ < self.thr_off => {
                self.state = FlowState::Flowing;
                Some(InvalidMarker::FlowResume)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_are_thirds() {
        let b = FlowControlBuffer::<()>::new(75_000, 256);
        assert_eq!((b.thr_on(), b.thr_off()), (50_000, 25_000));
        let b = FlowControlBuffer::<()>::new(10, 1);
        assert_eq!((b.thr_on(), b.thr_off()), (7, 4));
    }

    #[test]
    fn one_notification_per_crossing() {
        let mut b = FlowControlBuffer::new(30, 1);
        let mut notes = Vec::new();
        for i in 0..25 {
            notes.extend(b.push(i));
        }
        assert_eq!(notes, [InvalidMarker::FlowPause]);
        assert_eq!(b.state(), FlowState::Paused);
        for _ in 0..25 {
            notes.extend(b.pop().1);
        }
        assert_eq!(notes, [InvalidMarker::FlowPause, InvalidMarker::FlowResume]);
        assert_eq!(b.high_water_bits(), 25);
        assert_eq!(b.overflows(), 0);
    }

    #[test]
    fn overflow_is_counted_not_dropped() {
        let mut b = FlowControlBuffer::new(3, 1);
        for i in 0..5 {
            b.push(i);
        }
        assert_eq!(b.len(), 5);
        assert_eq!(b.overflows(), 2);
    }
}
