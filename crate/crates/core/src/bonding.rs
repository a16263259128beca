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

//! Channel bonding: one user flit stream striped round-robin over lanes.

use std::collections::VecDeque;

use crate::endpoint::Endpoint;
use crate::frame::Flit;

/// Splits a flit stream over `lanes` lanes: flit k goes to lane k mod N.
pub fn dispatch<T: Clone>(flits: &[T], lanes: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new(); lanes];
    for (k, f) in flits.iter().enumerate() {
        out[k % lanes].push(f.clone());
    }
    out
}

/// Inverse of [`dispatch`]: strict round-robin, stopping at the first lane
/// that runs dry.
pub fn gather<T: Clone>(per_lane: &[Vec<T>]) -> Vec<T> {
    let mut idx = vec![0usize; per_lane.len()];
    let mut out = Vec::new();
    'outer: loop {
        for (lane, items) in per_lane.iter().enumerate() {
            match items.get(idx[lane]) {
                Some(f) => {
                    out.push(f.clone());
                    idx[lane] += 1;
                }
                None => break 'outer,
            }
        }
    }
    out
}

/// TX half: small per-lane queues filled in round-robin order. A full queue
/// blocks the whole stream, so flit order across lanes is preserved.
#[derive(Debug, Clone)]
pub struct Dispatcher<T> {
    queues: Vec<VecDeque<T>>,
    depth: usize,
    cursor: usize,
}

impl<T> Dispatcher<T> {
    pub fn new(lanes: usize, depth: usize) -> Self {
        Self {
            queues: (0..lanes).map(|_| VecDeque::with_capacity(depth)).collect(),
            depth,
            cursor: 0,
        }
    }

    pub fn lanes(&self) -> usize {
        self.queues.len()
    }

    /// Whether the lane whose turn it is has room.
    pub fn ready(&self) -> bool {
        self.queues[self.cursor].len() < self.depth
    }

    pub fn offer(&mut self, item: T) -> Result<(), T> {
        if !self.ready() {
            return Err(item);
        }
        self.queues[self.cursor].push_back(item);
        self.cursor = (self.cursor + 1) % self.queues.len();
        Ok(())
    }

    pub fn front(&self, lane: usize) -> Option<&T> {
        self.queues[lane].front()
    }

    pub fn pop(&mut self, lane: usize) -> Option<T> {
        self.queues[lane].pop_front()
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }
}

/// RX half: pops delivered flits from the lanes' flow-control buffers in
/// strict round-robin order. A lane that lags blocks the output, and its
/// peers' buffers absorb the skew.
#[derive(Debug, Clone, Default)]
pub struct Gatherer {
    cursor: usize,
}

impl Gatherer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn next(&mut self, lanes: &mut [Endpoint]) -> Option<Flit> {
        let flit = lanes[self.cursor].drain()?;
        self.cursor = (self.cursor + 1) % lanes.len();
        Some(flit)
    }
}
