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

//! Clock compensation between the local TX clock and the recovered RX clock.

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClockCompensator {
    tx_count: u64,
    rx_count: u64,
    lag_register: i64,
    started: bool,
    total_credits: u64,
}

impl ClockCompensator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pure update step: pause credits for a counter difference.
    pub fn credits(lag_register: &mut i64, tx_count: u64, rx_count: u64) -> u64 {
        let diff = tx_count as i64 - rx_count as i64;
        let n = (diff - *lag_register).max(0);
        *lag_register = (*lag_register).max(diff);
        n as u64
    }

    /// Counting starts with the first received frame.
    pub fn on_rx_frame(&mut self) {
        self.started = true;
        self.rx_count += 1;
    }

    /// Local TX slot; returns the new pause credits.
    pub fn on_tx_tick(&mut self) -> u64 {
        if !self.started {
            return 0;
        }
        self.tx_count += 1;
        let n = Self::credits(&mut self.lag_register, self.tx_count, self.rx_count);
        self.total_credits += n;
        n
    }

    pub fn total_credits(&self) -> u64 {
        self.total_credits
    }

    pub fn lag_register(&self) -> i64 {
        self.lag_register
    }
}
