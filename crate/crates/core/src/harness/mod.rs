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

//! Traffic generation, loopback validation and run metrics.

mod metrics;
mod traffic;
mod validate;

pub use metrics::{efficiency_curve, frame_efficiency, metrics_csv_string, percentile, write_metrics_csv, RunMetrics};
pub use traffic::{
    packet_flits, read_records, records_from_flits, write_records, FlitSource, GeneratorSpec, PacketGenerator,
    SizeDist, SourceFlit, TrafficRecord, TrafficSpec,
};
pub use validate::{validate, MismatchReport, StreamValidator};
