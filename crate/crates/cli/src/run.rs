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

//! Parallel execution of run points and report assembly.

use anyhow::{Context, Result};
use rayon::prelude::*;

use rifl::harness::{efficiency_curve, metrics_csv_string};
use rifl::sim::{self, Direction};
use rifl::RunMetrics;

use crate::config::Point;

/// Result of one point, in both directions.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub payload: Option<u32>,
    /// Metrics of each direction that carried traffic.
    pub rows: Vec<RunMetrics>,
    /// Aggregate line capacity of one direction.
    pub capacity_bps: f64,
    pub problems: Vec<String>,
}

impl PointResult {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

fn run_point(p: &Point) -> Result<PointResult> {
    let out = sim::run(&p.cfg, &p.scenario, &p.ab, &p.ba).with_context(|| format!("point {}", p.id))?;
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    if !out.completed {
        problems.push(format!("{}: slot limit reached before delivery finished", p.id));
    }
    for d in Direction::BOTH {
        let r = out.direction(d);
        if let Some(m) = &r.mismatch {
            problems.push(format!("{} {}: {m}", p.id, d.label()));
        } else if !r.complete {
            problems.push(format!("{} {}: stream incomplete", p.id, d.label()));
        }
        if r.fc_overflows > 0 {
            problems.push(format!(
                "{} {}: {} flow-control overflows",
                p.id,
                d.label(),
                r.fc_overflows
            ));
        }
        if r.flits_delivered > 0 {
            rows.push(RunMetrics::from_report(format!("{}/{}", p.id, d.label()), r));
        }
    }
    Ok(PointResult {
        payload: p.payload,
        rows,
        capacity_bps: p.cfg.line_rate_bps * p.cfg.lanes as f64,
        problems,
    })
}

/// Runs every point on a pool of `workers` threads. Results keep the point
/// order regardless of scheduling.
pub fn run_points(points: &[Point], workers: usize) -> Result<Vec<PointResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building worker pool")?;
    pool.install(|| points.par_iter().map(run_point).collect())
}

pub fn metrics_csv(results: &[PointResult]) -> String {
    let rows: Vec<RunMetrics> = results.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    metrics_csv_string(&rows)
}

/// `payload_bytes,efficiency` from the A to B goodput of each point.
pub fn efficiency_csv(results: &[PointResult]) -> String {
    let points: Vec<(u32, f64)> = results
        .iter()
        .filter_map(|r| {
            let size = r.payload?;
            let m = r.rows.first()?;
            Some((size, m.goodput_bps / r.capacity_bps))
        })
        .collect();
    let mut buf = Vec::new();
    efficiency_curve(&mut buf, &points).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}
