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

//! `rifl`: design calculators, link simulations, sweeps and traffic tools.

mod config;
mod design;
mod run;
mod traffic;

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{Axis, ExperimentConfig, Overrides};
use design::{DesignArgs, Format};
use run::PointResult;

#[derive(Debug, Parser)]
#[command(
    name = "rifl",
    version,
    about = "RIFL link-layer model: design, simulation and traffic tools"
)]
struct Cli {
    /// Override every traffic and error seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use the hardware test volume instead of the scaled default.
    #[arg(long, global = true)]
    full: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-form design tables.
    Design(DesignCmd),
    /// Run a config; BER points listed under [sweep] run one after another.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run one sweep axis of a config in parallel.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Traffic trace tools.
    #[command(subcommand)]
    Traffic(TrafficCmd),
}

#[derive(Debug, Args)]
struct DesignCmd {
    /// Minimal frame-ID and checksum widths per frame size.
    #[arg(long)]
    table2: bool,
    /// Error-free efficiency per frame size.
    #[arg(long)]
    table3: bool,
    /// MTBF against BER for one frame size.
    #[arg(long)]
    table4: bool,
    /// Error-free efficiency of --frame-size.
    #[arg(long)]
    efficiency: bool,
    /// Retransmission and flow-control buffer sizes.
    #[arg(long)]
    sizing: bool,
    #[arg(long, default_value_t = 100e9)]
    line_rate: f64,
    /// Round-trip time in seconds.
    #[arg(long, default_value_t = 500e-9)]
    rtt: f64,
    #[arg(long, default_value_t = 1e-7)]
    ber: f64,
    #[arg(long, default_value_t = 256)]
    frame_size: u32,
    /// BERs for --table4.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5])]
    bers: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum TrafficCmd {
    /// Write a generated trace as CSV.
    Gen {
        /// fixed:N or uniform:MIN:MAX
        #[arg(long, default_value = "uniform:1:8192")]
        sizes: String,
        #[arg(long, default_value_t = 1_000_000)]
        total_bytes: u64,
        #[arg(long, default_value_t = 256)]
        frame_size: u32,
    },
    /// Compare a received trace against the sent one.
    Validate { sent: PathBuf, received: PathBuf },
}

/// Exit code when a validator or a run check failed.
const EXIT_MISMATCH: u8 = 1;
/// Exit code for unusable configs or arguments.
const EXIT_CONFIG: u8 = 2;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn workers(n: Option<usize>) -> usize {
    n.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn summarize(results: &[PointResult]) -> bool {
    let mut ok = true;
    for r in results {
        for m in &r.rows {
            eprintln!(
                "{:<24} ratio {:.4}  goodput {:.3} Gbps  latency avg {:.1} ns  p99 {:.1} ns",
                m.scenario_id,
                m.bandwidth_ratio,
                m.goodput_bps / 1e9,
                m.latency_avg_ns,
                m.latency_p99_ns
            );
        }
        for p in &r.problems {
            eprintln!("FAIL {p}");
            ok = false;
        }
    }
    eprintln!(
        "{} of {} points passed validation",
        results.iter().filter(|r| r.passed()).count(),
        results.len()
    );
    ok
}

fn run_config(cli: &Cli, path: &Path, axis: Option<Axis>, n: Option<usize>) -> Result<Result<bool>> {
    let cfg = ExperimentConfig::load(path)?;
    let ov = Overrides {
        seed: cli.seed,
        full: cli.full,
    };
    let points = cfg.points(axis, ov)?;
    Ok((|| {
        let results = run::run_points(&points, workers(n))?;
        let text = match axis {
            Some(Axis::Payload) => run::efficiency_csv(&results),
            _ => run::metrics_csv(&results),
        };
        emit(cli.out.as_deref().or(cfg.output.metrics.as_deref()), &text)?;
        Ok(summarize(&results))
    })())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Design(d) => design::tables(&DesignArgs {
            table2: d.table2,
            table3: d.table3,
            table4: d.table4,
            efficiency: d.efficiency,
            sizing: d.sizing,
            line_rate: d.line_rate,
            rtt: d.rtt,
            ber: d.ber,
            frame_size: d.frame_size,
            bers: d.bers.clone(),
        })
        .map(|tables| {
            let text: Vec<String> = tables.iter().map(|t| t.render(d.format)).collect();
            emit(cli.out.as_deref(), &text.join("\n")).map(|_| true)
        }),
        Cmd::Simulate { config, workers } => run_config(&cli, config, None, *workers),
        Cmd::Sweep { config, axis, workers } => run_config(&cli, config, Some(*axis), *workers),
        Cmd::Traffic(TrafficCmd::Gen {
            sizes,
            total_bytes,
            frame_size,
        }) => (|| {
            let sizes = traffic::parse_sizes(sizes)?;
            let width = rifl::ProtocolConfig::with_frame_size(*frame_size)?.payload_bytes();
            Ok((sizes, width))
        })()
        .map(|(sizes, width)| {
            let seed = cli.seed.unwrap_or(1);
            let packets = match &cli.out {
                Some(p) => File::create(p)
                    .with_context(|| format!("creating {}", p.display()))
                    .and_then(|f| traffic::generate(f, sizes, *total_bytes, seed, width)),
                None => traffic::generate(io::stdout().lock(), sizes, *total_bytes, seed, width),
            }?;
            eprintln!("{packets} packets");
            Ok(true)
        }),
        Cmd::Traffic(TrafficCmd::Validate { sent, received }) => (|| {
            let open = |p: &PathBuf| File::open(p).with_context(|| format!("opening {}", p.display()));
            Ok((open(sent)?, open(received)?))
        })()
        .map(|(a, b)| {
            Ok(match traffic::compare(a, b)? {
                Ok(packets) => {
                    println!("ok: {packets} packets match");
                    true
                }
                Err(report) => {
                    println!("{report}");
                    false
                }
            })
        }),
    };
    match outcome {
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(EXIT_MISMATCH),
    }
}
