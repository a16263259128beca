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

//! Closed-form design tables.

use anyhow::{bail, Result};

use rifl::analysis;
use rifl::config::VERIFICATION_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Markdown,
    Csv,
}

/// Column-aligned report table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: &str, header: &[&str]) -> Self {
        Self {
            title: title.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.header.join(",") + "\n";
                for r in &self.rows {
                    out += &(r.join(",") + "\n");
                }
                out
            }
            Format::Markdown => {
                let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
                let mut out = format!("### {}\n\n", self.title);
                out += &line(&self.header);
                out += &line(&vec!["---".to_string(); self.header.len()]);
                for r in &self.rows {
                    out += &line(r);
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DesignArgs {
    pub table2: bool,
    pub table3: bool,
    pub table4: bool,
    pub efficiency: bool,
    pub sizing: bool,
    pub line_rate: f64,
    pub rtt: f64,
    pub ber: f64,
    pub frame_size: u32,
    pub bers: Vec<f64>,
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

/// Builds every requested table, in a fixed order.
pub fn tables(a: &DesignArgs) -> Result<Vec<Table>> {
    if !(a.line_rate > 0.0 && a.rtt >= 0.0 && (0.0..1.0).contains(&a.ber)) {
        bail!("need line rate > 0, RTT >= 0 and BER in [0, 1)");
    }
    let mut out = Vec::new();
    if a.table2 {
        let mut t = Table::new(
            &format!(
                "Minimal widths for {} Gbps, RTT {} ns, BER {}",
                a.line_rate / 1e9,
                a.rtt * 1e9,
                sci(a.ber)
            ),
            &["frame_bits", "frame_id_bits", "checksum_bits", "hd", "mtbf_years"],
        );
        for r in analysis::width_table(a.line_rate, a.rtt, a.ber) {
            t.push(vec![
                r.frame_size_bits.to_string(),
                r.frame_id_bits.to_string(),
                r.checksum_bits.to_string(),
                r.hd.to_string(),
                sci(r.mtbf_years),
            ]);
        }
        out.push(t);
    }
    if a.table3 {
        let mut t = Table::new("Error-free efficiency", &["frame_bits", "efficiency"]);
        for (s, e) in analysis::efficiency_table() {
            t.push(vec![s.to_string(), e.to_string()]);
        }
        out.push(t);
    }
    if a.table4 {
        let data = analysis::dataword_bits(a.frame_size);
        let hd = analysis::crc_hd_bound(VERIFICATION_BITS, data);
        let mut t = Table::new(
            &format!("MTBF of {}-bit frames at {} Gbps", a.frame_size, a.line_rate / 1e9),
            &["ber", "mtbf_years"],
        );
        for (ber, y) in analysis::mtbf_table(&a.bers, a.frame_size, VERIFICATION_BITS, hd, a.line_rate) {
            t.push(vec![sci(ber), sci(y)]);
        }
        out.push(t);
    }
    if a.efficiency {
        let mut t = Table::new("Error-free efficiency", &["frame_bits", "efficiency"]);
        t.push(vec![
            a.frame_size.to_string(),
            analysis::eff_zero(a.frame_size, VERIFICATION_BITS).to_string(),
        ]);
        out.push(t);
    }
    if a.sizing {
        let s = analysis::sizing(a.line_rate, a.rtt);
        let mut t = Table::new(
            &format!("Buffer sizing for {} Gbps, RTT {} ns", a.line_rate / 1e9, a.rtt * 1e9),
            &["s_retrans_bits", "s_fc_bits", "thr_on_bits", "thr_off_bits"],
        );
        t.push(vec![
            s.s_retrans_bits.to_string(),
            s.s_fc_bits.to_string(),
            s.thr_on.to_string(),
            s.thr_off.to_string(),
        ]);
        out.push(t);
    }
    if out.is_empty() {
        bail!("choose at least one of --table2, --table3, --table4, --efficiency, --sizing");
    }
    Ok(out)
}
