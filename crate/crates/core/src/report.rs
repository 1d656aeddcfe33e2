//! Result files: `summary.csv` and raw per-UE rates as JSON lines.

use std::io::{self, Write};

use serde::Serialize;

use crate::harness::{GainReport, RateDistribution};

pub const SUMMARY_HEADER: &str =
    "scenario_id,pooling,coordination,carrier_ghz,bs_density,ue_array,percentile,rate_bps,gain_pct,ci_pct,n_drops";

/// One row per (scenario, percentile). An undefined CI is an empty field.
pub fn write_summary_csv<W: Write>(reports: &[GainReport], mut w: W) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in reports {
        for e in &r.entries {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.scenario_id,
                r.pooling,
                r.coordination,
                r.carrier_ghz,
                r.bs_density,
                r.ue_array,
                e.percentile,
                e.scenario_bps,
                e.gain_pct,
                e.ci_pct.map_or_else(String::new, |c| c.to_string()),
                r.n_drops
            )?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RawLine<'a> {
    scenario_id: &'a str,
    drop: usize,
    ue: usize,
    rate_bps: f64,
}

/// One JSON object per UE and drop.
pub fn write_raw_jsonl<W: Write>(dist: &RateDistribution, mut w: W) -> io::Result<()> {
    for (drop, rates) in dist.per_drop.iter().enumerate() {
        for (ue, &rate_bps) in rates.iter().enumerate() {
            let line = RawLine { scenario_id: &dist.scenario.id, drop, ue, rate_bps };
            serde_json::to_writer(&mut w, &line)?;
            writeln!(w)?;
        }
    }
    Ok(())
}
