//! Output files: the metrics CSV (fixed column order), the trial-mean CSV,
//! bound-report rows, the key-value bound text block, the run manifest, and
//! optional full-state snapshot CSVs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::analysis::{BoundReport, MetricsRecord};
use crate::error::Result;
use crate::linalg::Mat;

use super::RunManifest;

pub const CSV_HEADER: &str =
    "trial,k,method,alpha_k,loss,opt_gap_mean,opt_gap_nodes,stationary_gap_avg,consensus_err,tracking_err";

/// Shortest round-trip decimal form (stable across runs).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Buffered writer for the fixed-schema metrics CSV.
pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{CSV_HEADER}")?;
        Ok(CsvWriter { out })
    }

    pub fn write_records(&mut self, trial: &str, method: &str, records: &[MetricsRecord]) -> Result<()> {
        for r in records {
            writeln!(
                self.out,
                "{trial},{},{method},{},{},{},{},{},{},{}",
                r.k,
                fmt_f64(r.alpha_k),
                fmt_f64(r.loss),
                fmt_opt(r.opt_gap_mean),
                fmt_opt(r.opt_gap_nodes),
                fmt_f64(r.stationary_gap_avg),
                fmt_opt(r.consensus_err),
                fmt_opt(r.tracking_err),
            )?;
        }
        Ok(())
    }

    pub fn write_raw(&mut self, line: &str) -> Result<()> {
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// One bound-report row for the metrics CSV.
pub fn bound_row(r: &BoundReport) -> String {
    format!(
        "kind=bound,name={},value={},measured={},margin={},pass={}",
        r.name,
        fmt_f64(r.value),
        fmt_f64(r.measured),
        fmt_f64(r.margin),
        r.pass
    )
}

/// Key-value text block with the bound verdicts, rate fits, and notes.
pub fn write_bounds_txt(
    path: &Path,
    reports: &[BoundReport],
    rate_fits: &[(String, Option<f64>)],
    notes: &[String],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in reports {
        writeln!(
            out,
            "bound.{} value={} measured={} stderr={} margin={} pass={}{}{}",
            r.name,
            fmt_f64(r.value),
            fmt_f64(r.measured),
            fmt_f64(r.stderr),
            fmt_f64(r.margin),
            r.pass,
            if r.low_confidence { " low_confidence=true" } else { "" },
            if r.note.is_empty() { String::new() } else { format!(" note={:?}", r.note) },
        )?;
    }
    for (label, slope) in rate_fits {
        match slope {
            Some(s) => writeln!(out, "rate_fit.{label} slope={}", fmt_f64(*s))?,
            None => writeln!(out, "rate_fit.{label} slope=unavailable")?,
        }
    }
    for n in notes {
        writeln!(out, "note {n}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| crate::error::Error::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Dense per-stride state snapshots: one `k,node,coord...` row per node.
pub fn write_state_snapshots(dir: &Path, combo: &str, snapshots: &[(u64, Mat)]) -> Result<()> {
    if snapshots.is_empty() {
        return Ok(());
    }
    let safe: String = combo.chars().map(|c| if c.is_alphanumeric() { c } else { '_' }).collect();
    let mut out = BufWriter::new(File::create(dir.join(format!("{safe}_trial0.csv")))?);
    for (k, x) in snapshots {
        for i in 0..x.rows() {
            let row: Vec<String> = x.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{k},{i},{}", row.join(","))?;
        }
    }
    out.flush()?;
    Ok(())
}
