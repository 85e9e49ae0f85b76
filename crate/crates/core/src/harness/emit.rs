//! CSV and JSON Lines output with fixed field order, and a JSONL reader.

use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::capacity::{EnergyEstimate, Growth};
use crate::error::{Error, Result};

use super::sweep::{SweepCell, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Jsonl,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            "json" => Ok(Self::Json),
            _ => Err(Error::Parse(format!("unknown format `{s}` (csv, jsonl, json)"))),
        }
    }
}

/// One JSON object per line.
pub fn write_jsonl<T: Serialize>(records: &[T], out: &mut dyn Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Records of a JSON Lines stream; blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(input: impl BufRead) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// CSV with an explicit header, so an empty table still has one.
pub fn write_csv<T: Serialize>(header: &[&str], rows: &[T], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const SWEEP_HEADER: [&str; 9] = ["c", "n", "exact", "mc_mean", "mc_se", "trials", "seed", "trial_lo", "trial_hi"];

/// Sweep cells as CSV or JSONL; `Json` writes the whole result.
pub fn emit_sweep(result: &SweepResult, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => write_csv(&SWEEP_HEADER, &result.cells, out),
        Format::Jsonl => write_jsonl::<SweepCell>(&result.cells, out),
        Format::Json => write_json(result, out),
    }
}

/// Pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub truncation: u64,
    pub energy_log: f64,
    pub lower_log: f64,
    pub upper_log: f64,
    pub verdict: String,
}

pub const CAPACITY_HEADER: [&str; 5] = ["truncation", "energy_log", "lower_log", "upper_log", "verdict"];

/// One row per truncation, each tagged with the ladder's growth verdict.
pub fn capacity_rows(ladder: &[EnergyEstimate], growth: Growth) -> Vec<CapacityRow> {
    ladder
        .iter()
        .map(|e| CapacityRow {
            truncation: e.truncation,
            energy_log: e.log_value,
            lower_log: e.lower_log,
            upper_log: e.upper_log,
            verdict: growth.to_string(),
        })
        .collect()
}
