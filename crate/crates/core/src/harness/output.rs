use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::{TrialRecord, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::precoders::Scheme;

pub const RECORD_COLUMNS: [&str; 8] = [
    "scheme",
    "sweep_name",
    "sweep_value",
    "trial",
    "sum_rate_bpshz",
    "b_total",
    "power_w",
    "ee_bpshz_per_w",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Mean and standard error (`s/√n`) of a sample; the error is absent below two
/// values and both are absent for an empty sample.
pub fn mean_stderr(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (Some(mean), Some((var / n as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub sweep_name: String,
    pub sweep_value: f64,
    pub count: usize,
    pub flagged: usize,
    pub sum_rate_mean: Option<f64>,
    pub sum_rate_stderr: Option<f64>,
    pub ee_mean: Option<f64>,
    pub ee_stderr: Option<f64>,
    pub power_w_mean: Option<f64>,
    pub b_total_mean: Option<f64>,
}

/// Per (sweep point, scheme) statistics over unflagged records, in order of
/// first appearance.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<(usize, Scheme)> = Vec::new();
    let mut groups: HashMap<(usize, Scheme), Vec<&TrialRecord>> = HashMap::new();
    for r in records {
        let key = (r.sweep_index, r.scheme);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let group = &groups[&key];
            let ok: Vec<&&TrialRecord> = group.iter().filter(|r| !r.is_flagged()).collect();
            let pick = |f: fn(&TrialRecord) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let (sum_rate_mean, sum_rate_stderr) = mean_stderr(&pick(|r| r.sum_rate_bpshz));
            let (ee_mean, ee_stderr) = mean_stderr(&pick(|r| r.ee_bpshz_per_w));
            SummaryRow {
                scheme: key.1,
                sweep_name: group[0].sweep_name.clone(),
                sweep_value: group[0].sweep_value,
                count: ok.len(),
                flagged: group.len() - ok.len(),
                sum_rate_mean,
                sum_rate_stderr,
                ee_mean,
                ee_stderr,
                power_w_mean: mean_stderr(&pick(|r| r.power_w)).0,
                b_total_mean: mean_stderr(&pick(|r| r.b_total.map(|b| b as f64))).0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub rng: String,
    pub seed: u64,
    pub version: String,
    pub config: ExperimentConfig,
}

impl RunMetadata {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            rng: RNG_ALGORITHM.to_string(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub metadata: RunMetadata,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the records CSV (header always present) to any writer.
pub fn write_records_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.scheme.name().to_string(),
            r.sweep_name.clone(),
            r.sweep_value.to_string(),
            r.trial.to_string(),
            opt(r.sum_rate_bpshz),
            opt(r.b_total),
            opt(r.power_w),
            opt(r.ee_bpshz_per_w),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "sweep_name",
        "sweep_value",
        "count",
        "flagged",
        "sum_rate_mean",
        "sum_rate_stderr",
        "ee_mean",
        "ee_stderr",
        "power_w_mean",
        "b_total_mean",
    ])?;
    for r in rows {
        w.write_record([
            r.scheme.name().to_string(),
            r.sweep_name.clone(),
            r.sweep_value.to_string(),
            r.count.to_string(),
            r.flagged.to_string(),
            opt(r.sum_rate_mean),
            opt(r.sum_rate_stderr),
            opt(r.ee_mean),
            opt(r.ee_stderr),
            opt(r.power_w_mean),
            opt(r.b_total_mean),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes trial records: CSV rows, or JSON with metadata and the summary.
pub fn emit(records: &[TrialRecord], config: &ExperimentConfig, format: Format, path: &Path) -> Result<()> {
    let mut file = create(path)?;
    match format {
        Format::Csv => write_records_csv(records, &mut file)?,
        Format::Json => {
            let out = RunOutput {
                metadata: RunMetadata::new(config),
                records: records.to_vec(),
                summary: summarize(records),
            };
            serde_json::to_writer_pretty(&mut file, &out)?;
            file.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    file.flush().map_err(|e| Error::io(path, e))
}

pub fn emit_summary(rows: &[SummaryRow], format: Format, path: &Path) -> Result<()> {
    let mut file = create(path)?;
    match format {
        Format::Csv => write_summary_csv(rows, &mut file)?,
        Format::Json => serde_json::to_writer_pretty(&mut file, rows)?,
    }
    file.flush().map_err(|e| Error::io(path, e))
}
