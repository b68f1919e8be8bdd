//! Report types and their CSV / JSON / plot-data serializations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::metrics::{mean, median, std_dev};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub experiment: String,
    pub method: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub noise: f64,
    pub trial: usize,
    pub seed: u64,
    /// α for ℓp-ℓq, λ for LASSO
    pub param: f64,
    /// None when the run failed or returned x* = 0.
    pub rel_l2_error: Option<f64>,
    pub support_recovered: f64,
    pub support_size: usize,
    pub outer_iters: usize,
    pub total_inner_iters: usize,
    pub wall_time: f64,
    pub converged: bool,
    pub violations: usize,
    pub decrease_violations: usize,
    pub config_hash: String,
    pub error: Option<String>,
}

pub const TRIAL_COLUMNS: [&str; 19] = [
    "experiment",
    "method",
    "p",
    "q",
    "noise",
    "trial",
    "seed",
    "param",
    "rel_l2_error",
    "support_recovered",
    "support_size",
    "outer_iters",
    "total_inner_iters",
    "wall_time",
    "converged",
    "violations",
    "decrease_violations",
    "config_hash",
    "error",
];

/// Mean held-out error at each grid value and the value kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRecord {
    pub method: String,
    pub noise: f64,
    pub grid: Vec<f64>,
    pub mean_errors: Vec<Option<f64>>,
    pub chosen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierRecord {
    pub seed: u64,
    pub positions: Vec<usize>,
}

/// One plot-data file: an integer index column followed by named series.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub configs: Vec<ExperimentConfig>,
    pub tuning: Vec<TuningRecord>,
    pub trials: Vec<TrialReport>,
    pub outliers: Vec<OutlierRecord>,
    #[serde(skip)]
    pub plots: Vec<PlotSeries>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

impl Report {
    /// Errors of one method at one noise level in trial order; failures as +∞.
    pub fn errors(&self, method: &str, noise: f64) -> Vec<f64> {
        let mut rows: Vec<&TrialReport> =
            self.trials.iter().filter(|t| t.method == method && t.noise == noise).collect();
        rows.sort_by_key(|t| t.trial);
        rows.iter().map(|t| t.rel_l2_error.unwrap_or(f64::INFINITY)).collect()
    }

    pub fn mean_error(&self, method: &str, noise: f64) -> f64 {
        mean(&self.errors(method, noise))
    }

    pub fn median_error(&self, method: &str, noise: f64) -> f64 {
        median(&self.errors(method, noise))
    }

    pub fn violations(&self) -> usize {
        self.trials.iter().map(|t| t.violations).sum()
    }

    pub fn decrease_violations(&self) -> usize {
        self.trials.iter().map(|t| t.decrease_violations).sum()
    }

    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| t.error.is_some()).count()
    }

    pub fn merge(&mut self, other: Report) {
        if self.experiment.is_empty() {
            self.experiment = other.experiment;
        }
        self.configs.extend(other.configs);
        self.tuning.extend(other.tuning);
        self.trials.extend(other.trials);
        self.outliers.extend(other.outliers);
        self.plots.extend(other.plots);
    }
}

pub fn write_trials_csv<W: Write>(w: W, trials: &[TrialReport]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(TRIAL_COLUMNS)?;
    for t in trials {
        out.serialize(t)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: std::io::Read>(r: R) -> Result<Vec<TrialReport>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "nan".into()
    }
}

/// Table-1 layout: one block per noise level with mean, std and tuned
/// parameter rows, then one row per trial labelled by its seed. Columns are
/// LASSO followed by each p. No timings, so the bytes depend only on the
/// config and seed.
pub fn write_table1_csv<W: Write>(w: W, report: &Report) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    let p_grid: Vec<f64> = report.configs.first().map(|c| c.p_grid.clone()).unwrap_or_default();
    let q = report.configs.first().map_or(2.0, |c| c.q);
    let methods: Vec<String> = std::iter::once("lasso".to_string())
        .chain(p_grid.iter().map(|p| crate::methods::Method::Lpq { p: *p, q }.label()))
        .collect();

    let mut header = vec!["noise".to_string(), "row".to_string(), "LASSO".to_string()];
    header.extend(p_grid.iter().map(|p| format!("p={p}")));
    out.write_record(&header)?;

    for cfg in &report.configs {
        let noise = cfg.noise.level();
        let errors: Vec<Vec<f64>> = methods.iter().map(|m| report.errors(m, noise)).collect();
        let row = |label: String, cells: Vec<String>| {
            let mut r = vec![noise.to_string(), label];
            r.extend(cells);
            r
        };
        out.write_record(row("mean".into(), errors.iter().map(|e| cell(mean(e))).collect()))?;
        out.write_record(row("std".into(), errors.iter().map(|e| cell(std_dev(e))).collect()))?;
        let params = methods
            .iter()
            .map(|m| {
                report
                    .tuning
                    .iter()
                    .find(|t| &t.method == m && t.noise == noise)
                    .map_or_else(String::new, |t| t.chosen.to_string())
            })
            .collect();
        out.write_record(row("param".into(), params))?;
        for trial in 0..cfg.trials {
            let seed = crate::instance::trial_seed(cfg, trial);
            let cells = errors.iter().map(|e| e.get(trial).map_or_else(String::new, |v| cell(*v))).collect();
            out.write_record(row(format!("seed={seed}"), cells))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_plotdata<W: Write>(mut w: W, series: &PlotSeries) -> Result<()> {
    writeln!(w, "# index {}", series.columns.join(" "))?;
    for (i, values) in &series.rows {
        write!(w, "{i}")?;
        for v in values {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let f = BufWriter::new(File::create(&path)?);
    Ok((path, f))
}

/// Writes the requested formats under `dir` and returns the files written.
///
/// csv: `trials.csv`, plus `table1.csv` for the table-1 experiment.
/// json: `report.json`. plotdata: one `<name>.plotdata` per series.
pub fn emit_report(report: &Report, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            Format::Csv => {
                let (path, f) = create(dir, "trials.csv")?;
                write_trials_csv(f, &report.trials)?;
                written.push(path);
                if report.experiment == "table1" {
                    let (path, f) = create(dir, "table1.csv")?;
                    write_table1_csv(f, report)?;
                    written.push(path);
                }
            }
            Format::Json => {
                let (path, mut f) = create(dir, "report.json")?;
                serde_json::to_writer_pretty(&mut f, report)?;
                writeln!(f)?;
                f.flush()?;
                written.push(path);
            }
            Format::Plotdata => {
                for series in &report.plots {
                    let (path, f) = create(dir, &format!("{}.plotdata", series.name))?;
                    write_plotdata(f, series)?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample_trial() -> TrialReport {
        TrialReport {
            experiment: "table1".into(),
            method: "l0.5-l2".into(),
            p: Some(0.5),
            q: Some(2.0),
            noise: 0.01,
            trial: 0,
            seed: 1,
            param: 0.01,
            rel_l2_error: Some(0.0171),
            support_recovered: 1.0,
            support_size: 50,
            outer_iters: 12,
            total_inner_iters: 340,
            wall_time: 0.25,
            converged: true,
            violations: 0,
            decrease_violations: 0,
            config_hash: "00ff".into(),
            error: None,
        }
    }

    #[test]
    fn csv_header_matches_serialized_fields() {
        let mut serde_buf = Vec::new();
        let mut w = csv::Writer::from_writer(&mut serde_buf);
        w.serialize(sample_trial()).unwrap();
        drop(w);
        let ours = {
            let mut buf = Vec::new();
            write_trials_csv(&mut buf, &[sample_trial()]).unwrap();
            buf
        };
        assert_eq!(ours, serde_buf);
    }

    #[test]
    fn csv_round_trip_keeps_missing_values() {
        let mut failed = sample_trial();
        failed.rel_l2_error = None;
        failed.p = None;
        failed.error = Some("boom".into());
        let rows = vec![sample_trial(), failed];
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_trials_csv(buf.as_slice()).unwrap(), rows);
    }
}
