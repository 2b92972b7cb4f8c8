//! The `compare` command: reload a run directory and compare it with the
//! classical oracle or with another run.

use std::fs;
use std::path::{Path, PathBuf};

use fracvqa::classical::{norm, relative_deviation, trace_error, Field};
use fracvqa::vqa::SolutionHistory;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::run::{classical_fields, write_csv, write_json, HistoryLine, HISTORY, MANIFEST};
use crate::sweep::mean_std;

#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub histories: Vec<SolutionHistory>,
}

/// Reads the manifest and history of a run directory.
pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let config = RunConfig::load(&dir.join(MANIFEST))?;
    let spec = config.spec()?;
    let path = dir.join(HISTORY);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut histories: Vec<SolutionHistory> = Vec::new();
    for (n, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let parsed: HistoryLine = serde_json::from_str(line).map_err(|e| CliError::Read {
            path: path.clone(),
            message: format!("line {}: {e}", n + 1),
        })?;
        match histories.iter_mut().find(|h| h.field == parsed.field) {
            Some(h) => h.records.push(parsed.record),
            None => histories.push(SolutionHistory {
                field: parsed.field,
                spec,
                // The k = 0 cost holds the squared fit residual.
                encoding_residual: parsed.record.cost.max(0.0).sqrt(),
                records: vec![parsed.record],
            }),
        }
    }
    for h in &histories {
        if h.records.iter().enumerate().any(|(i, r)| r.k != i) {
            return Err(CliError::Read {
                path: path.clone(),
                message: format!("steps of field {} are not contiguous", h.field),
            });
        }
    }
    Ok(LoadedRun {
        dir: dir.to_path_buf(),
        config,
        histories,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Classical,
    Run(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
}

impl Stats {
    fn of(v: &[f64]) -> Self {
        let (mean, std) = mean_std(v);
        Self {
            mean,
            std,
            max: v.iter().cloned().fold(f64::NAN, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldComparison {
    pub field: String,
    /// Over steps `1..`.
    pub trace_error: Stats,
    pub trace_error_series: Vec<f64>,
    /// `|r / r_ref|` for steps `1..`.
    pub norm_fidelity: Vec<f64>,
    pub max_relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub run: String,
    pub reference: String,
    pub fields: Vec<FieldComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub field: String,
    pub k: usize,
    pub i: usize,
    pub relative_deviation: f64,
}

/// Reference values and norms of one field, step by step.
fn reference_columns(
    reference: &Reference,
    run: &LoadedRun,
) -> Result<(String, Vec<Vec<Vec<f64>>>)> {
    match reference {
        Reference::Classical => {
            let fields: Vec<Field> = classical_fields(&run.config.problem)?;
            Ok((
                "classical".into(),
                fields.into_iter().map(|f| f.values).collect(),
            ))
        }
        Reference::Run(dir) => {
            let other = load_run(dir)?;
            if other.config.problem.domain() != run.config.problem.domain() {
                return Err(CliError::Mismatch("the runs use different domains".into()));
            }
            let names = |r: &LoadedRun| {
                r.histories
                    .iter()
                    .map(|h| h.field.clone())
                    .collect::<Vec<_>>()
            };
            if names(&other) != names(run) {
                return Err(CliError::Mismatch("the runs march different fields".into()));
            }
            let cols = other
                .histories
                .iter()
                .map(|h| {
                    (0..h.records.len())
                        .map(|k| h.values(k))
                        .collect::<fracvqa::Result<Vec<_>>>()
                })
                .collect::<fracvqa::Result<Vec<_>>>()?;
            Ok((dir.display().to_string(), cols))
        }
    }
}

/// Writes `compare.json` and `heatmap.csv` into `out` (the run directory by
/// default).
pub fn compare(run_dir: &Path, reference: &Reference, out: Option<&Path>) -> Result<CompareReport> {
    let run = load_run(run_dir)?;
    let (label, refs) = reference_columns(reference, &run)?;
    let mut fields = Vec::new();
    let mut heat = Vec::new();
    for (h, cols) in run.histories.iter().zip(&refs) {
        let steps = h.steps().min(cols.len().saturating_sub(1));
        let (mut errs, mut fid) = (Vec::new(), Vec::new());
        let mut max_dev = 0.0f64;
        for k in 0..=steps {
            let values = h.values(k)?;
            let dev = relative_deviation(&values, &cols[k])?;
            for (i, d) in dev.iter().enumerate() {
                max_dev = max_dev.max(*d);
                heat.push(HeatmapRow {
                    field: h.field.clone(),
                    k,
                    i: i + 1,
                    relative_deviation: *d,
                });
            }
            if k > 0 {
                errs.push(trace_error(&h.state(k)?, &cols[k])?);
                fid.push((h.records[k].r / norm(&cols[k])).abs());
            }
        }
        fields.push(FieldComparison {
            field: h.field.clone(),
            trace_error: Stats::of(&errs),
            trace_error_series: errs,
            norm_fidelity: fid,
            max_relative_deviation: max_dev,
        });
    }
    let report = CompareReport {
        run: run.config.name.clone(),
        reference: label,
        fields,
    };
    let dir = out.unwrap_or(run_dir);
    crate::run::create_dir(dir)?;
    write_json(&dir.join("compare.json"), &report)?;
    write_csv(&dir.join("heatmap.csv"), &heat)?;
    Ok(report)
}
