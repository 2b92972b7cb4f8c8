//! The `sweep` command: one solve per axis value, run in parallel.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use fracvqa::models::Problem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::run::{create_dir, solve, write_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Alpha,
    Layers,
    Steps,
    Nu,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Axis::Alpha),
            "layers" => Ok(Axis::Layers),
            "steps" | "m" | "M" => Ok(Axis::Steps),
            "nu" => Ok(Axis::Nu),
            other => Err(CliError::config(
                "axis",
                format!("`{other}` is not one of alpha, layers, steps, nu"),
            )),
        }
    }
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Alpha => "alpha",
            Axis::Layers => "layers",
            Axis::Steps => "steps",
            Axis::Nu => "nu",
        }
    }

    /// Copy of `cfg` with the axis set to `value`.
    pub fn apply(self, cfg: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut out = cfg.clone();
        out.name = format!("{}_{}", self.name(), value);
        let count = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(CliError::config(
                    self.name(),
                    format!("{value} is not a positive integer"),
                ))
            }
        };
        match (self, &mut out.problem) {
            (Axis::Alpha, Problem::Subdiffusion(p)) => p.alpha = value,
            (Axis::Alpha, Problem::Burgers(p)) => p.alpha = value,
            (Axis::Alpha, Problem::Seir(p)) => p.alphas = [value; 4],
            (Axis::Nu, Problem::Burgers(p)) => p.nu = value,
            (Axis::Nu, _) => {
                return Err(CliError::config("axis", "nu sweeps need a Burgers problem"))
            }
            (Axis::Layers, _) => out.ansatz.layers = count()?,
            (Axis::Steps, Problem::Subdiffusion(p)) => p.domain.steps = count()?,
            (Axis::Steps, Problem::Burgers(p)) => p.domain.steps = count()?,
            (Axis::Steps, Problem::Seir(p)) => p.domain.steps = count()?,
        }
        out.validate()?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean_trace_error: f64,
    pub std_trace_error: f64,
    pub total_n_eval: usize,
    pub max_trace_error: f64,
    /// `ok`, or the failure message.
    pub status: String,
}

/// Population mean and standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn sweep_dir(cfg: &RunConfig, axis: Axis, root: Option<&Path>) -> PathBuf {
    cfg.run_dir(root)
        .with_file_name(format!("{}-sweep-{}", cfg.name, axis.name()))
}

/// Solves every point and writes `summary.csv`; failed points are recorded
/// and the sweep continues.
pub fn sweep(
    cfg: &RunConfig,
    axis: Axis,
    values: &[f64],
    root: Option<&Path>,
) -> Result<(PathBuf, Vec<SweepRow>)> {
    if values.is_empty() {
        return Err(CliError::config(
            "values",
            "at least one sweep value is required",
        ));
    }
    let points: Vec<RunConfig> = values
        .iter()
        .map(|&v| axis.apply(cfg, v))
        .collect::<Result<_>>()?;
    let dir = sweep_dir(cfg, axis, root);
    create_dir(&dir)?;
    let rows: Vec<SweepRow> = points
        .par_iter()
        .zip(values.par_iter())
        .map(|(point, &value)| {
            let failed = |status: String| SweepRow {
                value,
                mean_trace_error: f64::NAN,
                std_trace_error: f64::NAN,
                total_n_eval: 0,
                max_trace_error: f64::NAN,
                status,
            };
            match solve(point, Some(&dir)) {
                Ok(out) => {
                    let errs: Vec<f64> = out
                        .metrics
                        .iter()
                        .flatten()
                        .map(|m| m.trace_error)
                        .collect();
                    let (mean, std) = mean_std(&errs);
                    SweepRow {
                        value,
                        mean_trace_error: mean,
                        std_trace_error: std,
                        total_n_eval: out.histories().iter().map(|h| h.total_evaluations()).sum(),
                        max_trace_error: errs.iter().cloned().fold(0.0, f64::max),
                        status: "ok".into(),
                    }
                }
                Err(e) => failed(e.to_string()),
            }
        })
        .collect();
    write_csv(&dir.join("summary.csv"), &rows)?;
    Ok((dir, rows))
}
