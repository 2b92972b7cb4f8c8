//! The `noise-study` command: repeated noisy marches of a single-field
//! problem, comparing measured overlaps and energies with their exact values.

use std::path::{Path, PathBuf};

use fracvqa::classical::{norm_fidelity, trace_error};
use fracvqa::measurement::{decompose, Backend, Encoded, Estimator};
use fracvqa::models::Problem;
use fracvqa::noise::{error_budget, NoiseErrorBudget};
use fracvqa::vqa::time_march;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BackendKind, RunConfig};
use crate::error::{CliError, Result};
use crate::run::{classical_fields, create_dir, write_csv, write_json, write_text, MANIFEST};
use crate::sweep::mean_std;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance: usize,
    pub k: usize,
    /// Measured `<u^k, u^{k-1}>`.
    pub overlap: f64,
    pub overlap_exact: f64,
    /// Measured `<u^k|A|u^k>`.
    pub hamiltonian: f64,
    pub hamiltonian_exact: f64,
    pub norm_fidelity: f64,
    pub trace_error: f64,
    /// Four standard deviations of the shot noise of the overlap estimate.
    pub overlap_band: f64,
    /// Four standard deviations of the shot noise of the energy estimate.
    pub hamiltonian_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(v: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = v.collect();
        let (mean, std) = mean_std(&v);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub instances: usize,
    pub failed_instances: Vec<usize>,
    pub overlap: MeanStd,
    pub overlap_exact: MeanStd,
    pub hamiltonian: MeanStd,
    pub hamiltonian_exact: MeanStd,
    pub norm_fidelity: MeanStd,
    pub trace_error: MeanStd,
    /// `|mean measured - mean exact| / |mean exact|` of the overlaps.
    pub eta_o: f64,
    /// The same ratio for the energies.
    pub eta_h: f64,
    pub budget: NoiseErrorBudget,
}

fn instance_config(cfg: &RunConfig, i: usize) -> RunConfig {
    let mut c = cfg.clone();
    c.seed = cfg.seed.wrapping_add(i as u64);
    c
}

/// Marches one instance and measures each step against its predecessor.
pub fn run_instance(cfg: &RunConfig, instance: usize) -> Result<Vec<InstanceRecord>> {
    let cfg = instance_config(cfg, instance);
    let matrix = match &cfg.problem {
        Problem::Subdiffusion(p) => p.matrix()?,
        Problem::Burgers(p) => p.matrix()?,
        Problem::Seir(_) => {
            return Err(CliError::config(
                "problem",
                "the noise study needs a single-field problem",
            ))
        }
    };
    let shots = match cfg.backend()? {
        Backend::Sampled(s) => s.shots as f64,
        Backend::Exact => {
            return Err(CliError::config(
                "backend.kind",
                "the noise study needs the sampled backend",
            ))
        }
    };
    let classical = classical_fields(&cfg.problem)?.remove(0);
    let reset = cfg
        .march
        .norm_reset
        .then(|| vec![(0..=classical.steps()).map(|k| classical.norm(k)).collect()]);
    let est = Estimator::new(cfg.backend()?)?;
    let outcome = time_march(
        &cfg.problem,
        cfg.spec()?,
        &cfg.march.resolve(cfg.seed, reset),
        &est,
    )?;
    if let Some(f) = outcome.failure {
        return Err(CliError::Partial {
            k: f.k,
            field: f.field,
            message: f.message,
        });
    }
    let h = &outcome.histories[0];
    let exact = Estimator::exact();
    let spec = cfg.spec()?;
    let (_, terms) = decompose(&matrix);
    let h_scale = matrix.b() + terms.iter().map(|t| t.coeff.abs()).sum::<f64>();
    let mut out = Vec::new();
    for k in 1..=h.steps() {
        let u = Encoded::new(spec, h.records[k].theta.clone())?;
        let prev = Encoded::new(spec, h.records[k - 1].theta.clone())?;
        out.push(InstanceRecord {
            instance,
            k,
            overlap: est.overlap(&u, &prev)?,
            overlap_exact: exact.overlap(&u, &prev)?,
            hamiltonian: est.expect_hamiltonian(&u, &matrix)?,
            hamiltonian_exact: exact.expect_hamiltonian(&u, &matrix)?,
            norm_fidelity: norm_fidelity(h.records[k].r_measured, classical.norm(k))?,
            trace_error: trace_error(u.amplitudes(), classical.column(k))?,
            overlap_band: 4.0 / shots.sqrt(),
            hamiltonian_band: 4.0 * h_scale / shots.sqrt(),
        });
    }
    Ok(out)
}

fn relative_gap(measured: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        0.0
    } else {
        ((measured - exact) / exact).abs()
    }
}

pub fn summarize(
    records: &[InstanceRecord],
    instances: usize,
    failed: Vec<usize>,
) -> Result<StudySummary> {
    let stat = |f: fn(&InstanceRecord) -> f64| MeanStd::of(records.iter().map(f));
    let overlap = stat(|r| r.overlap);
    let overlap_exact = stat(|r| r.overlap_exact);
    let hamiltonian = stat(|r| r.hamiltonian);
    let hamiltonian_exact = stat(|r| r.hamiltonian_exact);
    let eta_o = relative_gap(overlap.mean, overlap_exact.mean);
    let eta_h = relative_gap(hamiltonian.mean, hamiltonian_exact.mean);
    Ok(StudySummary {
        instances,
        failed_instances: failed,
        overlap,
        overlap_exact,
        hamiltonian,
        hamiltonian_exact,
        norm_fidelity: stat(|r| r.norm_fidelity),
        trace_error: stat(|r| r.trace_error),
        eta_o,
        eta_h,
        budget: error_budget(eta_o, eta_h)?,
    })
}

pub fn study_dir(cfg: &RunConfig, root: Option<&Path>) -> PathBuf {
    cfg.run_dir(root)
        .with_file_name(format!("{}-noise-study", cfg.name))
}

/// Runs `instances` seeded instances in parallel and writes `study.csv` and
/// `summary.json`.
pub fn noise_study(
    cfg: &RunConfig,
    instances: usize,
    root: Option<&Path>,
) -> Result<(PathBuf, StudySummary)> {
    cfg.validate()?;
    if cfg.backend.kind != BackendKind::Sampled {
        return Err(CliError::config(
            "backend.kind",
            "the noise study needs the sampled backend",
        ));
    }
    if instances == 0 {
        return Err(CliError::config(
            "instances",
            "at least one instance is required",
        ));
    }
    let results: Vec<Result<Vec<InstanceRecord>>> = (0..instances)
        .into_par_iter()
        .map(|i| run_instance(cfg, i))
        .collect();
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rs) => records.extend(rs),
            Err(CliError::Partial { .. }) => failed.push(i),
            Err(e) => return Err(e),
        }
    }
    let summary = summarize(&records, instances, failed)?;
    let dir = study_dir(cfg, root);
    create_dir(&dir)?;
    write_text(&dir.join(MANIFEST), &cfg.to_toml()?)?;
    write_csv(&dir.join("study.csv"), &records)?;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok((dir, summary))
}
