//! The `solve` command: march a configured problem and persist the run
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use fracvqa::classical::{
    classical_burgers, classical_seir, classical_subdiffusion, norm_fidelity, relative_deviation,
    trace_error, Field,
};
use fracvqa::measurement::Estimator;
use fracvqa::models::Problem;
use fracvqa::vqa::{time_march, MarchOutcome, SolutionHistory, StepRecord};
use serde::{Deserialize, Serialize};

use crate::config::{Provenance, RunConfig};
use crate::error::{CliError, Result};
use crate::svg;

pub const MANIFEST: &str = "manifest.toml";
pub const HISTORY: &str = "history.jsonl";
pub const FAILURE_MARKER: &str = "FAILED";

/// Classical reference fields in the same order as the marched fields.
pub fn classical_fields(problem: &Problem) -> Result<Vec<Field>> {
    Ok(match problem {
        Problem::Subdiffusion(p) => vec![classical_subdiffusion(p)?],
        Problem::Burgers(p) => vec![classical_burgers(p)?],
        Problem::Seir(p) => classical_seir(p)?.into_iter().collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub k: usize,
    pub trace_error: f64,
    pub norm_fidelity: f64,
    pub n_eval: usize,
    pub n_iter: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub k: usize,
    pub t: f64,
    pub i: usize,
    pub x: f64,
    pub u_quantum: f64,
    pub u_classical: f64,
    pub relative_deviation: f64,
}

/// Per-step metrics of marched steps `1..`.
pub fn metric_rows(history: &SolutionHistory, classical: &Field) -> Result<Vec<MetricRow>> {
    history.records[1..]
        .iter()
        .map(|rec| {
            Ok(MetricRow {
                k: rec.k,
                trace_error: trace_error(&history.state(rec.k)?, classical.column(rec.k))?,
                norm_fidelity: norm_fidelity(rec.r, classical.norm(rec.k))?,
                n_eval: rec.n_eval,
                n_iter: rec.n_iter,
                cost: rec.cost,
            })
        })
        .collect()
}

pub fn solution_rows(history: &SolutionHistory, classical: &Field) -> Result<Vec<SolutionRow>> {
    let domain = classical.domain;
    let nodes = domain.nodes();
    let mut rows = Vec::new();
    for rec in &history.records {
        let q = history.values(rec.k)?;
        let c = classical.column(rec.k);
        let dev = relative_deviation(&q, c)?;
        for i in 0..q.len() {
            rows.push(SolutionRow {
                k: rec.k,
                t: domain.time(rec.k),
                i: i + 1,
                x: nodes[i],
                u_quantum: q[i],
                u_classical: c[i],
                relative_deviation: dev[i],
            });
        }
    }
    Ok(rows)
}

/// One line of `history.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryLine {
    pub field: String,
    #[serde(flatten)]
    pub record: StepRecord,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let write = || -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_path(path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| CliError::Write {
        path: path.into(),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Write {
        path: path.into(),
        message: e.to_string(),
    })?;
    write_text(path, &(text + "\n"))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// File name of a per-field artifact; single-field runs drop the suffix.
fn field_file(stem: &str, field: &str, n_fields: usize, ext: &str) -> String {
    if n_fields == 1 {
        format!("{stem}.{ext}")
    } else {
        format!("{stem}_{field}.{ext}")
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dir: PathBuf,
    pub outcome: MarchOutcome,
    pub classical: Vec<Field>,
    /// Per-field metrics, in field order.
    pub metrics: Vec<Vec<MetricRow>>,
}

impl RunOutput {
    pub fn histories(&self) -> &[SolutionHistory] {
        &self.outcome.histories
    }
}

/// Marches `cfg` without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<(MarchOutcome, Vec<Field>)> {
    cfg.validate()?;
    let classical = classical_fields(&cfg.problem)?;
    let reset = cfg.march.norm_reset.then(|| {
        classical
            .iter()
            .map(|f| (0..=f.steps()).map(|k| f.norm(k)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    });
    let march = cfg.march.resolve(cfg.seed, reset);
    let est = Estimator::new(cfg.backend()?)?;
    let outcome = time_march(&cfg.problem, cfg.spec()?, &march, &est)?;
    Ok((outcome, classical))
}

/// Runs `cfg` into `<root>/<name>`. Partial runs keep their artifacts, gain a
/// failure marker and return [`CliError::Partial`].
pub fn solve(cfg: &RunConfig, root: Option<&Path>) -> Result<RunOutput> {
    let (outcome, classical) = execute(cfg)?;
    persist(cfg, root, outcome, classical)
}

/// Writes the run directory of a finished or failed march.
fn persist(
    cfg: &RunConfig,
    root: Option<&Path>,
    outcome: MarchOutcome,
    classical: Vec<Field>,
) -> Result<RunOutput> {
    let dir = cfg.run_dir(root);
    create_dir(&dir)?;
    let marker = dir.join(FAILURE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| CliError::io(&marker, e))?;
    }
    let mut manifest = cfg.clone();
    manifest.provenance = Some(Provenance::current());
    write_text(&dir.join(MANIFEST), &manifest.to_toml()?)?;

    let mut lines = String::new();
    for h in &outcome.histories {
        for rec in &h.records {
            let line = HistoryLine {
                field: h.field.clone(),
                record: rec.clone(),
            };
            lines.push_str(&serde_json::to_string(&line).map_err(|e| CliError::Write {
                path: dir.join(HISTORY),
                message: e.to_string(),
            })?);
            lines.push('\n');
        }
    }
    write_text(&dir.join(HISTORY), &lines)?;

    let n_fields = outcome.histories.len();
    let mut metrics = Vec::with_capacity(n_fields);
    for (h, c) in outcome.histories.iter().zip(&classical) {
        let rows = metric_rows(h, c)?;
        write_csv(
            &dir.join(field_file("solution", &h.field, n_fields, "csv")),
            &solution_rows(h, c)?,
        )?;
        write_csv(
            &dir.join(field_file("metrics", &h.field, n_fields, "csv")),
            &rows,
        )?;
        if cfg.output.svg {
            let xs: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
            let ys: Vec<f64> = rows.iter().map(|r| r.trace_error).collect();
            let plot = svg::line_plot(
                &format!("{} trace error ({})", cfg.name, h.field),
                "k",
                &xs,
                &ys,
            );
            write_text(
                &dir.join(field_file("metrics", &h.field, n_fields, "svg")),
                &plot,
            )?;
        }
        metrics.push(rows);
    }
    let out = RunOutput {
        dir,
        outcome,
        classical,
        metrics,
    };
    if let Some(f) = &out.outcome.failure {
        write_text(
            &marker,
            &format!("step {} field {}: {}\n", f.k, f.field, f.message),
        )?;
        return Err(CliError::Partial {
            k: f.k,
            field: f.field.clone(),
            message: f.message.clone(),
        });
    }
    Ok(out)
}
