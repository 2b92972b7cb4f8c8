//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::compare::{compare, Reference};
use crate::config::{preset, BackendKind, Overrides, RunConfig};
use crate::error::{CliError, Result};
use crate::run::solve;
use crate::study::noise_study;
use crate::sweep::{sweep, Axis};

#[derive(Debug, Parser)]
#[command(
    name = "fracvqa",
    version,
    about = "Variational time-marching of time-fractional PDEs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Exact,
    Sampled,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset, used when no config file is given.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output root; run directories are created beneath it.
    #[arg(long, env = "FRACVQA_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long)]
    pub shots: Option<u64>,
}

impl Common {
    pub fn load(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::load(path)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => {
                return Err(CliError::config(
                    "--config",
                    "either --config or --preset is required",
                ))
            }
        };
        let backend = self.backend.map(|b| match b {
            BackendArg::Exact => BackendKind::Exact,
            BackendArg::Sampled => BackendKind::Sampled,
        });
        Overrides {
            seed: self.seed,
            backend,
            shots: self.shots,
        }
        .apply(&mut cfg)?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// March one configuration and write its run directory.
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Solve once per value of one axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// alpha, layers, steps or nu.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Compare a run directory with the classical oracle or another run.
    Compare {
        /// Run directory to compare.
        run: PathBuf,
        /// Reference run directory; the classical oracle when omitted.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Directory for the report; the run directory when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a sampled run over seeded instances and summarise the noise.
    NoiseStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 40)]
        instances: usize,
    },
}

fn dispatch(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Solve { common } => {
            let cfg = common.load()?;
            let out = solve(&cfg, common.out.as_deref())?;
            let mut msg = format!("wrote {}", out.dir.display());
            for (h, rows) in out.histories().iter().zip(&out.metrics) {
                let mean =
                    rows.iter().map(|r| r.trace_error).sum::<f64>() / rows.len().max(1) as f64;
                msg.push_str(&format!("\n{}: mean trace error {mean:.3e}", h.field));
            }
            Ok(msg)
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let cfg = common.load()?;
            let axis: Axis = axis.parse()?;
            let (dir, rows) = sweep(&cfg, axis, &values, common.out.as_deref())?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            Ok(format!(
                "wrote {} ({} points, {failed} failed)",
                dir.join("summary.csv").display(),
                rows.len()
            ))
        }
        Command::Compare {
            run,
            reference,
            out,
        } => {
            let reference = reference.map_or(Reference::Classical, Reference::Run);
            let report = compare(&run, &reference, out.as_deref())?;
            let mut msg = format!("compared {} against {}", report.run, report.reference);
            for f in &report.fields {
                msg.push_str(&format!(
                    "\n{}: mean trace error {:.3e}",
                    f.field, f.trace_error.mean
                ));
            }
            Ok(msg)
        }
        Command::NoiseStudy { common, instances } => {
            let cfg = common.load()?;
            let (dir, s) = noise_study(&cfg, instances, common.out.as_deref())?;
            Ok(format!(
                "wrote {}\noverlap {:.4} (exact {:.4}), eta_O {:.4}, eta_H {:.4}, overlap share {:.4}",
                dir.display(),
                s.overlap.mean,
                s.overlap_exact.mean,
                s.eta_o,
                s.eta_h,
                s.budget.overlap_share()
            ))
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(msg) => {
            println!("{msg}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
