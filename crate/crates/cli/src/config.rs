//! Run configuration: TOML schema, named presets and command-line overrides.

use std::path::{Path, PathBuf};

use fracvqa::fractional::Boundary;
use fracvqa::measurement::{Backend, SamplingConfig};
use fracvqa::models::{BurgersProblem, Domain, Problem, SeirProblem, SubdiffusionProblem};
use fracvqa::noise::NoiseConfig;
use fracvqa::statevector::{AnsatzSpec, Topology};
use fracvqa::vqa::{EncodingConfig, GradientMethod, MarchConfig, OptimizerConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub shots: u64,
    /// Name of a noise preset.
    pub noise: String,
    pub trajectories: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Exact,
            shots: 10_000,
            noise: "none".into(),
            trajectories: 100,
        }
    }
}

impl BackendConfig {
    pub fn resolve(&self, seed: u64) -> Result<Backend> {
        match self.kind {
            BackendKind::Exact => Ok(Backend::Exact),
            BackendKind::Sampled => {
                let noise = NoiseConfig::preset(&self.noise)
                    .map_err(|e| CliError::config("backend.noise", e.to_string()))?;
                let cfg = SamplingConfig {
                    shots: self.shots,
                    seed,
                    noise,
                    trajectories: self.trajectories,
                };
                cfg.validate()
                    .map_err(|e| CliError::config("backend", e.to_string()))?;
                Ok(Backend::Sampled(cfg))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarchSettings {
    pub optimizer: OptimizerConfig,
    pub gradient: GradientMethod,
    pub warm_start: bool,
    pub encoding: EncodingConfig,
    pub step_restarts: usize,
    pub restart_spread: f64,
    /// Substitute the classical norm after every step.
    pub norm_reset: bool,
}

impl Default for MarchSettings {
    fn default() -> Self {
        let m = MarchConfig::default();
        Self {
            optimizer: m.optimizer,
            gradient: m.gradient,
            warm_start: m.warm_start,
            encoding: m.encoding,
            step_restarts: m.step_restarts,
            restart_spread: m.restart_spread,
            norm_reset: false,
        }
    }
}

impl MarchSettings {
    /// Parameter-shift gradients, tight tolerances and multi-start steps.
    pub fn precise(step_restarts: usize) -> Self {
        Self {
            optimizer: OptimizerConfig {
                ftol: 1e-12,
                gtol: 1e-8,
                ..OptimizerConfig::quasi_newton()
            },
            gradient: GradientMethod::ParameterShift,
            step_restarts,
            restart_spread: 1.5,
            ..Self::default()
        }
    }

    /// Core march configuration with every seed derived from `seed`.
    pub fn resolve(&self, seed: u64, reset_norms: Option<Vec<Vec<f64>>>) -> MarchConfig {
        let mut optimizer = self.optimizer;
        optimizer.seed = seed;
        let mut encoding = self.encoding;
        encoding.seed = seed;
        MarchConfig {
            optimizer,
            gradient: self.gradient,
            warm_start: self.warm_start,
            encoding,
            reset_norms,
            step_restarts: self.step_restarts,
            restart_spread: self.restart_spread,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub n_qubits: usize,
    pub layers: usize,
    pub topology: Topology,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output root; the run directory is `<dir>/<name>`.
    pub dir: Option<PathBuf>,
    /// Emit an SVG line plot of the trace error.
    pub svg: bool,
}

/// Written into manifests; ignored when a manifest is read back as a config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub package: String,
    pub version: String,
}

impl Provenance {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub seed: u64,
    pub problem: Problem,
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub march: MarchSettings,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

pub const PRESETS: [&str; 8] = [
    "subdiffusion-alpha1",
    "subdiffusion-alpha05",
    "burgers-alpha1",
    "burgers-alpha08",
    "burgers-alpha06",
    "seir",
    "seir-double-beta",
    "noise",
];

fn linear(n_qubits: usize, layers: usize) -> AnsatzConfig {
    AnsatzConfig {
        n_qubits,
        layers,
        topology: Topology::Linear,
    }
}

fn base(name: &str, problem: Problem, ansatz: AnsatzConfig, march: MarchSettings) -> RunConfig {
    RunConfig {
        name: name.into(),
        seed: 0,
        problem,
        ansatz,
        march,
        backend: BackendConfig::default(),
        output: OutputConfig::default(),
        provenance: None,
    }
}

fn subdiffusion(name: &str, alpha: f64) -> Result<RunConfig> {
    let domain = Domain::new(1.0, 0.5, 32, 32)?;
    let p = SubdiffusionProblem::new(alpha, domain)?;
    Ok(base(
        name,
        Problem::Subdiffusion(p),
        linear(5, 4),
        MarchSettings::precise(0),
    ))
}

fn burgers(name: &str, alpha: f64) -> Result<RunConfig> {
    let domain = Domain::new(1.0, 1.0, 32, 32)?;
    let p = BurgersProblem::new(alpha, 0.02, domain)?;
    Ok(base(
        name,
        Problem::Burgers(p),
        linear(5, 5),
        MarchSettings::precise(10),
    ))
}

fn seir(name: &str, beta_scale: f64) -> Result<RunConfig> {
    let domain = Domain::new(1.0, 100.0, 16, 32)?;
    let mut p = SeirProblem::reference(1.0, domain)?;
    p.params.beta *= beta_scale;
    Ok(base(
        name,
        Problem::Seir(p),
        linear(4, 5),
        MarchSettings::default(),
    ))
}

fn noise_study() -> Result<RunConfig> {
    let domain = Domain::new(1.0, 0.5, 4, 2)?;
    let mut p = SubdiffusionProblem::new(1.0, domain)?;
    p.boundary = Boundary::Periodic;
    let march = MarchSettings {
        optimizer: OptimizerConfig::spsa(200, 0),
        norm_reset: true,
        ..MarchSettings::default()
    };
    let mut cfg = base("noise", Problem::Subdiffusion(p), linear(2, 1), march);
    cfg.backend = BackendConfig {
        kind: BackendKind::Sampled,
        noise: "default".into(),
        ..BackendConfig::default()
    };
    Ok(cfg)
}

/// Named configurations of the reference experiments.
pub fn preset(name: &str) -> Result<RunConfig> {
    match name {
        "subdiffusion-alpha1" => subdiffusion(name, 1.0),
        "subdiffusion-alpha05" => subdiffusion(name, 0.5),
        "burgers-alpha1" => burgers(name, 1.0),
        "burgers-alpha08" => burgers(name, 0.8),
        "burgers-alpha06" => burgers(name, 0.6),
        "seir" => seir(name, 1.0),
        "seir-double-beta" => seir(name, 2.0),
        "noise" => noise_study(),
        other => Err(CliError::UnknownPreset(other.into())),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| format!("bytes {}..{}", s.start, s.end))
                .unwrap_or_else(|| "<root>".into());
            CliError::config(path, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::config("<serialize>", e.to_string()))
    }

    pub fn spec(&self) -> Result<AnsatzSpec> {
        AnsatzSpec::new(
            self.ansatz.n_qubits,
            self.ansatz.layers,
            self.ansatz.topology,
        )
        .map_err(|e| CliError::config("ansatz", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::config(
                "name",
                "must be a non-empty plain directory name",
            ));
        }
        self.problem
            .validate()
            .map_err(|e| CliError::config("problem", e.to_string()))?;
        let spec = self.spec()?;
        let n = self.problem.domain().n_points;
        if spec.dim() != n {
            return Err(CliError::config(
                "ansatz.n_qubits",
                format!(
                    "2^{} = {} differs from domain.n_points = {n}",
                    spec.n_qubits,
                    spec.dim()
                ),
            ));
        }
        self.march
            .optimizer
            .validate()
            .map_err(|e| CliError::config("march.optimizer", e.to_string()))?;
        self.march
            .encoding
            .optimizer
            .validate()
            .map_err(|e| CliError::config("march.encoding", e.to_string()))?;
        if !(self.march.restart_spread > 0.0 && self.march.restart_spread.is_finite()) {
            return Err(CliError::config("march.restart_spread", "must be positive"));
        }
        self.backend.resolve(self.seed)?;
        Ok(())
    }

    pub fn backend(&self) -> Result<Backend> {
        self.backend.resolve(self.seed)
    }

    /// Run directory under `root`, defaulting to the configured output root.
    pub fn run_dir(&self, root: Option<&Path>) -> PathBuf {
        let root = root
            .map(Path::to_path_buf)
            .or_else(|| self.output.dir.clone())
            .unwrap_or_else(|| "runs".into());
        root.join(&self.name)
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
    pub shots: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(kind) = self.backend {
            cfg.backend.kind = kind;
        }
        if let Some(shots) = self.shots {
            cfg.backend.shots = shots;
        }
        cfg.validate()
    }
}
