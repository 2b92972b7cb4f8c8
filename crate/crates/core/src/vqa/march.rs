//! Initial-state encoding and the step-by-step variational time march.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classical::{norm, Field};
use crate::error::{Error, Result};
use crate::measurement::Estimator;
use crate::models::{Cohort, Problem, Scheme};
use crate::statevector::{dot, AnsatzSpec};
use crate::vqa::cost::{StepCost, Stored};
use crate::vqa::gradient::{CostObjective, GradientMethod};
use crate::vqa::optimizer::{minimize, Objective, OptimizerConfig};

/// Fit of the initial profile by maximizing the overlap with the ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    /// Accepted trace error `sqrt(1 - <t|u>^2)`.
    pub tolerance: f64,
    /// Extra random starts tried while the tolerance is missed.
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            restarts: 40,
            seed: 0,
            optimizer: OptimizerConfig {
                ftol: 1e-15,
                gtol: 1e-10,
                ..OptimizerConfig::quasi_newton()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub theta: Vec<f64>,
    /// Signed norm with `r0 |u(theta)> ~ target`.
    pub r0: f64,
    /// Trace error of the fitted state.
    pub residual: f64,
    pub n_eval: usize,
    pub n_iter: usize,
    pub attempts: usize,
}

struct Fidelity<'a> {
    spec: &'a AnsatzSpec,
    target: &'a [f64],
}

impl Fidelity<'_> {
    fn overlap(&self, theta: &[f64]) -> Result<f64> {
        Ok(dot(self.spec.prepare(theta)?.amplitudes(), self.target))
    }
}

impl Objective for Fidelity<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        let s = self.overlap(x)?;
        Ok(1.0 - s * s)
    }

    fn gradient(&mut self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        let run = || {
            let s = self.overlap(x)?;
            let mut shifted = x.to_vec();
            let mut grad = Vec::with_capacity(x.len());
            for i in 0..x.len() {
                shifted[i] = x[i] + std::f64::consts::PI;
                grad.push(-s * self.overlap(&shifted)?);
                shifted[i] = x[i];
            }
            Ok(grad)
        };
        Some(run())
    }
}

/// Fits `spec` to `target`, starting from zero angles and then from seeded
/// random angles until the residual meets the tolerance.
pub fn encode_initial(
    target: &[f64],
    spec: &AnsatzSpec,
    config: &EncodingConfig,
) -> Result<Encoding> {
    if target.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: target.len(),
        });
    }
    let t_norm = norm(target);
    if t_norm == 0.0 {
        return Err(Error::ZeroNorm("initial profile"));
    }
    let unit: Vec<f64> = target.iter().map(|v| v / t_norm).collect();
    let mut objective = Fidelity {
        spec,
        target: &unit,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<Encoding> = None;
    let (mut n_eval, mut n_iter) = (0, 0);
    for attempt in 0..=config.restarts {
        let x0: Vec<f64> = if attempt == 0 {
            vec![0.0; spec.n_params()]
        } else {
            (0..spec.n_params())
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        };
        let res = minimize(&mut objective, &x0, &config.optimizer)?;
        n_eval += res.n_eval;
        n_iter += res.n_iter;
        let s = objective.overlap(&res.x)?;
        let residual = (1.0 - s * s).max(0.0).sqrt();
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(Encoding {
                theta: res.x,
                r0: s * t_norm,
                residual,
                n_eval,
                n_iter,
                attempts: attempt + 1,
            });
        }
        if residual <= config.tolerance {
            break;
        }
    }
    let mut enc = best.expect("at least one attempt runs");
    enc.n_eval = n_eval;
    enc.n_iter = n_iter;
    Ok(enc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarchConfig {
    pub optimizer: OptimizerConfig,
    pub gradient: GradientMethod,
    /// Start each step from the previous angles instead of zeros.
    pub warm_start: bool,
    pub encoding: EncodingConfig,
    /// Per field and step norms substituted for the optimal norm after each
    /// step.
    pub reset_norms: Option<Vec<Vec<f64>>>,
    /// Extra starts per step around the initial angles; the lowest cost wins.
    pub step_restarts: usize,
    /// Standard deviation of the angle perturbation of the extra starts.
    pub restart_spread: f64,
    pub seed: u64,
}

impl Default for MarchConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::quasi_newton(),
            gradient: GradientMethod::default(),
            warm_start: true,
            encoding: EncodingConfig::default(),
            reset_norms: None,
            step_restarts: 0,
            restart_spread: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub theta: Vec<f64>,
    /// Norm carried forward.
    pub r: f64,
    /// Norm `P / Q` obtained at the optimum.
    pub r_measured: f64,
    /// Optimal cost, or the fit infidelity for `k = 0`.
    pub cost: f64,
    pub n_eval: usize,
    pub n_grad: usize,
    pub n_iter: usize,
    pub converged: bool,
    pub norm_reset: bool,
    /// Estimator calls spent on the step.
    pub estimator_calls: u64,
}

/// Marched states of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHistory {
    pub field: String,
    pub spec: AnsatzSpec,
    pub encoding_residual: f64,
    pub records: Vec<StepRecord>,
}

impl SolutionHistory {
    pub fn steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// Unit state of step `k`.
    pub fn state(&self, k: usize) -> Result<Vec<f64>> {
        let rec = self.records.get(k).ok_or(Error::MissingHistory(k))?;
        Ok(self.spec.prepare(&rec.theta)?.into_amplitudes())
    }

    /// Solution values `r |u>` of step `k`.
    pub fn values(&self, k: usize) -> Result<Vec<f64>> {
        let r = self.records.get(k).ok_or(Error::MissingHistory(k))?.r;
        Ok(self.state(k)?.into_iter().map(|a| r * a).collect())
    }

    pub fn total_evaluations(&self) -> usize {
        self.records.iter().map(|r| r.n_eval).sum()
    }
}

/// Replaces every marched norm by the classical norm of the same step,
/// keeping its sign.
pub fn norm_reset_policy(history: &SolutionHistory, classical: &Field) -> Result<SolutionHistory> {
    if classical.steps() < history.steps() {
        return Err(Error::MissingHistory(classical.steps() + 1));
    }
    let mut out = history.clone();
    for rec in out.records.iter_mut().skip(1) {
        rec.r = reset_norm(rec.r_measured, classical.norm(rec.k));
        rec.norm_reset = true;
    }
    Ok(out)
}

fn reset_norm(measured: f64, target: f64) -> f64 {
    if measured < 0.0 {
        -target
    } else {
        target
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFailure {
    pub k: usize,
    pub field: String,
    pub message: String,
}

/// Histories of every field; on failure they hold the steps completed
/// before it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarchOutcome {
    pub histories: Vec<SolutionHistory>,
    pub failure: Option<StepFailure>,
}

impl MarchOutcome {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

fn step_cost(
    problem: &Problem,
    spec: AnsatzSpec,
    field: usize,
    k: usize,
    stored: &[Vec<Stored>],
) -> Result<StepCost> {
    match problem {
        Problem::Subdiffusion(p) => {
            let weights = p.weights()?;
            match p.scheme {
                Scheme::Implicit => {
                    StepCost::fractional(spec, &weights, k, p.truncation, p.matrix()?, &stored[0])
                }
                Scheme::CrankNicolson => StepCost::crank_nicolson(
                    spec,
                    &weights,
                    k,
                    p.truncation,
                    &p.crank_nicolson()?,
                    &stored[0],
                ),
            }
        }
        Problem::Burgers(p) => StepCost::burgers(spec, p, k, &stored[0]),
        Problem::Seir(p) => {
            let all: &[Vec<Stored>; 4] =
                stored.try_into().map_err(|_| Error::DimensionMismatch {
                    expected: 4,
                    got: stored.len(),
                })?;
            StepCost::seir(spec, p, Cohort::ALL[field], k, all)
        }
    }
}

/// Encodes every field and marches all steps. Epidemic cohorts advance in
/// the order S, E, I, R with couplings taken from the previous step.
pub fn time_march(
    problem: &Problem,
    spec: AnsatzSpec,
    config: &MarchConfig,
    est: &Estimator,
) -> Result<MarchOutcome> {
    problem.validate()?;
    config.optimizer.validate()?;
    let domain = *problem.domain();
    if spec.dim() != domain.n_points {
        return Err(Error::DimensionMismatch {
            expected: domain.n_points,
            got: spec.dim(),
        });
    }
    let names = problem.field_names();
    if let Some(norms) = &config.reset_norms {
        if norms.len() != names.len() || norms.iter().any(|n| n.len() <= domain.steps) {
            return Err(Error::invalid(
                "reset_norms",
                "one norm per field and step is required",
            ));
        }
    }
    let initial = problem.initial_values()?;
    let mut histories = Vec::with_capacity(names.len());
    let mut stored: Vec<Vec<Stored>> = Vec::with_capacity(names.len());
    for (name, values) in names.iter().zip(&initial) {
        let enc = encode_initial(values, &spec, &config.encoding)?;
        stored.push(vec![Stored::new(spec, enc.theta.clone(), enc.r0)?]);
        histories.push(SolutionHistory {
            field: name.to_string(),
            spec,
            encoding_residual: enc.residual,
            records: vec![StepRecord {
                k: 0,
                theta: enc.theta,
                r: enc.r0,
                r_measured: enc.r0,
                cost: enc.residual * enc.residual,
                n_eval: enc.n_eval,
                n_grad: 0,
                n_iter: enc.n_iter,
                converged: enc.residual <= config.encoding.tolerance,
                norm_reset: false,
                estimator_calls: 0,
            }],
        });
    }
    for k in 1..=domain.steps {
        for f in 0..names.len() {
            match march_step(problem, spec, config, est, f, k, &stored) {
                Ok(rec) => {
                    stored[f].push(Stored::new(spec, rec.theta.clone(), rec.r)?);
                    histories[f].records.push(rec);
                }
                Err(e) => {
                    let failure = StepFailure {
                        k,
                        field: names[f].to_string(),
                        message: e.to_string(),
                    };
                    return Ok(MarchOutcome {
                        histories,
                        failure: Some(failure),
                    });
                }
            }
        }
    }
    Ok(MarchOutcome {
        histories,
        failure: None,
    })
}

fn march_step(
    problem: &Problem,
    spec: AnsatzSpec,
    config: &MarchConfig,
    est: &Estimator,
    field: usize,
    k: usize,
    stored: &[Vec<Stored>],
) -> Result<StepRecord> {
    let calls = est.calls();
    let cost = step_cost(problem, spec, field, k, stored)?;
    let x0 = if config.warm_start {
        stored[field][k - 1].state.theta().to_vec()
    } else {
        vec![0.0; spec.n_params()]
    };
    let mut objective = CostObjective {
        cost: &cost,
        estimator: est,
        method: config.gradient,
    };
    let mut res = minimize(&mut objective, &x0, &config.optimizer)?;
    if config.step_restarts > 0 {
        let stream = (k * 4 + field) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        let spread = Normal::new(0.0, config.restart_spread)
            .map_err(|e| Error::invalid("restart_spread", e.to_string()))?;
        let (mut n_eval, mut n_grad, mut n_iter) = (res.n_eval, res.n_grad, res.n_iter);
        for _ in 0..config.step_restarts {
            let start: Vec<f64> = x0.iter().map(|t| t + spread.sample(&mut rng)).collect();
            let trial = minimize(&mut objective, &start, &config.optimizer)?;
            n_eval += trial.n_eval;
            n_grad += trial.n_grad;
            n_iter += trial.n_iter;
            if trial.value < res.value {
                res = trial;
            }
        }
        res.n_eval = n_eval;
        res.n_grad = n_grad;
        res.n_iter = n_iter;
    }
    let eval = cost.evaluate(est, &res.x)?;
    let measured = eval.norm();
    if !measured.is_finite() {
        return Err(Error::Singular(format!("non-finite norm at step {k}")));
    }
    let (r, norm_reset) = match &config.reset_norms {
        Some(norms) => (reset_norm(measured, norms[field][k]), true),
        None => (measured, false),
    };
    Ok(StepRecord {
        k,
        theta: res.x,
        r,
        r_measured: measured,
        cost: eval.cost,
        n_eval: res.n_eval,
        n_grad: res.n_grad,
        n_iter: res.n_iter,
        converged: res.converged,
        norm_reset,
        estimator_calls: est.calls() - calls,
    })
}
