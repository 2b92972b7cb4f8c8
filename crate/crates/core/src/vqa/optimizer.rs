//! Unconstrained minimizers: a BFGS quasi-Newton method with a strong-Wolfe
//! line search, and SPSA.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function to minimize.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> Result<f64>;

    /// Analytic gradient, when one is available. The default reports none,
    /// and gradient-based methods fall back to central differences.
    fn gradient(&mut self, _x: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl<F: FnMut(&[f64]) -> Result<f64>> Objective for F {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    QuasiNewton,
    Spsa,
}

/// SPSA gain sequences `a_k = a / (A + k)^alpha`, `c_k = c / k^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    /// Step-size numerator; `None` selects `0.05 (A + 1)^alpha`.
    pub a: Option<f64>,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Stability constant; `None` selects a tenth of the iteration budget.
    pub stability: Option<f64>,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            a: None,
            c: 0.2,
            alpha: 0.602,
            gamma: 0.101,
            stability: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub max_iterations: usize,
    /// Stop once an iteration lowers the objective by less than
    /// `ftol * max(|f|, |f_prev|, 1)`.
    pub ftol: f64,
    /// Stop once the largest gradient component is below `gtol`.
    pub gtol: f64,
    /// Step of the central-difference gradient.
    pub fd_step: f64,
    pub spsa: SpsaConfig,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::quasi_newton()
    }
}

impl OptimizerConfig {
    pub fn quasi_newton() -> Self {
        Self {
            method: Method::QuasiNewton,
            max_iterations: 1000,
            ftol: 1e-6,
            gtol: 1e-6,
            fd_step: 1e-6,
            spsa: SpsaConfig::default(),
            seed: 0,
        }
    }

    pub fn spsa(max_iterations: usize, seed: u64) -> Self {
        Self {
            method: Method::Spsa,
            max_iterations,
            seed,
            ..Self::quasi_newton()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid(
                "optimizer.max_iterations",
                "must be at least 1",
            ));
        }
        for (name, v) in [
            ("optimizer.ftol", self.ftol),
            ("optimizer.gtol", self.gtol),
            ("optimizer.fd_step", self.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "optimizer",
                    format!("{name} = {v} must be positive"),
                ));
            }
        }
        let s = &self.spsa;
        if !(s.c > 0.0) || !(s.alpha > 0.0) || !(s.gamma > 0.0) {
            return Err(Error::invalid(
                "optimizer.spsa",
                "c, alpha and gamma must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Calls of [`Objective::value`].
    pub n_eval: usize,
    /// Calls of [`Objective::gradient`] that returned an analytic gradient.
    pub n_grad: usize,
    pub n_iter: usize,
    pub converged: bool,
}

pub fn minimize(
    objective: &mut dyn Objective,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<OptimizeResult> {
    config.validate()?;
    let mut counted = Counted {
        inner: objective,
        n_eval: 0,
        n_grad: 0,
        fd_step: config.fd_step,
    };
    let (x, value, n_iter, converged) = match config.method {
        Method::QuasiNewton => bfgs(&mut counted, x0, config)?,
        Method::Spsa => spsa(&mut counted, x0, config)?,
    };
    Ok(OptimizeResult {
        x,
        value,
        n_eval: counted.n_eval,
        n_grad: counted.n_grad,
        n_iter,
        converged,
    })
}

struct Counted<'a> {
    inner: &'a mut dyn Objective,
    n_eval: usize,
    n_grad: usize,
    fd_step: f64,
}

impl Counted<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.n_eval += 1;
        let v = self.inner.value(x)?;
        if v.is_nan() {
            return Err(Error::invalid("objective", "evaluated to NaN"));
        }
        Ok(v)
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        if let Some(g) = self.inner.gradient(x) {
            self.n_grad += 1;
            return g;
        }
        let mut xp = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for i in 0..x.len() {
            let h = self.fd_step * x[i].abs().max(1.0);
            xp[i] = x[i] + h;
            let fp = self.value(&xp)?;
            xp[i] = x[i] - h;
            let fm = self.value(&xp)?;
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn step(x: &[f64], p: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + t * b).collect()
}

struct Trial {
    t: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Strong-Wolfe line search along `p` (bracketing followed by a safeguarded
/// cubic zoom). Returns `None` when no acceptable step was found.
fn wolfe_search(
    obj: &mut Counted,
    x: &[f64],
    f0: f64,
    slope0: f64,
    p: &[f64],
    t_init: f64,
) -> Result<Option<Trial>> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    const MAX_TRIALS: usize = 30;
    let eval = |obj: &mut Counted, t: f64| -> Result<Trial> {
        let xt = step(x, p, t);
        let f = obj.value(&xt)?;
        let g = obj.gradient(&xt)?;
        let slope = dot(&g, p);
        Ok(Trial { t, f, g, slope })
    };
    let mut prev = Trial {
        t: 0.0,
        f: f0,
        g: Vec::new(),
        slope: slope0,
    };
    let mut t = t_init;
    for i in 0..MAX_TRIALS {
        let cur = eval(obj, t)?;
        if cur.f > f0 + C1 * t * slope0 || (i > 0 && cur.f >= prev.f) {
            return zoom(obj, f0, slope0, prev, cur, &eval);
        }
        if cur.slope.abs() <= -C2 * slope0 {
            return Ok(Some(cur));
        }
        if cur.slope >= 0.0 {
            return zoom(obj, f0, slope0, cur, prev, &eval);
        }
        prev = cur;
        t *= 2.0;
    }
    Ok(None)
}

fn zoom(
    obj: &mut Counted,
    f0: f64,
    slope0: f64,
    mut lo: Trial,
    mut hi: Trial,
    eval: &dyn Fn(&mut Counted, f64) -> Result<Trial>,
) -> Result<Option<Trial>> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    const MAX_ZOOM: usize = 30;
    for _ in 0..MAX_ZOOM {
        let (a, b) = (lo.t.min(hi.t), lo.t.max(hi.t));
        if (b - a) <= 1e-14 * b.max(1.0) {
            break;
        }
        let t = cubic_min(&lo, &hi)
            .filter(|&t| t > a + 0.1 * (b - a) && t < b - 0.1 * (b - a))
            .unwrap_or(0.5 * (a + b));
        let cur = eval(obj, t)?;
        if cur.f > f0 + C1 * t * slope0 || cur.f >= lo.f {
            hi = cur;
        } else {
            if cur.slope.abs() <= -C2 * slope0 {
                return Ok(Some(cur));
            }
            if cur.slope * (hi.t - lo.t) >= 0.0 {
                hi = std::mem::replace(&mut lo, cur);
            } else {
                lo = cur;
            }
        }
    }
    // Accept the best sufficient-decrease point if the curvature condition
    // could not be met.
    if lo.t > 0.0 && lo.f < f0 {
        return Ok(Some(lo));
    }
    Ok(None)
}

/// Minimizer of the cubic interpolating values and slopes at two points.
fn cubic_min(a: &Trial, b: &Trial) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.t - b.t);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b.t - a.t).signum() * disc.sqrt();
    let t = b.t - (b.t - a.t) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
    t.is_finite().then_some(t)
}

fn bfgs(
    obj: &mut Counted,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = obj.value(&x)?;
    let mut g = obj.gradient(&x)?;
    if n == 0 {
        return Ok((x, f, 0, true));
    }
    let identity = |n: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    };
    let mut h = identity(n);
    let mut iter = 0;
    while iter < cfg.max_iterations {
        if max_abs(&g) <= cfg.gtol {
            return Ok((x, f, iter, true));
        }
        let mut p: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            h = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        // The first step is capped so that no parameter moves by more than
        // one radian; later steps start from the quasi-Newton step.
        let t_init = if iter == 0 {
            1.0f64.min(1.0 / max_abs(&p).max(1e-300))
        } else {
            1.0
        };
        let Some(trial) = wolfe_search(obj, &x, f, slope, &p, t_init)? else {
            // No progress possible along the search direction.
            let converged = max_abs(&g) <= cfg.gtol.sqrt();
            return Ok((x, f, iter, converged));
        };
        iter += 1;
        let s: Vec<f64> = p.iter().map(|v| trial.t * v).collect();
        let y: Vec<f64> = trial.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let x_new = step(&x, &p, trial.t);
        let f_old = f;
        x = x_new;
        f = trial.f;
        g = trial.g;
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if iter == 1 {
                // Scale the initial inverse Hessian before the first update.
                let scale = sy / dot(&y, &y);
                for (i, row) in h.iter_mut().enumerate() {
                    row.iter_mut().for_each(|v| *v = 0.0);
                    row[i] = scale;
                }
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        if (f_old - f) <= cfg.ftol * f_old.abs().max(f.abs()).max(1.0) {
            return Ok((x, f, iter, true));
        }
    }
    let converged = max_abs(&g) <= cfg.gtol;
    Ok((x, f, iter, converged))
}

fn spsa(
    obj: &mut Counted,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, f64, usize, bool)> {
    let s = &cfg.spsa;
    let iters = cfg.max_iterations;
    let stability = s.stability.unwrap_or(0.1 * iters as f64);
    let a = s.a.unwrap_or(0.05 * (stability + 1.0).powf(s.alpha));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = x0.to_vec();
    let mut last = f64::NAN;
    for k in 1..=iters {
        let ak = a / (stability + k as f64).powf(s.alpha);
        let ck = s.c / (k as f64).powf(s.gamma);
        let delta: Vec<f64> = (0..x.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let fp = obj.value(&step(&x, &delta, ck))?;
        let fm = obj.value(&step(&x, &delta, -ck))?;
        let scale = (fp - fm) / (2.0 * ck);
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= ak * scale * d;
        }
        last = 0.5 * (fp + fm);
    }
    // SPSA runs a fixed budget; the reported value is the mean of the last
    // perturbed pair, which avoids an extra evaluation.
    Ok((x, last, iters, true))
}
