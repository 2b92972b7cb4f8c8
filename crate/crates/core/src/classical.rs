//! Classical finite-difference solutions of every problem family and the
//! metrics that compare variational results against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{Boundary, CaputoWeights, HistoryCoefficients, SystemMatrix};
use crate::models::{BurgersProblem, Cohort, Domain, Scheme, SeirProblem, SubdiffusionProblem};

/// Symmetric tridiagonal matrix with a constant off-diagonal `-off`, a
/// per-row diagonal and an optional periodic wrap entry at `(0, N-1)` and
/// `(N-1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: f64,
    pub wrap: f64,
}

impl Tridiagonal {
    pub fn from_matrix(m: &SystemMatrix) -> Self {
        let n = m.n_points();
        let mut diag = vec![m.b(); n];
        diag[0] = m.c();
        diag[n - 1] = m.c();
        Self {
            diag,
            off: m.a(),
            wrap: m.d(),
        }
    }

    /// Adds `extra[i]` to the diagonal entry of row `i`.
    pub fn add_diagonal(&mut self, extra: &[f64]) -> Result<()> {
        if extra.len() != self.diag.len() {
            return Err(Error::DimensionMismatch {
                expected: self.diag.len(),
                got: extra.len(),
            });
        }
        for (d, e) in self.diag.iter_mut().zip(extra) {
            *d += e;
        }
        Ok(())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut y: Vec<f64> = (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v -= self.off * x[i - 1];
                }
                if i + 1 < n {
                    v -= self.off * x[i + 1];
                }
                v
            })
            .collect();
        y[0] += self.wrap * x[n - 1];
        y[n - 1] += self.wrap * x[0];
        y
    }

    /// Solves `T x = rhs`: Thomas elimination, with a Sherman–Morrison
    /// correction for the periodic wrap entries.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        if rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        if self.wrap == 0.0 {
            return thomas(&self.diag, -self.off, rhs);
        }
        if n == 2 {
            // The wrap entry lands on the neighbour entry.
            return thomas(&self.diag, -self.off + self.wrap, rhs);
        }
        // T = T' + w v^T with w = (gamma, 0, .., 0, wrap), v = (1, 0, .., 0, wrap / gamma).
        let gamma = -self.diag[0];
        if gamma == 0.0 {
            return Err(Error::Singular(
                "zero leading diagonal in periodic solve".into(),
            ));
        }
        let mut modified = self.diag.clone();
        modified[0] -= gamma;
        modified[n - 1] -= self.wrap * self.wrap / gamma;
        let y = thomas(&modified, -self.off, rhs)?;
        let mut w = vec![0.0; n];
        w[0] = gamma;
        w[n - 1] = self.wrap;
        let z = thomas(&modified, -self.off, &w)?;
        let vy = y[0] + self.wrap / gamma * y[n - 1];
        let vz = z[0] + self.wrap / gamma * z[n - 1];
        let denom = 1.0 + vz;
        if denom.abs() < f64::EPSILON {
            return Err(Error::Singular(
                "periodic correction denominator vanished".into(),
            ));
        }
        let f = vy / denom;
        Ok(y.iter().zip(&z).map(|(a, b)| a - f * b).collect())
    }
}

/// Thomas algorithm for a tridiagonal matrix with constant off-diagonals `e`.
fn thomas(diag: &[f64], e: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
    }
    c[0] = e / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - e * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        c[i] = e / pivot;
        d[i] = (rhs[i] - e * d[i - 1]) / pivot;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Solves `A x = rhs` for a system matrix.
pub fn solve_linear_system(matrix: &SystemMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    Tridiagonal::from_matrix(matrix).solve(rhs)
}

/// Solution values on the space-time grid: `values[k][i] = u(t_k, x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub domain: Domain,
    pub values: Vec<Vec<f64>>,
}

impl Field {
    pub fn column(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// `||u^k||_2`.
    pub fn norm(&self, k: usize) -> f64 {
        norm(&self.values[k])
    }

    pub fn total(&self, k: usize) -> f64 {
        self.values[k].iter().sum()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(acc: &mut [f64], s: f64, x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += s * b;
    }
}

fn history_rhs(
    weights: &CaputoWeights,
    k: usize,
    truncation: Option<usize>,
    history: &[Vec<f64>],
) -> Result<Vec<f64>> {
    HistoryCoefficients::new(weights, k, truncation)?.combine(history)
}

/// Marches the sub-diffusion problem with its configured scheme and
/// truncation.
pub fn classical_subdiffusion(problem: &SubdiffusionProblem) -> Result<Field> {
    problem.validate()?;
    let weights = problem.weights()?;
    let mut values = vec![problem.initial_values()?];
    match problem.scheme {
        Scheme::Implicit => {
            let t = Tridiagonal::from_matrix(&problem.matrix()?);
            for k in 1..=problem.domain.steps {
                let rhs = history_rhs(&weights, k, problem.truncation, &values)?;
                values.push(t.solve(&rhs)?);
            }
        }
        Scheme::CrankNicolson => {
            let pair = problem.crank_nicolson()?;
            let t = Tridiagonal::from_matrix(&pair.lhs);
            for k in 1..=problem.domain.steps {
                let mut rhs = history_rhs(&weights, k, problem.truncation, &values)?;
                let explicit = pair.rhs.apply(&values[k - 1])?;
                axpy(&mut rhs, 1.0, &explicit);
                values.push(t.solve(&rhs)?);
            }
        }
    }
    Ok(Field {
        domain: problem.domain,
        values,
    })
}

/// Central-difference advection source `-b (u_{i+1} - u_{i-1}) u_i` with
/// boundary ghosts: zero for Dirichlet walls, mirrored for Neumann walls,
/// wrapped for periodic domains.
pub fn advection_source(u: &[f64], b: f64, boundary: Boundary) -> Vec<f64> {
    let n = u.len();
    let at = |i: isize| -> f64 {
        if (0..n as isize).contains(&i) {
            return u[i as usize];
        }
        match boundary {
            Boundary::Dirichlet => 0.0,
            Boundary::Neumann => u[if i < 0 { 0 } else { n - 1 }],
            Boundary::Periodic => u[i.rem_euclid(n as isize) as usize],
        }
    };
    (0..n as isize)
        .map(|i| -b * (at(i + 1) - at(i - 1)) * u[i as usize])
        .collect()
}

/// Semi-implicit Burgers march: implicit diffusion, explicit advection.
pub fn classical_burgers(problem: &BurgersProblem) -> Result<Field> {
    problem.validate()?;
    let weights = problem.weights()?;
    let b = problem.b_adv()?;
    let t = Tridiagonal::from_matrix(&problem.matrix()?);
    let mut values = vec![problem.initial_values()?];
    for k in 1..=problem.domain.steps {
        let mut rhs = history_rhs(&weights, k, None, &values)?;
        axpy(
            &mut rhs,
            1.0,
            &advection_source(&values[k - 1], b, problem.boundary),
        );
        values.push(t.solve(&rhs)?);
    }
    Ok(Field {
        domain: problem.domain,
        values,
    })
}

/// One field per cohort, indexed by [`Cohort::index`].
pub type SeirFields = [Field; 4];

/// Coupled semi-implicit epidemic march in S, E, I, R order. Transmission
/// enters `S` implicitly through `beta I^{k-1} S^k` and `E` explicitly
/// through `beta I^{k-1} S^{k-1}`.
pub fn classical_seir(problem: &SeirProblem) -> Result<SeirFields> {
    problem.validate()?;
    let p = problem.params;
    let mut weights = Vec::with_capacity(4);
    let mut mats = Vec::with_capacity(4);
    let mut hist: Vec<Vec<Vec<f64>>> = Vec::with_capacity(4);
    for c in Cohort::ALL {
        weights.push(problem.weights(c)?);
        mats.push(Tridiagonal::from_matrix(&problem.matrix(c)?));
        hist.push(vec![problem.initial_values(c)?]);
    }
    let n = problem.domain.n_points;
    for k in 1..=problem.domain.steps {
        let prev = |c: Cohort, h: &Vec<Vec<Vec<f64>>>| h[c.index()][k - 1].clone();
        let (s_prev, e_prev, i_prev) = (
            prev(Cohort::S, &hist),
            prev(Cohort::E, &hist),
            prev(Cohort::I, &hist),
        );
        let mut next = Vec::with_capacity(4);
        for c in Cohort::ALL {
            let w = &weights[c.index()];
            let mut rhs = history_rhs(w, k, None, &hist[c.index()])?;
            rhs.iter_mut().for_each(|v| *v *= w.g());
            let mut t = mats[c.index()].clone();
            match c {
                Cohort::S => {
                    t.add_diagonal(&i_prev.iter().map(|i| p.beta * i).collect::<Vec<_>>())?;
                    rhs.iter_mut().for_each(|v| *v += p.recruitment);
                }
                Cohort::E => {
                    for x in 0..n {
                        rhs[x] += p.beta * i_prev[x] * s_prev[x];
                    }
                }
                Cohort::I => axpy(&mut rhs, p.sigma, &e_prev),
                Cohort::R => axpy(&mut rhs, p.rho, &i_prev),
            }
            next.push(t.solve(&rhs)?);
        }
        for (h, v) in hist.iter_mut().zip(next) {
            h.push(v);
        }
    }
    let mut it = hist.into_iter().map(|values| Field {
        domain: problem.domain,
        values,
    });
    let mut take = || it.next().ok_or(Error::MissingHistory(0));
    Ok([take()?, take()?, take()?, take()?])
}

/// `sqrt(1 - <u_hat|state>^2)` with `u_hat` the normalised classical column
/// and `state` a unit vector.
pub fn trace_error(state: &[f64], classical: &[f64]) -> Result<f64> {
    if state.len() != classical.len() {
        return Err(Error::DimensionMismatch {
            expected: classical.len(),
            got: state.len(),
        });
    }
    let c = norm(classical);
    if c == 0.0 {
        return Err(Error::ZeroNorm("classical solution column"));
    }
    let s = norm(state);
    if s == 0.0 {
        return Err(Error::ZeroNorm("variational state"));
    }
    let overlap: f64 = state.iter().zip(classical).map(|(a, b)| a * b).sum::<f64>() / (c * s);
    Ok((1.0 - overlap * overlap).max(0.0).sqrt())
}

/// `|r / ||u||`.
pub fn norm_fidelity(r: f64, classical_norm: f64) -> Result<f64> {
    if classical_norm == 0.0 {
        return Err(Error::ZeroNorm("classical solution norm"));
    }
    Ok((r / classical_norm).abs())
}

/// `|u_q - u_c| / max |u_c|`, elementwise.
pub fn relative_deviation(quantum: &[f64], classical: &[f64]) -> Result<Vec<f64>> {
    if quantum.len() != classical.len() {
        return Err(Error::DimensionMismatch {
            expected: classical.len(),
            got: quantum.len(),
        });
    }
    let scale = classical.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::ZeroNorm("classical solution column"));
    }
    Ok(quantum
        .iter()
        .zip(classical)
        .map(|(q, c)| (q - c).abs() / scale)
        .collect())
}
