//! Caputo weights, system matrices and history coefficients.
//!
//! The first-order Caputo difference of order `0 < alpha <= 1` is
//!
//! ```text
//! D^alpha u(t_k) ~ g * [ u^k - w_k u^0 + sum_{j=1}^{k-1} dw_j u^{k-j} ]
//! ```
//!
//! with `g = tau^-alpha / Gamma(2 - alpha)`, `w_j = j^(1-alpha) - (j-1)^(1-alpha)`
//! and `dw_j = w_{j+1} - w_j`. Everything in this module is a pure function of
//! its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below one half.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Caputo kernel weights for one `(alpha, tau, M)` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaputoWeights {
    alpha: f64,
    tau: f64,
    steps: usize,
    g: f64,
    /// `w[j - 1]` holds `w_j`, `j = 1..=M`.
    w: Vec<f64>,
    /// `dw[j - 1]` holds `dw_j`, `j = 1..=M-1`.
    dw: Vec<f64>,
}

/// Raw weight `j^(1-alpha) - (j-1)^(1-alpha)` with `w_1 = 1` forced.
fn raw_weight(alpha: f64, j: usize) -> f64 {
    if j == 0 {
        return 0.0;
    }
    if j == 1 {
        return 1.0;
    }
    let e = 1.0 - alpha;
    if e == 0.0 {
        return 0.0;
    }
    (j as f64).powf(e) - ((j - 1) as f64).powf(e)
}

impl CaputoWeights {
    /// Precomputes `w_1..w_M`, `dw_1..dw_{M-1}` and the scale factor `g`.
    pub fn new(alpha: f64, tau: f64, steps: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(
                "alpha",
                format!("{alpha} is outside (0, 1]"),
            ));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("tau", format!("{tau} must be positive")));
        }
        if steps == 0 {
            return Err(Error::invalid(
                "steps",
                "at least one time step is required",
            ));
        }
        let w: Vec<f64> = (1..=steps).map(|j| raw_weight(alpha, j)).collect();
        let dw = w.windows(2).map(|p| p[1] - p[0]).collect();
        let g = tau.powf(-alpha) / gamma(2.0 - alpha);
        Ok(Self {
            alpha,
            tau,
            steps,
            g,
            w,
            dw,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Scale factor `g = tau^-alpha / Gamma(2 - alpha)`.
    pub fn g(&self) -> f64 {
        self.g
    }

    /// `w_1..w_M`.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// `dw_1..dw_{M-1}`.
    pub fn dw(&self) -> &[f64] {
        &self.dw
    }

    /// `w_j` for any `j >= 1`, including indices past `M`.
    pub fn weight(&self, j: usize) -> f64 {
        match self.w.get(j.wrapping_sub(1)) {
            Some(&v) => v,
            None => raw_weight(self.alpha, j),
        }
    }

    /// `dw_j = w_{j+1} - w_j` for any `j >= 1`.
    pub fn weight_diff(&self, j: usize) -> f64 {
        match self.dw.get(j.wrapping_sub(1)) {
            Some(&v) => v,
            None => self.weight(j + 1) - self.weight(j),
        }
    }
}

/// Boundary condition selecting the corner entries of the system matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Dirichlet,
    Neumann,
}

impl Boundary {
    pub const ALL: [Boundary; 3] = [Boundary::Periodic, Boundary::Dirichlet, Boundary::Neumann];
}

/// Symmetric tridiagonal-plus-corners operator
///
/// ```text
/// [ c  -a           d ]
/// [-a   b  -a         ]
/// [     ...  ...      ]
/// [ d          -a   c ]
/// ```
///
/// with `(c, d) = (b, -a)` periodic, `(b, 0)` Dirichlet and `(b - a, 0)`
/// Neumann. For the implicit diffusion matrix `b = 1 + 2a`, which makes the
/// Neumann corner `1 + a`. The same shape with other `(b, a)` pairs carries
/// the Crank–Nicolson pair and the epidemic cohort operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemMatrix {
    n_points: usize,
    boundary: Boundary,
    /// Main diagonal `b`.
    diag: f64,
    /// Off-diagonal magnitude `a` (entries are `-a`).
    off: f64,
}

fn check_points(n_points: usize) -> Result<()> {
    if n_points < 2 || !n_points.is_power_of_two() {
        return Err(Error::invalid(
            "n_points",
            format!("{n_points} must be a power of two and at least 2"),
        ));
    }
    Ok(())
}

impl SystemMatrix {
    /// Implicit diffusion matrix with `b = 1 + 2a`.
    pub fn new(n_points: usize, a: f64, boundary: Boundary) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", format!("{a} must be non-negative")));
        }
        Self::from_parts(n_points, 1.0 + 2.0 * a, a, boundary)
    }

    /// Operator with an arbitrary main diagonal `b` and off-diagonal magnitude `a`.
    pub fn from_parts(n_points: usize, diag: f64, off: f64, boundary: Boundary) -> Result<Self> {
        check_points(n_points)?;
        Ok(Self {
            n_points,
            boundary,
            diag,
            off,
        })
    }

    /// Second-difference stencil `L` (-2 on the diagonal, +1 beside it).
    pub fn stencil(n_points: usize, boundary: Boundary) -> Result<Self> {
        Self::from_parts(n_points, -2.0, -1.0, boundary)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Main diagonal `b`.
    pub fn b(&self) -> f64 {
        self.diag
    }

    /// Off-diagonal magnitude `a`.
    pub fn a(&self) -> f64 {
        self.off
    }

    /// Corner diagonal entry `c`.
    pub fn c(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic | Boundary::Dirichlet => self.diag,
            Boundary::Neumann => self.diag - self.off,
        }
    }

    /// Corner off-diagonal entry `d`.
    pub fn d(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => -self.off,
            Boundary::Dirichlet | Boundary::Neumann => 0.0,
        }
    }

    /// `s * self`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            diag: self.diag * s,
            off: self.off * s,
            ..*self
        }
    }

    /// `self + s * I`.
    pub fn plus_identity(&self, s: f64) -> Self {
        Self {
            diag: self.diag + s,
            ..*self
        }
    }

    /// Dense `N x N` realisation.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_points;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag;
            if i + 1 < n {
                m[i][i + 1] = -self.off;
                m[i + 1][i] = -self.off;
            }
        }
        m[0][0] = self.c();
        m[n - 1][n - 1] = self.c();
        if n > 2 {
            m[0][n - 1] = self.d();
            m[n - 1][0] = self.d();
        } else {
            // N = 2: the wrap entry coincides with the neighbour entry.
            m[0][1] += self.d();
            m[1][0] += self.d();
        }
        m
    }

    /// Matrix-vector product without forming the dense matrix.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_points;
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag * x[i];
            if i > 0 {
                v -= self.off * x[i - 1];
            }
            if i + 1 < n {
                v -= self.off * x[i + 1];
            }
            y[i] = v;
        }
        let corner = self.c() - self.diag;
        y[0] += corner * x[0] + self.d() * x[n - 1];
        y[n - 1] += corner * x[n - 1] + self.d() * x[0];
        Ok(y)
    }

    /// `x^T M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_points,
                got: x.len(),
            });
        }
        let my = self.apply(y)?;
        Ok(x.iter().zip(&my).map(|(a, b)| a * b).sum())
    }
}

/// Crank–Nicolson operator pair: `A u^k = B u^{k-1} + history`, `A = I - B`,
/// `B = (a/2) L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrankNicolsonPair {
    pub lhs: SystemMatrix,
    pub rhs: SystemMatrix,
}

impl CrankNicolsonPair {
    pub fn new(n_points: usize, a: f64, boundary: Boundary) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", format!("{a} must be non-negative")));
        }
        let rhs = SystemMatrix::stencil(n_points, boundary)?.scaled(a / 2.0);
        let lhs = rhs.scaled(-1.0).plus_identity(1.0);
        Ok(Self { lhs, rhs })
    }

    pub fn boundary(&self) -> Boundary {
        self.lhs.boundary()
    }
}

/// Coefficients of the history states on the right-hand side of step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryCoefficients {
    pub k: usize,
    /// `(step index j, coefficient of u^j)`: `u^0` first, then `u^{k-1}`,
    /// `u^{k-2}`, and so on.
    pub terms: Vec<(usize, f64)>,
    pub truncation: Option<usize>,
}

impl HistoryCoefficients {
    /// Builds the right-hand side coefficients of `A u^k = w_k u^0 - sum dw_j u^{k-j}`.
    ///
    /// With a truncation `xi < k` only the `xi` most recent states are kept
    /// (and `u^0` is dropped); `xi >= k` reproduces the full list. Exactly zero
    /// coefficients, which only occur for `alpha = 1`, are omitted.
    pub fn new(weights: &CaputoWeights, k: usize, truncation: Option<usize>) -> Result<Self> {
        if k == 0 || k > weights.steps() {
            return Err(Error::invalid(
                "k",
                format!("{k} is outside 1..={}", weights.steps()),
            ));
        }
        if let Some(xi) = truncation {
            if xi == 0 || xi > weights.steps() {
                return Err(Error::invalid(
                    "truncation",
                    format!("{xi} is outside 1..={}", weights.steps()),
                ));
            }
        }
        let keep = truncation.map_or(k, |xi| xi.min(k));
        let mut terms = Vec::with_capacity(keep);
        if keep == k {
            terms.push((0, weights.weight(k)));
        }
        for j in 1..=keep.min(k - 1) {
            terms.push((k - j, -weights.weight_diff(j)));
        }
        terms.retain(|&(_, c)| c != 0.0);
        Ok(Self {
            k,
            terms,
            truncation,
        })
    }

    /// Combines history vectors `history[j] = u^j` into the right-hand side.
    pub fn combine(&self, history: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = history.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for &(j, c) in &self.terms {
            let u = history.get(j).ok_or(Error::MissingHistory(j))?;
            if u.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: u.len(),
                });
            }
            for (o, x) in out.iter_mut().zip(u) {
                *o += c * x;
            }
        }
        Ok(out)
    }
}

/// Leading-order truncation error `g |dw_{xi+1}| r^{k-(xi+1)}` of a step whose
/// history norms are `norms = [r^0, ..., r^{k-1}]`. Zero when nothing is
/// truncated.
pub fn truncation_error_estimate(weights: &CaputoWeights, xi: usize, norms: &[f64]) -> f64 {
    let k = norms.len();
    if xi >= k {
        return 0.0;
    }
    weights.g() * weights.weight_diff(xi + 1).abs() * norms[k - (xi + 1)].abs()
}

/// Sum of `g |c_j| r^{k-j}` over every history term dropped by truncation at
/// `xi`, where `c_j` is the full-scheme coefficient (the `u^0` term included).
pub fn truncation_error_bound(weights: &CaputoWeights, xi: usize, norms: &[f64]) -> f64 {
    let k = norms.len();
    if xi >= k {
        return 0.0;
    }
    let mut sum = 0.0;
    for j in (xi + 1)..k {
        sum += weights.weight_diff(j).abs() * norms[k - j].abs();
    }
    sum += weights.weight(k).abs() * norms[0].abs();
    weights.g() * sum
}
