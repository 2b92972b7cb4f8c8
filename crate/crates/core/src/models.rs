//! Problem definitions: domains, initial profiles and the scheme constants of
//! the sub-diffusion, Burgers and epidemic test families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{Boundary, CaputoWeights, CrankNicolsonPair, SystemMatrix};

/// Space-time grid: `N` nodes `x_i = i h` (`i = 1..N`, `h = L / N`) and `M`
/// steps of `tau = T / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub length: f64,
    pub duration: f64,
    pub n_points: usize,
    pub steps: usize,
}

impl Domain {
    pub fn new(length: f64, duration: f64, n_points: usize, steps: usize) -> Result<Self> {
        let d = Self {
            length,
            duration,
            n_points,
            steps,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::invalid(
                "domain.length",
                format!("{} must be positive", self.length),
            ));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(
                "domain.duration",
                format!("{} must be positive", self.duration),
            ));
        }
        if self.n_points < 2 || !self.n_points.is_power_of_two() {
            return Err(Error::invalid(
                "domain.n_points",
                format!("{} must be a power of two and at least 2", self.n_points),
            ));
        }
        if self.steps == 0 {
            return Err(Error::invalid(
                "domain.steps",
                "at least one time step is required",
            ));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn tau(&self) -> f64 {
        self.duration / self.steps as f64
    }

    /// `x_i` for `i = 1..N`.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        (1..=self.n_points).map(|i| i as f64 * h).collect()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau()
    }

    /// Number of qubits encoding one field.
    pub fn n_qubits(&self) -> usize {
        self.n_points.trailing_zeros() as usize
    }
}

/// Initial condition `u(0, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialProfile {
    /// `x (1 - x)`.
    Parabola,
    /// `sin(2 pi x)`.
    Sine,
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-rate x)`.
    Exponential {
        amplitude: f64,
        rate: f64,
    },
}

impl InitialProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialProfile::Parabola => x * (1.0 - x),
            InitialProfile::Sine => (2.0 * std::f64::consts::PI * x).sin(),
            InitialProfile::Constant { value } => value,
            InitialProfile::Exponential { amplitude, rate } => amplitude * (-rate * x).exp(),
        }
    }
}

/// Samples `profile` at `x_i = i L / N`, `i = 1..N`.
pub fn sample_initial(profile: &InitialProfile, n_points: usize, length: f64) -> Result<Vec<f64>> {
    let domain = Domain::new(length, 1.0, n_points, 1)?;
    Ok(domain
        .nodes()
        .into_iter()
        .map(|x| profile.eval(x))
        .collect())
}

fn check_alpha(name: &'static str, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(name, format!("{alpha} is outside (0, 1]")));
    }
    Ok(())
}

/// Time discretisation of the diffusion operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Fully implicit diffusion (first order in time for `alpha = 1`).
    #[default]
    Implicit,
    /// Diffusion split evenly between the new and the previous step.
    CrankNicolson,
}

/// `D_t^alpha u = u_xx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubdiffusionProblem {
    pub alpha: f64,
    pub domain: Domain,
    pub boundary: Boundary,
    pub initial: InitialProfile,
    pub scheme: Scheme,
    /// Number of most recent history states kept; `None` keeps all.
    pub truncation: Option<usize>,
}

impl SubdiffusionProblem {
    /// Dirichlet problem from `x (1 - x)` with the implicit scheme.
    pub fn new(alpha: f64, domain: Domain) -> Result<Self> {
        let p = Self {
            alpha,
            domain,
            boundary: Boundary::Dirichlet,
            initial: InitialProfile::Parabola,
            scheme: Scheme::Implicit,
            truncation: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha("alpha", self.alpha)?;
        self.domain.validate()?;
        if let Some(xi) = self.truncation {
            if xi == 0 || xi > self.domain.steps {
                return Err(Error::invalid(
                    "truncation",
                    format!("{xi} is outside 1..={}", self.domain.steps),
                ));
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> Result<CaputoWeights> {
        CaputoWeights::new(self.alpha, self.domain.tau(), self.domain.steps)
    }

    /// `a = 1 / (g h^2)`.
    pub fn a(&self) -> Result<f64> {
        Ok(1.0 / (self.weights()?.g() * self.domain.h().powi(2)))
    }

    pub fn matrix(&self) -> Result<SystemMatrix> {
        SystemMatrix::new(self.domain.n_points, self.a()?, self.boundary)
    }

    pub fn crank_nicolson(&self) -> Result<CrankNicolsonPair> {
        CrankNicolsonPair::new(self.domain.n_points, self.a()?, self.boundary)
    }

    pub fn initial_values(&self) -> Result<Vec<f64>> {
        sample_initial(&self.initial, self.domain.n_points, self.domain.length)
    }
}

/// `D_t^alpha u = nu u_xx - u u_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurgersProblem {
    pub alpha: f64,
    pub nu: f64,
    pub domain: Domain,
    pub boundary: Boundary,
    pub initial: InitialProfile,
}

impl BurgersProblem {
    /// Characteristic velocity used for the Reynolds number only.
    pub const CHARACTERISTIC_VELOCITY: f64 = 1.0;

    /// Dirichlet problem from `sin(2 pi x)`.
    pub fn new(alpha: f64, nu: f64, domain: Domain) -> Result<Self> {
        let p = Self {
            alpha,
            nu,
            domain,
            boundary: Boundary::Dirichlet,
            initial: InitialProfile::Sine,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha("alpha", self.alpha)?;
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::invalid(
                "nu",
                format!("{} must be non-negative", self.nu),
            ));
        }
        self.domain.validate()
    }

    pub fn weights(&self) -> Result<CaputoWeights> {
        CaputoWeights::new(self.alpha, self.domain.tau(), self.domain.steps)
    }

    /// Diffusion coefficient `a = nu / (g h^2)`.
    pub fn a(&self) -> Result<f64> {
        Ok(self.nu / (self.weights()?.g() * self.domain.h().powi(2)))
    }

    /// Advection coefficient `b = 1 / (2 g h)`.
    pub fn b_adv(&self) -> Result<f64> {
        Ok(1.0 / (2.0 * self.weights()?.g() * self.domain.h()))
    }

    pub fn matrix(&self) -> Result<SystemMatrix> {
        SystemMatrix::new(self.domain.n_points, self.a()?, self.boundary)
    }

    /// `Re = 2 u_c L / nu`.
    pub fn reynolds(&self) -> f64 {
        2.0 * Self::CHARACTERISTIC_VELOCITY * self.domain.length / self.nu
    }

    pub fn initial_values(&self) -> Result<Vec<f64>> {
        sample_initial(&self.initial, self.domain.n_points, self.domain.length)
    }
}

/// Cohorts of the epidemic model, in marching order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cohort {
    S,
    E,
    I,
    R,
}

impl Cohort {
    pub const ALL: [Cohort; 4] = [Cohort::S, Cohort::E, Cohort::I, Cohort::R];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Cohort::S => "S",
            Cohort::E => "E",
            Cohort::I => "I",
            Cohort::R => "R",
        }
    }
}

/// Rates of the SEIR reaction terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeirParams {
    /// Recruitment `Pi`.
    pub recruitment: f64,
    /// Transmission `beta`.
    pub beta: f64,
    /// Natural death `mu`.
    pub mu: f64,
    /// Incubation `sigma`.
    pub sigma: f64,
    /// Recovery `rho`.
    pub rho: f64,
}

impl SeirParams {
    /// Reference parameter set with `R ~ 0.67`.
    pub const REFERENCE: SeirParams = SeirParams {
        recruitment: 750.0,
        beta: 5.1e-6,
        mu: 0.03325,
        sigma: 0.17,
        rho: 0.1109,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("seir.recruitment", self.recruitment),
            ("seir.beta", self.beta),
            ("seir.mu", self.mu),
            ("seir.sigma", self.sigma),
            ("seir.rho", self.rho),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    "seir",
                    format!("{name} = {v} must be non-negative"),
                ));
            }
        }
        Ok(())
    }

    /// Linear loss rate of each cohort.
    pub fn removal_rate(&self, cohort: Cohort) -> f64 {
        match cohort {
            Cohort::S | Cohort::R => self.mu,
            Cohort::E => self.sigma + self.mu,
            Cohort::I => self.rho + self.mu,
        }
    }
}

/// Basic reproduction number `beta sigma Pi / (mu (mu + sigma) (mu + rho))`.
pub fn reproduction_number(p: &SeirParams) -> Result<f64> {
    let denom = p.mu * (p.mu + p.sigma) * (p.mu + p.rho);
    if denom == 0.0 {
        return Err(Error::invalid(
            "seir",
            "mu (mu + sigma) (mu + rho) vanishes",
        ));
    }
    Ok(p.beta * p.sigma * p.recruitment / denom)
}

/// Fractional diffusive SEIR model with one field per cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeirProblem {
    /// Fractional order per cohort (S, E, I, R).
    pub alphas: [f64; 4],
    /// Diffusion coefficient per cohort.
    pub nus: [f64; 4],
    pub params: SeirParams,
    pub domain: Domain,
    pub boundary: Boundary,
    pub initial: [InitialProfile; 4],
}

impl SeirProblem {
    /// Reference setup: Neumann boundaries on `[0, 1]`, `S = 22500`,
    /// `I = 20 exp(-2x)`, `E = R = 1`.
    pub fn reference(alpha: f64, domain: Domain) -> Result<Self> {
        let p = Self {
            alphas: [alpha; 4],
            nus: [1e-3, 1e-3, 5e-4, 5e-4],
            params: SeirParams::REFERENCE,
            domain,
            boundary: Boundary::Neumann,
            initial: [
                InitialProfile::Constant { value: 22_500.0 },
                InitialProfile::Constant { value: 1.0 },
                InitialProfile::Exponential {
                    amplitude: 20.0,
                    rate: 2.0,
                },
                InitialProfile::Constant { value: 1.0 },
            ],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for &a in &self.alphas {
            check_alpha("seir.alphas", a)?;
        }
        for &nu in &self.nus {
            if !(nu >= 0.0 && nu.is_finite()) {
                return Err(Error::invalid(
                    "seir.nus",
                    format!("{nu} must be non-negative"),
                ));
            }
        }
        self.params.validate()?;
        self.domain.validate()
    }

    pub fn weights(&self, cohort: Cohort) -> Result<CaputoWeights> {
        CaputoWeights::new(
            self.alphas[cohort.index()],
            self.domain.tau(),
            self.domain.steps,
        )
    }

    /// `(rate + g) I - nu / h^2 L`, without the transmission term of `S`.
    pub fn matrix(&self, cohort: Cohort) -> Result<SystemMatrix> {
        let g = self.weights(cohort)?.g();
        let diff = self.nus[cohort.index()] / self.domain.h().powi(2);
        SystemMatrix::from_parts(
            self.domain.n_points,
            self.params.removal_rate(cohort) + g + 2.0 * diff,
            diff,
            self.boundary,
        )
    }

    pub fn initial_values(&self, cohort: Cohort) -> Result<Vec<f64>> {
        sample_initial(
            &self.initial[cohort.index()],
            self.domain.n_points,
            self.domain.length,
        )
    }
}

/// Any of the supported problem families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    Subdiffusion(SubdiffusionProblem),
    Burgers(BurgersProblem),
    Seir(SeirProblem),
}

impl Problem {
    pub fn domain(&self) -> &Domain {
        match self {
            Problem::Subdiffusion(p) => &p.domain,
            Problem::Burgers(p) => &p.domain,
            Problem::Seir(p) => &p.domain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Problem::Subdiffusion(p) => p.validate(),
            Problem::Burgers(p) => p.validate(),
            Problem::Seir(p) => p.validate(),
        }
    }

    /// Names of the solution fields, one per marched state.
    pub fn field_names(&self) -> Vec<&'static str> {
        match self {
            Problem::Seir(_) => Cohort::ALL.iter().map(|c| c.name()).collect(),
            _ => vec!["u"],
        }
    }

    /// Initial values of every field.
    pub fn initial_values(&self) -> Result<Vec<Vec<f64>>> {
        match self {
            Problem::Subdiffusion(p) => Ok(vec![p.initial_values()?]),
            Problem::Burgers(p) => Ok(vec![p.initial_values()?]),
            Problem::Seir(p) => Cohort::ALL.iter().map(|&c| p.initial_values(c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_uses_interior_and_right_nodes() {
        let v = sample_initial(&InitialProfile::Parabola, 4, 1.0).unwrap();
        assert_eq!(v, vec![0.1875, 0.25, 0.1875, 0.0]);
        let s = sample_initial(&InitialProfile::Sine, 4, 1.0).unwrap();
        let want = [1.0, 0.0, -1.0, 0.0];
        for (g, w) in s.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        let c = sample_initial(&InitialProfile::Constant { value: 3.0 }, 8, 2.0).unwrap();
        assert!(c.iter().all(|&x| x == 3.0));
        assert!(sample_initial(&InitialProfile::Sine, 6, 1.0).is_err());
    }

    #[test]
    fn subdiffusion_constants() {
        let p = SubdiffusionProblem::new(0.5, Domain::new(1.0, 0.5, 32, 32).unwrap()).unwrap();
        let g = p.weights().unwrap().g();
        let h = p.domain.h();
        assert!((p.a().unwrap() * g * h * h - 1.0).abs() < 1e-15);
        assert!(SubdiffusionProblem::new(1.5, p.domain).is_err());
    }

    #[test]
    fn burgers_constants() {
        let p = BurgersProblem::new(1.0, 0.02, Domain::new(1.0, 1.0, 32, 32).unwrap()).unwrap();
        assert!((p.reynolds() - 100.0).abs() < 1e-12);
        let ratio = p.a().unwrap() / p.b_adv().unwrap();
        assert!((ratio - 2.0 * p.nu / p.domain.h()).abs() < 1e-12);
    }

    #[test]
    fn reproduction_numbers() {
        let r = reproduction_number(&SeirParams::REFERENCE).unwrap();
        assert!((r - 0.6675).abs() < 5e-4, "{r}");
        let doubled = SeirParams {
            beta: 2.0 * SeirParams::REFERENCE.beta,
            ..SeirParams::REFERENCE
        };
        let r2 = reproduction_number(&doubled).unwrap();
        assert!((r2 - 2.0 * r).abs() < 1e-12);
        assert!((r2 - 1.33).abs() < 0.01);
        let zero = SeirParams {
            beta: 0.0,
            ..SeirParams::REFERENCE
        };
        assert_eq!(reproduction_number(&zero).unwrap(), 0.0);
        let dead = SeirParams {
            mu: 0.0,
            ..SeirParams::REFERENCE
        };
        assert!(reproduction_number(&dead).is_err());
    }

    #[test]
    fn reproduction_number_monotonicity() {
        let base = SeirParams::REFERENCE;
        let r0 = reproduction_number(&base).unwrap();
        let up = |p: SeirParams| reproduction_number(&p).unwrap();
        assert!(
            up(SeirParams {
                beta: base.beta * 1.1,
                ..base
            }) > r0
        );
        assert!(
            up(SeirParams {
                recruitment: base.recruitment * 1.1,
                ..base
            }) > r0
        );
        assert!(
            up(SeirParams {
                mu: base.mu * 1.1,
                ..base
            }) < r0
        );
    }

    #[test]
    fn seir_cohort_matrices() {
        let p = SeirProblem::reference(1.0, Domain::new(1.0, 100.0, 16, 32).unwrap()).unwrap();
        let m = p.matrix(Cohort::I).unwrap();
        let g = p.weights(Cohort::I).unwrap().g();
        let diff = 5e-4 * 256.0;
        assert!((m.b() - (0.1109 + 0.03325 + g + 2.0 * diff)).abs() < 1e-12);
        assert!((m.a() - diff).abs() < 1e-15);
        // Neumann corners keep row sums at the reaction rate plus g.
        let d = m.dense();
        for row in &d {
            let s: f64 = row.iter().sum();
            assert!((s - (0.1109 + 0.03325 + g)).abs() < 1e-12);
        }
        assert_eq!(p.initial_values(Cohort::S).unwrap(), vec![22_500.0; 16]);
        let i0 = p.initial_values(Cohort::I).unwrap();
        assert!((i0[15] - 20.0 * (-2.0f64).exp()).abs() < 1e-12);
    }
}
