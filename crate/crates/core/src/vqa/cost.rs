//! Per-step cost functions.
//!
//! Every scheme leads to a step of the form `Q r^2 / 2 - P r` where
//! `Q = <u|E|u>` is an energy (quadratic in the ansatz state) and `P` a
//! source overlap (linear in it). Minimizing over the norm gives
//! `r = P / Q` and the angle-only cost `C = -P^2 / (2 Q)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{CaputoWeights, CrankNicolsonPair, HistoryCoefficients, SystemMatrix};
use crate::measurement::{Encoded, Estimator, Neighbor};
use crate::models::{BurgersProblem, Cohort, SeirProblem};
use crate::statevector::AnsatzSpec;

/// A stored solution `r |u(theta)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stored {
    pub state: Encoded,
    pub r: f64,
}

impl Stored {
    pub fn new(spec: AnsatzSpec, theta: Vec<f64>, r: f64) -> Result<Self> {
        Ok(Self {
            state: Encoded::new(spec, theta)?,
            r,
        })
    }

    /// Solution values `r u`.
    pub fn values(&self) -> Vec<f64> {
        self.state.amplitudes().iter().map(|a| self.r * a).collect()
    }
}

/// Linear contribution to the source overlap `P(u)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceTerm {
    /// `coeff <u|v>`.
    Overlap { coeff: f64, state: Encoded },
    /// `coeff sum_x u_x`.
    Uniform { coeff: f64 },
    /// `coeff sum_x u_x a_x b_{x'}` with `x'` per `neighbor`.
    Product {
        coeff: f64,
        a: Encoded,
        b: Encoded,
        neighbor: Option<Neighbor>,
    },
    /// `coeff <u|M|v>`.
    Matrix {
        coeff: f64,
        matrix: SystemMatrix,
        state: Encoded,
    },
}

/// Quadratic contribution to the energy `Q(u, u)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyTerm {
    /// `coeff <u|M|u>`.
    Matrix { coeff: f64, matrix: SystemMatrix },
    /// `coeff sum_x u_x^2 d_x`.
    Diagonal { coeff: f64, state: Encoded },
}

/// Values of one cost evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub cost: f64,
    pub source: f64,
    pub energy: f64,
}

impl Evaluation {
    /// Optimal norm `P / Q`.
    pub fn norm(&self) -> f64 {
        self.source / self.energy
    }
}

/// Cost function of one time step (one cohort for the epidemic model).
#[derive(Debug, Clone, PartialEq)]
pub struct StepCost {
    spec: AnsatzSpec,
    sources: Vec<SourceTerm>,
    energy: Vec<EnergyTerm>,
}

fn history_sources(
    weights: &CaputoWeights,
    k: usize,
    truncation: Option<usize>,
    history: &[Stored],
    scale: f64,
) -> Result<Vec<SourceTerm>> {
    let coeffs = HistoryCoefficients::new(weights, k, truncation)?;
    coeffs
        .terms
        .iter()
        .map(|&(j, c)| {
            let s = history.get(j).ok_or(Error::MissingHistory(j))?;
            Ok(SourceTerm::Overlap {
                coeff: scale * c * s.r,
                state: s.state.clone(),
            })
        })
        .collect()
}

fn previous(history: &[Stored], k: usize) -> Result<&Stored> {
    k.checked_sub(1)
        .and_then(|j| history.get(j))
        .ok_or(Error::MissingHistory(k.saturating_sub(1)))
}

impl StepCost {
    pub fn new(spec: AnsatzSpec, sources: Vec<SourceTerm>, energy: Vec<EnergyTerm>) -> Self {
        Self {
            spec,
            sources,
            energy,
        }
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn sources(&self) -> &[SourceTerm] {
        &self.sources
    }

    pub fn energy_terms(&self) -> &[EnergyTerm] {
        &self.energy
    }

    /// Implicit fractional step `A u^k = w_k u^0 - sum dw_j u^{k-j}`;
    /// `history[j]` holds step `j`.
    pub fn fractional(
        spec: AnsatzSpec,
        weights: &CaputoWeights,
        k: usize,
        truncation: Option<usize>,
        matrix: SystemMatrix,
        history: &[Stored],
    ) -> Result<Self> {
        let sources = history_sources(weights, k, truncation, history, 1.0)?;
        Ok(Self::new(
            spec,
            sources,
            vec![EnergyTerm::Matrix { coeff: 1.0, matrix }],
        ))
    }

    /// Fractional step plus the explicit advection source
    /// `-b r^2 (sum u v_{x+1} v_x - sum u v_{x-1} v_x)` of the previous
    /// state `r v`.
    pub fn burgers(
        spec: AnsatzSpec,
        problem: &BurgersProblem,
        k: usize,
        history: &[Stored],
    ) -> Result<Self> {
        let weights = problem.weights()?;
        let mut cost = Self::fractional(spec, &weights, k, None, problem.matrix()?, history)?;
        let prev = previous(history, k)?;
        let c = problem.b_adv()? * prev.r * prev.r;
        for (neighbor, sign) in [(Neighbor::Next, -1.0), (Neighbor::Prev, 1.0)] {
            cost.sources.push(SourceTerm::Product {
                coeff: sign * c,
                a: prev.state.clone(),
                b: prev.state.clone(),
                neighbor: Some(neighbor),
            });
        }
        Ok(cost)
    }

    /// Crank–Nicolson step `(I - B) u^k = B u^{k-1} + history`.
    pub fn crank_nicolson(
        spec: AnsatzSpec,
        weights: &CaputoWeights,
        k: usize,
        truncation: Option<usize>,
        pair: &CrankNicolsonPair,
        history: &[Stored],
    ) -> Result<Self> {
        let mut sources = history_sources(weights, k, truncation, history, 1.0)?;
        let prev = previous(history, k)?;
        sources.push(SourceTerm::Matrix {
            coeff: prev.r,
            matrix: pair.rhs,
            state: prev.state.clone(),
        });
        Ok(Self::new(
            spec,
            sources,
            vec![EnergyTerm::Matrix {
                coeff: 1.0,
                matrix: pair.lhs,
            }],
        ))
    }

    /// Cost of one epidemic cohort at step `k`. `histories[c]` holds the
    /// stored steps of cohort `c`; couplings use step `k - 1` throughout.
    pub fn seir(
        spec: AnsatzSpec,
        problem: &SeirProblem,
        cohort: Cohort,
        k: usize,
        histories: &[Vec<Stored>; 4],
    ) -> Result<Self> {
        let p = problem.params;
        let weights = problem.weights(cohort)?;
        let own = &histories[cohort.index()];
        let mut sources = history_sources(&weights, k, None, own, weights.g())?;
        let mut energy = vec![EnergyTerm::Matrix {
            coeff: 1.0,
            matrix: problem.matrix(cohort)?,
        }];
        let prev = |c: Cohort| previous(&histories[c.index()], k);
        match cohort {
            Cohort::S => {
                let i = prev(Cohort::I)?;
                energy.push(EnergyTerm::Diagonal {
                    coeff: p.beta * i.r,
                    state: i.state.clone(),
                });
                sources.push(SourceTerm::Uniform {
                    coeff: p.recruitment,
                });
            }
            Cohort::E => {
                let (i, s) = (prev(Cohort::I)?, prev(Cohort::S)?);
                sources.push(SourceTerm::Product {
                    coeff: p.beta * i.r * s.r,
                    a: i.state.clone(),
                    b: s.state.clone(),
                    neighbor: None,
                });
            }
            Cohort::I => {
                let e = prev(Cohort::E)?;
                sources.push(SourceTerm::Overlap {
                    coeff: p.sigma * e.r,
                    state: e.state.clone(),
                });
            }
            Cohort::R => {
                let i = prev(Cohort::I)?;
                sources.push(SourceTerm::Overlap {
                    coeff: p.rho * i.r,
                    state: i.state.clone(),
                });
            }
        }
        Ok(Self::new(spec, sources, energy))
    }

    /// Source overlap `P(v)`.
    pub fn source(&self, est: &Estimator, v: &Encoded) -> Result<f64> {
        let mut total = 0.0;
        for term in &self.sources {
            total += match term {
                SourceTerm::Overlap { coeff, state } => coeff * est.overlap(v, state)?,
                SourceTerm::Uniform { coeff } => coeff * est.uniform_overlap(v)?,
                SourceTerm::Product {
                    coeff,
                    a,
                    b,
                    neighbor,
                } => coeff * est.product_overlap(v, a, b, *neighbor)?,
                SourceTerm::Matrix {
                    coeff,
                    matrix,
                    state,
                } => coeff * est.matrix_overlap(v, state, matrix)?,
            };
        }
        Ok(total)
    }

    /// Energy `Q(u, u)`.
    pub fn energy(&self, est: &Estimator, u: &Encoded) -> Result<f64> {
        let mut total = 0.0;
        for term in &self.energy {
            total += match term {
                EnergyTerm::Matrix { coeff, matrix } => {
                    coeff * est.expect_hamiltonian(u, matrix)?
                }
                EnergyTerm::Diagonal { coeff, state } => {
                    coeff * est.diagonal_expectation(u, state)?
                }
            };
        }
        Ok(total)
    }

    /// Symmetric bilinear energy `Q(v, u)`.
    pub fn energy_bilinear(&self, est: &Estimator, v: &Encoded, u: &Encoded) -> Result<f64> {
        let mut total = 0.0;
        for term in &self.energy {
            total += match term {
                EnergyTerm::Matrix { coeff, matrix } => coeff * est.matrix_overlap(v, u, matrix)?,
                EnergyTerm::Diagonal { coeff, state } => {
                    coeff * est.product_overlap(v, u, state, None)?
                }
            };
        }
        Ok(total)
    }

    pub fn encode(&self, theta: &[f64]) -> Result<Encoded> {
        Encoded::new(self.spec, theta.to_vec())
    }

    pub fn evaluate_encoded(&self, est: &Estimator, u: &Encoded) -> Result<Evaluation> {
        let source = self.source(est, u)?;
        let energy = self.energy(est, u)?;
        if !(energy > 0.0) {
            return Err(Error::Singular(format!("non-positive energy {energy}")));
        }
        Ok(Evaluation {
            cost: -0.5 * source * source / energy,
            source,
            energy,
        })
    }

    pub fn evaluate(&self, est: &Estimator, theta: &[f64]) -> Result<Evaluation> {
        self.evaluate_encoded(est, &self.encode(theta)?)
    }

    /// Angle-only cost `-P^2 / (2 Q)`.
    pub fn cost(&self, est: &Estimator, theta: &[f64]) -> Result<f64> {
        Ok(self.evaluate(est, theta)?.cost)
    }

    /// Two-variable cost `Q r^2 / 2 - P r` before norm elimination.
    pub fn cost_with_norm(&self, est: &Estimator, r: f64, theta: &[f64]) -> Result<f64> {
        let u = self.encode(theta)?;
        Ok(0.5 * r * r * self.energy(est, &u)? - r * self.source(est, &u)?)
    }

    /// Optimal norm `P / Q` at `theta`.
    pub fn optimal_norm(&self, est: &Estimator, theta: &[f64]) -> Result<f64> {
        Ok(self.evaluate(est, theta)?.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::Boundary;
    use crate::models::{Domain, InitialProfile, SeirParams};
    use crate::statevector::Topology;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_theta(spec: &AnsatzSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..spec.n_params())
            .map(|_| rng.random_range(-PI..PI))
            .collect()
    }

    fn random_history(spec: AnsatzSpec, len: usize, rng: &mut ChaCha8Rng) -> Vec<Stored> {
        (0..len)
            .map(|_| {
                Stored::new(spec, random_theta(&spec, rng), rng.random_range(0.5..2.0)).unwrap()
            })
            .collect()
    }

    fn dense_apply(m: &SystemMatrix, x: &[f64]) -> Vec<f64> {
        m.dense()
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn orthogonal_history_gives_zero_cost() {
        let spec = AnsatzSpec::new(1, 1, Topology::Linear).unwrap();
        let w = CaputoWeights::new(1.0, 0.1, 2).unwrap();
        let m = SystemMatrix::new(2, 0.0, Boundary::Dirichlet).unwrap();
        let hist = vec![Stored::new(spec, vec![PI], 1.0).unwrap()];
        let cost = StepCost::fractional(spec, &w, 1, None, m, &hist).unwrap();
        assert!(cost.cost(&Estimator::exact(), &[0.0]).unwrap().abs() < 1e-30);
    }

    #[test]
    fn identity_system_reproduces_source_norm() {
        // A = I, source 2|u>: r = 2.
        let spec = AnsatzSpec::new(2, 1, Topology::Linear).unwrap();
        let theta = vec![0.4, -1.1];
        let m = SystemMatrix::new(4, 0.0, Boundary::Dirichlet).unwrap();
        let u = Encoded::new(spec, theta.clone()).unwrap();
        let cost = StepCost::new(
            spec,
            vec![SourceTerm::Overlap {
                coeff: 2.0,
                state: u,
            }],
            vec![EnergyTerm::Matrix {
                coeff: 1.0,
                matrix: m,
            }],
        );
        let r = cost.optimal_norm(&Estimator::exact(), &theta).unwrap();
        assert!((r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fractional_cost_matches_dense_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = AnsatzSpec::new(2, 2, Topology::Linear).unwrap();
        let w = CaputoWeights::new(0.6, 0.05, 8).unwrap();
        let m = SystemMatrix::new(4, 0.9, Boundary::Neumann).unwrap();
        let hist = random_history(spec, 4, &mut rng);
        let k = 4;
        let cost = StepCost::fractional(spec, &w, k, None, m, &hist).unwrap();
        let theta = random_theta(&spec, &mut rng);
        let u = spec.prepare(&theta).unwrap().into_amplitudes();
        let vals: Vec<Vec<f64>> = hist.iter().map(Stored::values).collect();
        let mut f = vec![0.0; 4];
        for (x, fx) in f.iter_mut().enumerate() {
            *fx = w.weight(k) * vals[0][x]
                - (1..k)
                    .map(|j| w.weight_diff(j) * vals[k - j][x])
                    .sum::<f64>();
        }
        let p = dot(&u, &f);
        let q = dot(&u, &dense_apply(&m, &u));
        let want = -0.5 * p * p / q;
        let got = cost.cost(&Estimator::exact(), &theta).unwrap();
        assert!((got - want).abs() < 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn unit_order_cost_uses_only_previous_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = AnsatzSpec::new(2, 1, Topology::Linear).unwrap();
        let w = CaputoWeights::new(1.0, 0.1, 5).unwrap();
        let m = SystemMatrix::new(4, 0.3, Boundary::Periodic).unwrap();
        let hist = random_history(spec, 3, &mut rng);
        let cost = StepCost::fractional(spec, &w, 3, None, m, &hist).unwrap();
        assert_eq!(cost.sources().len(), 1);
        match &cost.sources()[0] {
            SourceTerm::Overlap { coeff, state } => {
                assert_eq!(*coeff, hist[2].r);
                assert_eq!(state, &hist[2].state);
            }
            other => panic!("unexpected term {other:?}"),
        }
    }

    #[test]
    fn norm_elimination_matches_two_variable_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = AnsatzSpec::new(2, 2, Topology::Linear).unwrap();
        let w = CaputoWeights::new(0.5, 0.1, 4).unwrap();
        let m = SystemMatrix::new(4, 1.3, Boundary::Dirichlet).unwrap();
        let hist = random_history(spec, 3, &mut rng);
        let cost = StepCost::fractional(spec, &w, 3, None, m, &hist).unwrap();
        let est = Estimator::exact();
        let theta = random_theta(&spec, &mut rng);
        let r = cost.optimal_norm(&est, &theta).unwrap();
        let c = cost.cost(&est, &theta).unwrap();
        assert!((cost.cost_with_norm(&est, r, &theta).unwrap() - c).abs() < 1e-12);
        for dr in [-1e-3, 1e-3] {
            assert!(cost.cost_with_norm(&est, r + dr, &theta).unwrap() > c);
        }
    }

    #[test]
    fn burgers_uniform_previous_state_has_no_advection() {
        let domain = Domain::new(1.0, 1.0, 4, 4).unwrap();
        let problem = BurgersProblem::new(0.7, 0.02, domain).unwrap();
        let spec = AnsatzSpec::new(2, 1, Topology::Linear).unwrap();
        // RY(pi/2) on both qubits prepares the uniform state.
        let prev = Stored::new(spec, vec![PI / 2.0, PI / 2.0], 1.3).unwrap();
        let hist = vec![prev];
        let burgers = StepCost::burgers(spec, &problem, 1, &hist).unwrap();
        let plain = StepCost::fractional(
            spec,
            &problem.weights().unwrap(),
            1,
            None,
            problem.matrix().unwrap(),
            &hist,
        )
        .unwrap();
        let est = Estimator::exact();
        let theta = [0.3, -0.8];
        let (a, b) = (
            burgers.cost(&est, &theta).unwrap(),
            plain.cost(&est, &theta).unwrap(),
        );
        assert!((a - b).abs() < 1e-12 * b.abs());
    }

    #[test]
    fn burgers_cost_matches_dense_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let domain = Domain::new(1.0, 1.0, 8, 8).unwrap();
        let problem = BurgersProblem::new(0.8, 0.05, domain).unwrap();
        let spec = AnsatzSpec::new(3, 2, Topology::Circular).unwrap();
        let hist = random_history(spec, 3, &mut rng);
        let k = 3;
        let cost = StepCost::burgers(spec, &problem, k, &hist).unwrap();
        let theta = random_theta(&spec, &mut rng);
        let u = spec.prepare(&theta).unwrap().into_amplitudes();
        let w = problem.weights().unwrap();
        let vals: Vec<Vec<f64>> = hist.iter().map(Stored::values).collect();
        let v = &vals[k - 1];
        let b = problem.b_adv().unwrap();
        let f: Vec<f64> = (0..8)
            .map(|x| {
                w.weight(k) * vals[0][x]
                    - (1..k)
                        .map(|j| w.weight_diff(j) * vals[k - j][x])
                        .sum::<f64>()
                    - b * (v[(x + 1) % 8] - v[(x + 7) % 8]) * v[x]
            })
            .collect();
        let m = problem.matrix().unwrap();
        let p = dot(&u, &f);
        let want = -0.5 * p * p / dot(&u, &dense_apply(&m, &u));
        let got = cost.cost(&Estimator::exact(), &theta).unwrap();
        assert!((got - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn crank_nicolson_cost_matches_dense_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = AnsatzSpec::new(2, 2, Topology::Linear).unwrap();
        let w = CaputoWeights::new(0.7, 0.1, 4).unwrap();
        for boundary in Boundary::ALL {
            let pair = CrankNicolsonPair::new(4, 1.7, boundary).unwrap();
            let hist = random_history(spec, 2, &mut rng);
            let cost = StepCost::crank_nicolson(spec, &w, 2, None, &pair, &hist).unwrap();
            let theta = random_theta(&spec, &mut rng);
            let u = spec.prepare(&theta).unwrap().into_amplitudes();
            let vals: Vec<Vec<f64>> = hist.iter().map(Stored::values).collect();
            let bu = dense_apply(&pair.rhs, &vals[1]);
            let f: Vec<f64> = (0..4)
                .map(|x| bu[x] + w.weight(2) * vals[0][x] - w.weight_diff(1) * vals[1][x])
                .collect();
            let p = dot(&u, &f);
            let want = -0.5 * p * p / dot(&u, &dense_apply(&pair.lhs, &u));
            let got = cost.cost(&Estimator::exact(), &theta).unwrap();
            assert!(
                (got - want).abs() < 1e-10 * want.abs().max(1.0),
                "{boundary:?}"
            );
        }
    }

    #[test]
    fn crank_nicolson_without_diffusion_is_fractional_identity_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = AnsatzSpec::new(2, 1, Topology::Linear).unwrap();
        let w = CaputoWeights::new(0.5, 0.1, 4).unwrap();
        let pair = CrankNicolsonPair::new(4, 0.0, Boundary::Dirichlet).unwrap();
        let hist = random_history(spec, 3, &mut rng);
        let cn = StepCost::crank_nicolson(spec, &w, 3, None, &pair, &hist).unwrap();
        let id = SystemMatrix::new(4, 0.0, Boundary::Dirichlet).unwrap();
        let plain = StepCost::fractional(spec, &w, 3, None, id, &hist).unwrap();
        let est = Estimator::exact();
        let theta = random_theta(&spec, &mut rng);
        let (a, b) = (
            cn.cost(&est, &theta).unwrap(),
            plain.cost(&est, &theta).unwrap(),
        );
        assert!((a - b).abs() < 1e-14 * b.abs().max(1.0));
    }

    fn seir_setup(rng: &mut ChaCha8Rng) -> (AnsatzSpec, SeirProblem, [Vec<Stored>; 4]) {
        let spec = AnsatzSpec::new(2, 2, Topology::Linear).unwrap();
        let domain = Domain::new(1.0, 100.0, 4, 8).unwrap();
        let mut problem = SeirProblem::reference(0.8, domain).unwrap();
        problem.alphas = [0.8, 0.9, 0.7, 1.0];
        let hist = [
            random_history(spec, 2, rng),
            random_history(spec, 2, rng),
            random_history(spec, 2, rng),
            random_history(spec, 2, rng),
        ];
        (spec, problem, hist)
    }

    #[test]
    fn seir_costs_match_dense_assembly() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (spec, problem, hist) = seir_setup(&mut rng);
        let p = problem.params;
        let k = 2;
        let vals: Vec<Vec<Vec<f64>>> = hist
            .iter()
            .map(|h| h.iter().map(Stored::values).collect())
            .collect();
        let prev = |c: Cohort| &vals[c.index()][k - 1];
        for cohort in Cohort::ALL {
            let cost = StepCost::seir(spec, &problem, cohort, k, &hist).unwrap();
            let theta = random_theta(&spec, &mut rng);
            let u = spec.prepare(&theta).unwrap().into_amplitudes();
            let w = problem.weights(cohort).unwrap();
            let own = &vals[cohort.index()];
            let mut f: Vec<f64> = (0..4)
                .map(|x| w.g() * (w.weight(k) * own[0][x] - w.weight_diff(1) * own[1][x]))
                .collect();
            let m = problem.matrix(cohort).unwrap();
            let mut q = dot(&u, &dense_apply(&m, &u));
            for x in 0..4 {
                f[x] += match cohort {
                    Cohort::S => p.recruitment,
                    Cohort::E => p.beta * prev(Cohort::I)[x] * prev(Cohort::S)[x],
                    Cohort::I => p.sigma * prev(Cohort::E)[x],
                    Cohort::R => p.rho * prev(Cohort::I)[x],
                };
                if cohort == Cohort::S {
                    q += p.beta * prev(Cohort::I)[x] * u[x] * u[x];
                }
            }
            let pp = dot(&u, &f);
            let want = -0.5 * pp * pp / q;
            let got = cost.cost(&Estimator::exact(), &theta).unwrap();
            assert!(
                (got - want).abs() < 1e-10 * want.abs(),
                "{cohort:?}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn seir_without_coupling_is_plain_fractional() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (spec, mut problem, hist) = seir_setup(&mut rng);
        problem.params = SeirParams {
            beta: 0.0,
            recruitment: 0.0,
            ..problem.params
        };
        problem.initial[0] = InitialProfile::Constant { value: 1.0 };
        let cost = StepCost::seir(spec, &problem, Cohort::S, 2, &hist).unwrap();
        let w = problem.weights(Cohort::S).unwrap();
        // Scaling the matrix by 1/g turns the cohort system into the plain form.
        let m = problem.matrix(Cohort::S).unwrap().scaled(1.0 / w.g());
        let plain = StepCost::fractional(spec, &w, 2, None, m, &hist[0]).unwrap();
        let est = Estimator::exact();
        let theta = random_theta(&spec, &mut rng);
        let (a, b) = (
            cost.cost(&est, &theta).unwrap(),
            plain.cost(&est, &theta).unwrap(),
        );
        // C scales with g: -(gP)^2 / (2 g Q) = g C_plain.
        assert!((a - w.g() * b).abs() < 1e-10 * a.abs());
    }

    #[test]
    fn missing_history_is_reported() {
        let spec = AnsatzSpec::new(1, 1, Topology::Linear).unwrap();
        let w = CaputoWeights::new(0.5, 0.1, 4).unwrap();
        let m = SystemMatrix::new(2, 1.0, Boundary::Dirichlet).unwrap();
        let hist = vec![Stored::new(spec, vec![0.0], 1.0).unwrap()];
        assert!(matches!(
            StepCost::fractional(spec, &w, 3, None, m, &hist),
            Err(Error::MissingHistory(_))
        ));
    }
}
