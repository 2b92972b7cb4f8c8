//! Overlaps and expectation values entering the cost functions.
//!
//! Every quantity has two evaluations: [`Backend::Exact`] computes it directly
//! from the amplitudes (the system matrix through its observable
//! decomposition), [`Backend::Sampled`] runs the corresponding ancilla circuit
//! and estimates it from a finite number of shots, optionally with gate and
//! readout faults.
//!
//! Register layout of the sampled circuits: data register on qubits
//! `0..n`, a second data register (when needed) on `n..2n`, and the ancilla
//! on the highest qubit.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{Boundary, SystemMatrix};
use crate::noise::{readout_channel, run_noisy, NoiseConfig};
use crate::statevector::{
    controlled, dot, sample_counts, shift_gates, AnsatzSpec, Counts, Gate, ShiftDirection,
    StateVector,
};

/// Shot budget, seed and fault model of the sampled backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseConfig,
    /// Number of fault trajectories the shots are split over when gate noise
    /// is active.
    pub trajectories: usize,
}

impl SamplingConfig {
    pub fn noiseless(shots: u64, seed: u64) -> Self {
        Self {
            shots,
            seed,
            noise: NoiseConfig::NONE,
            trajectories: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::invalid("shots", "at least one shot is required"));
        }
        if self.trajectories == 0 {
            return Err(Error::invalid(
                "trajectories",
                "at least one trajectory is required",
            ));
        }
        self.noise.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    Exact,
    Sampled(SamplingConfig),
}

/// Which neighbour the diagonal factor of a product term is taken from:
/// `Next` gives `v_{x+1}`, `Prev` gives `v_{x-1}` (indices cyclic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Neighbor {
    Next,
    Prev,
}

impl Neighbor {
    /// Register shift that moves `v_{x±1}` onto index `x`.
    fn shift(self) -> ShiftDirection {
        match self {
            Neighbor::Next => ShiftDirection::Decrement,
            Neighbor::Prev => ShiftDirection::Increment,
        }
    }

    fn index(self, x: usize, dim: usize) -> usize {
        match self {
            Neighbor::Next => (x + 1) % dim,
            Neighbor::Prev => (x + dim - 1) % dim,
        }
    }
}

/// Simple observables whose (shift-conjugated) combination forms the system
/// matrix. With `P0` the projector on the all-zero state of every qubit but
/// the least significant one:
///
/// * `H1`, `H2`: X on the least significant qubit,
/// * `H3`: `P0 (x) X`,
/// * `H4`: `P0 (x) I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermKind {
    H1,
    H2,
    H3,
    H4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableTerm {
    pub kind: TermKind,
    /// Conjugated by the cyclic shift: `S^dagger O S`.
    pub shifted: bool,
    pub coeff: f64,
}

impl ObservableTerm {
    fn has_projector(&self) -> bool {
        matches!(self.kind, TermKind::H3 | TermKind::H4)
    }

    fn has_x(&self) -> bool {
        !matches!(self.kind, TermKind::H4)
    }

    /// `<u| O |v>` for amplitude vectors of equal power-of-two length.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let dim = u.len();
        // (S w)_x = w_{x-1}.
        let at = |w: &[f64], x: usize| {
            if self.shifted {
                w[(x + dim - 1) % dim]
            } else {
                w[x]
            }
        };
        let flip = if self.has_x() { 1 } else { 0 };
        let range = if self.has_projector() {
            0..2.min(dim)
        } else {
            0..dim
        };
        range.map(|x| at(u, x) * at(v, x ^ flip)).sum()
    }

    /// Per-shot value of the observable on a measured data outcome (after
    /// the basis change on the least significant qubit).
    fn outcome_value(&self, outcome: usize) -> f64 {
        if self.has_projector() && outcome >> 1 != 0 {
            return 0.0;
        }
        if self.has_x() && outcome & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Decomposition `M = diag * I + sum_t coeff_t O_t`.
///
/// The shifted X term closes the ring through the `(N-1, 0)` pair, which the
/// shifted `H3` removes again for non-periodic boundaries; the shifted `H4`
/// lowers both corner diagonals for Neumann boundaries.
pub fn decompose(matrix: &SystemMatrix) -> (f64, Vec<ObservableTerm>) {
    let a = matrix.a();
    let term = |kind, shifted, coeff| ObservableTerm {
        kind,
        shifted,
        coeff,
    };
    let mut terms = vec![term(TermKind::H1, false, -a), term(TermKind::H2, true, -a)];
    match matrix.boundary() {
        Boundary::Periodic => {}
        Boundary::Dirichlet => terms.push(term(TermKind::H3, true, a)),
        Boundary::Neumann => {
            terms.push(term(TermKind::H3, true, a));
            terms.push(term(TermKind::H4, true, -a));
        }
    }
    (matrix.b(), terms)
}

/// An ansatz state together with the parameters that prepare it.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    spec: AnsatzSpec,
    theta: Vec<f64>,
    state: StateVector,
}

impl Encoded {
    pub fn new(spec: AnsatzSpec, theta: Vec<f64>) -> Result<Self> {
        let state = spec.prepare(&theta)?;
        Ok(Self { spec, theta, state })
    }

    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn amplitudes(&self) -> &[f64] {
        self.state.amplitudes()
    }

    fn gates_on(&self, register: &[usize]) -> Vec<Gate> {
        // Parameter length was checked at construction.
        self.spec.gates(&self.theta, register).unwrap_or_default()
    }
}

fn check_same_size(a: &Encoded, b: &Encoded) -> Result<()> {
    if a.spec.n_qubits != b.spec.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: a.spec.n_qubits,
            got: b.spec.n_qubits,
        });
    }
    Ok(())
}

fn check_matrix(u: &Encoded, matrix: &SystemMatrix) -> Result<()> {
    if matrix.n_points() != u.spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.spec.dim(),
            got: matrix.n_points(),
        });
    }
    Ok(())
}

/// A circuit to sample: gates on `n_qubits` starting from `|0...0>`, then a
/// computational-basis measurement of `measured` (outcome bit `i` is qubit
/// `measured[i]`).
struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    measured: Vec<usize>,
}

/// Evaluates measurement primitives on one backend.
///
/// Sampled evaluations draw from a ChaCha stream selected by the running
/// circuit counter, so a fixed seed and call order reproduce every estimate.
#[derive(Debug)]
pub struct Estimator {
    backend: Backend,
    calls: AtomicU64,
}

impl Clone for Estimator {
    fn clone(&self) -> Self {
        Self {
            backend: self.backend,
            calls: AtomicU64::new(self.calls()),
        }
    }
}

impl Estimator {
    pub fn new(backend: Backend) -> Result<Self> {
        if let Backend::Sampled(cfg) = &backend {
            cfg.validate()?;
        }
        Ok(Self {
            backend,
            calls: AtomicU64::new(0),
        })
    }

    pub fn exact() -> Self {
        Self {
            backend: Backend::Exact,
            calls: AtomicU64::new(0),
        }
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.backend, Backend::Exact)
    }

    /// Number of primitive evaluations (exact) or circuits sampled so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn tick(&self) -> u64 {
        self.calls.fetch_add(1, Ordering::Relaxed)
    }

    /// `<u|v>`.
    pub fn overlap(&self, u: &Encoded, v: &Encoded) -> Result<f64> {
        check_same_size(u, v)?;
        match self.backend {
            Backend::Exact => {
                self.tick();
                Ok(dot(u.amplitudes(), v.amplitudes()))
            }
            Backend::Sampled(cfg) => {
                let n = u.spec.n_qubits;
                let circuit = Circuit {
                    n_qubits: n + 1,
                    gates: hadamard_test(
                        n,
                        &u.gates_on(&register(0, n)),
                        &v.gates_on(&register(0, n)),
                        &[],
                    ),
                    measured: vec![n],
                };
                let counts = self.sample(&cfg, &circuit)?;
                Ok(mean(&counts, cfg.shots, ancilla_sign))
            }
        }
    }

    /// `<u|M|u>` through the observable decomposition of `M`.
    pub fn expect_hamiltonian(&self, u: &Encoded, matrix: &SystemMatrix) -> Result<f64> {
        check_matrix(u, matrix)?;
        let (diag, terms) = decompose(matrix);
        match self.backend {
            Backend::Exact => {
                self.tick();
                let a = u.amplitudes();
                Ok(diag
                    + terms
                        .iter()
                        .map(|t| t.coeff * t.bilinear(a, a))
                        .sum::<f64>())
            }
            Backend::Sampled(cfg) => {
                let n = u.spec.n_qubits;
                let mut value = diag;
                for shifted in [false, true] {
                    let mut gates = u.gates_on(&register(0, n));
                    if shifted {
                        gates.extend(shift_gates(&register(0, n), ShiftDirection::Increment));
                    }
                    gates.push(Gate::h(0));
                    let circuit = Circuit {
                        n_qubits: n,
                        gates,
                        measured: register(0, n),
                    };
                    let counts = self.sample(&cfg, &circuit)?;
                    for t in terms.iter().filter(|t| t.shifted == shifted) {
                        value += t.coeff * mean(&counts, cfg.shots, |o| t.outcome_value(o));
                    }
                }
                Ok(value)
            }
        }
    }

    /// `<u|M|v>` through the observable decomposition of `M`.
    pub fn matrix_overlap(&self, u: &Encoded, v: &Encoded, matrix: &SystemMatrix) -> Result<f64> {
        check_same_size(u, v)?;
        check_matrix(u, matrix)?;
        let (diag, terms) = decompose(matrix);
        match self.backend {
            Backend::Exact => {
                self.tick();
                let (a, b) = (u.amplitudes(), v.amplitudes());
                Ok(diag * dot(a, b)
                    + terms
                        .iter()
                        .map(|t| t.coeff * t.bilinear(a, b))
                        .sum::<f64>())
            }
            Backend::Sampled(cfg) => {
                let n = u.spec.n_qubits;
                let data = register(0, n);
                let mut value = 0.0;
                for shifted in [false, true] {
                    let mut tail = Vec::new();
                    if shifted {
                        tail.extend(shift_gates(&data, ShiftDirection::Increment));
                    }
                    tail.push(Gate::h(0));
                    let mut gates = hadamard_test(n, &u.gates_on(&data), &v.gates_on(&data), &[]);
                    gates.extend(tail);
                    let mut measured = data.clone();
                    measured.push(n);
                    let circuit = Circuit {
                        n_qubits: n + 1,
                        gates,
                        measured,
                    };
                    let counts = self.sample(&cfg, &circuit)?;
                    let sign = |o: usize| if o >> n & 1 == 1 { -1.0 } else { 1.0 };
                    let data_bits = |o: usize| o & ((1 << n) - 1);
                    if !shifted {
                        value += diag * mean(&counts, cfg.shots, sign);
                    }
                    for t in terms.iter().filter(|t| t.shifted == shifted) {
                        value += t.coeff
                            * mean(&counts, cfg.shots, |o| {
                                sign(o) * t.outcome_value(data_bits(o))
                            });
                    }
                }
                Ok(value)
            }
        }
    }

    /// `sum_x u_x a_x b_{x'}` with `x' = x` or the neighbour selected by
    /// `neighbor` (cyclic).
    ///
    /// The circuit prepares `u` on the first register in the ancilla-0
    /// branch, and `a (x) b` on both registers in the ancilla-1 branch,
    /// followed by the optional shift of the second register and a bitwise
    /// CNOT from the first register onto the second. Only the `|x>|0>`
    /// components of the second branch survive the overlap with `|u>|0>`.
    /// The shift and the CNOT layer act on disjoint control conditions and
    /// commute with each other up to the order fixed here.
    pub fn product_overlap(
        &self,
        u: &Encoded,
        a: &Encoded,
        b: &Encoded,
        neighbor: Option<Neighbor>,
    ) -> Result<f64> {
        check_same_size(u, a)?;
        check_same_size(u, b)?;
        match self.backend {
            Backend::Exact => {
                self.tick();
                Ok(product_exact(
                    u.amplitudes(),
                    a.amplitudes(),
                    b.amplitudes(),
                    neighbor,
                ))
            }
            Backend::Sampled(cfg) => {
                let n = u.spec.n_qubits;
                let (r1, r2) = (register(0, n), register(n, n));
                let anc = 2 * n;
                let mut one = a.gates_on(&r1);
                one.extend(b.gates_on(&r2));
                if let Some(nb) = neighbor {
                    one.extend(shift_gates(&r2, nb.shift()));
                }
                one.extend((0..n).map(|i| Gate::cnot(r1[i], r2[i])));
                let circuit = Circuit {
                    n_qubits: 2 * n + 1,
                    gates: hadamard_test(anc, &u.gates_on(&r1), &one, &[]),
                    measured: vec![anc],
                };
                let counts = self.sample(&cfg, &circuit)?;
                Ok(mean(&counts, cfg.shots, ancilla_sign))
            }
        }
    }

    /// `sum_x u_x v_x v_{x±1}`: the nonlinear advection overlap.
    pub fn nonlinear_overlap(&self, u: &Encoded, v: &Encoded, neighbor: Neighbor) -> Result<f64> {
        self.product_overlap(u, v, v, Some(neighbor))
    }

    /// `<s| diag(d) |s> = sum_x s_x^2 d_x`.
    ///
    /// `s` is prepared unconditionally on the first register; the ancilla-0
    /// branch copies it onto the second register with a CNOT layer, the
    /// ancilla-1 branch prepares `d` there instead.
    pub fn diagonal_expectation(&self, s: &Encoded, d: &Encoded) -> Result<f64> {
        check_same_size(s, d)?;
        match self.backend {
            Backend::Exact => {
                self.tick();
                Ok(product_exact(
                    s.amplitudes(),
                    s.amplitudes(),
                    d.amplitudes(),
                    None,
                ))
            }
            Backend::Sampled(cfg) => {
                let n = s.spec.n_qubits;
                let (r1, r2) = (register(0, n), register(n, n));
                let anc = 2 * n;
                let copy: Vec<Gate> = (0..n).map(|i| Gate::cnot(r1[i], r2[i])).collect();
                let circuit = Circuit {
                    n_qubits: 2 * n + 1,
                    gates: hadamard_test(anc, &copy, &d.gates_on(&r2), &s.gates_on(&r1)),
                    measured: vec![anc],
                };
                let counts = self.sample(&cfg, &circuit)?;
                Ok(mean(&counts, cfg.shots, ancilla_sign))
            }
        }
    }

    /// `sum_x u_x = sqrt(2^n) <u|+...+>`.
    pub fn uniform_overlap(&self, u: &Encoded) -> Result<f64> {
        match self.backend {
            Backend::Exact => {
                self.tick();
                Ok(u.amplitudes().iter().sum())
            }
            Backend::Sampled(cfg) => {
                let n = u.spec.n_qubits;
                let plus: Vec<Gate> = (0..n).map(Gate::h).collect();
                let circuit = Circuit {
                    n_qubits: n + 1,
                    gates: hadamard_test(n, &u.gates_on(&register(0, n)), &plus, &[]),
                    measured: vec![n],
                };
                let counts = self.sample(&cfg, &circuit)?;
                Ok(mean(&counts, cfg.shots, ancilla_sign) * ((1u64 << n) as f64).sqrt())
            }
        }
    }

    /// Samples `circuit` with the configured shots, splitting them over fault
    /// trajectories when gate noise is active.
    fn sample(&self, cfg: &SamplingConfig, circuit: &Circuit) -> Result<Counts> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(self.tick());
        let trajectories = if cfg.noise.has_gate_noise() {
            (cfg.trajectories as u64).min(cfg.shots)
        } else {
            1
        };
        let mut counts = Counts::new();
        let base = cfg.shots / trajectories;
        let extra = cfg.shots % trajectories;
        for t in 0..trajectories {
            let shots = base + u64::from(t < extra);
            let mut state = StateVector::zero(circuit.n_qubits)?;
            if cfg.noise.has_gate_noise() {
                run_noisy(&mut state, &circuit.gates, &cfg.noise, &mut rng)?;
            } else {
                state.apply_gates(&circuit.gates)?;
            }
            let mut probs = marginal(&state, &circuit.measured);
            readout_channel(&mut probs, circuit.measured.len(), cfg.noise.readout);
            for (o, c) in sample_counts(&probs, shots, &mut rng) {
                *counts.entry(o).or_insert(0) += c;
            }
        }
        Ok(counts)
    }
}

fn register(start: usize, len: usize) -> Vec<usize> {
    (start..start + len).collect()
}

/// Hadamard test on ancilla `anc`: `common` unconditionally, then `zero`
/// on the ancilla-0 branch and `one` on the ancilla-1 branch, closing with
/// H on the ancilla. `<Z_anc>` then equals `<zero|one>` (real states).
fn hadamard_test(anc: usize, zero: &[Gate], one: &[Gate], common: &[Gate]) -> Vec<Gate> {
    let mut gates = common.to_vec();
    gates.push(Gate::h(anc));
    gates.extend(controlled(zero, anc, false));
    gates.extend(controlled(one, anc, true));
    gates.push(Gate::h(anc));
    gates
}

fn ancilla_sign(outcome: usize) -> f64 {
    if outcome & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn mean(counts: &Counts, shots: u64, f: impl Fn(usize) -> f64) -> f64 {
    counts.iter().map(|(&o, &c)| f(o) * c as f64).sum::<f64>() / shots as f64
}

/// Outcome distribution of the `measured` qubits.
fn marginal(state: &StateVector, measured: &[usize]) -> Vec<f64> {
    let mut probs = vec![0.0; 1 << measured.len()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let p = a * a;
        if p == 0.0 {
            continue;
        }
        let o = measured
            .iter()
            .enumerate()
            .fold(0, |o, (bit, &q)| o | ((i >> q) & 1) << bit);
        probs[o] += p;
    }
    probs
}

/// `sum_x u_x a_x b_{x'}` on plain amplitude vectors.
pub fn product_exact(u: &[f64], a: &[f64], b: &[f64], neighbor: Option<Neighbor>) -> f64 {
    let dim = u.len();
    (0..dim)
        .map(|x| {
            let y = neighbor.map_or(x, |nb| nb.index(x, dim));
            u[x] * a[x] * b[y]
        })
        .sum()
}
