//! Real-amplitude statevector engine.
//!
//! Every gate used by the ansaetze and measurement circuits (R_Y, X, Z, H,
//! CNOT, multi-controlled X and controlled versions of all of these) has a
//! real orthogonal matrix, so amplitudes are stored as `f64`.
//!
//! Qubit `q` is bit `q` of the basis-state index, i.e. qubit 0 is the least
//! significant bit.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the engine accepts.
pub const MAX_QUBITS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    Ry(f64),
    X,
    Z,
    H,
}

/// A single-target gate with an optional set of (anti-)controls.
///
/// Controls are stored as a bit mask together with the value the controlled
/// bits must take, so `ctrl_value` bits that are zero inside `ctrl_mask` are
/// anti-controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub ctrl_mask: usize,
    pub ctrl_value: usize,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            ctrl_mask: 0,
            ctrl_value: 0,
        }
    }

    pub fn ry(target: usize, theta: f64) -> Self {
        Self::new(GateKind::Ry(theta), target)
    }

    pub fn x(target: usize) -> Self {
        Self::new(GateKind::X, target)
    }

    pub fn z(target: usize) -> Self {
        Self::new(GateKind::Z, target)
    }

    pub fn h(target: usize) -> Self {
        Self::new(GateKind::H, target)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).controlled_by(control, true)
    }

    /// Multi-controlled X (Toffoli for two controls).
    pub fn mcx(controls: &[usize], target: usize) -> Self {
        controls
            .iter()
            .fold(Self::x(target), |g, &c| g.controlled_by(c, true))
    }

    /// Adds a control on `qubit`; `value = false` makes it an anti-control.
    pub fn controlled_by(mut self, qubit: usize, value: bool) -> Self {
        let bit = 1usize << qubit;
        self.ctrl_mask |= bit;
        if value {
            self.ctrl_value |= bit;
        } else {
            self.ctrl_value &= !bit;
        }
        self
    }

    /// Qubits the gate acts on: target first, then controls in ascending order.
    pub fn qubits(&self) -> Vec<usize> {
        let mut q = vec![self.target];
        let mut mask = self.ctrl_mask;
        while mask != 0 {
            let b = mask.trailing_zeros() as usize;
            q.push(b);
            mask &= mask - 1;
        }
        q
    }

    pub fn arity(&self) -> usize {
        1 + self.ctrl_mask.count_ones() as usize
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return Err(Error::Qubit(format!(
                "target {} out of range for {n_qubits} qubits",
                self.target
            )));
        }
        if self.ctrl_mask >> n_qubits != 0 {
            return Err(Error::Qubit(format!(
                "control out of range for {n_qubits} qubits"
            )));
        }
        if self.ctrl_mask & (1 << self.target) != 0 {
            return Err(Error::Qubit(format!(
                "qubit {} is both control and target",
                self.target
            )));
        }
        Ok(())
    }
}

/// Direction of the cyclic shift `|i> -> |i +- 1 mod 2^n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    Increment,
    Decrement,
}

impl ShiftDirection {
    pub fn inverse(self) -> Self {
        match self {
            ShiftDirection::Increment => ShiftDirection::Decrement,
            ShiftDirection::Decrement => ShiftDirection::Increment,
        }
    }
}

/// Gate cascade realising the cyclic shift on `register` (`register[0]` is
/// the least significant bit of the register value).
///
/// Increment flips each bit once every bit below it is set, starting from the
/// most significant bit, so the multi-controlled X gates come in descending
/// control count and finish with a CNOT and an X. Decrement is the same
/// sequence in reverse, i.e. the adjoint.
pub fn shift_gates(register: &[usize], direction: ShiftDirection) -> Vec<Gate> {
    let mut gates: Vec<Gate> = (0..register.len())
        .rev()
        .map(|t| Gate::mcx(&register[..t], register[t]))
        .collect();
    if direction == ShiftDirection::Decrement {
        gates.reverse();
    }
    gates
}

/// Appends `control` (with the given value) to every gate of a sequence.
pub fn controlled(gates: &[Gate], control: usize, value: bool) -> Vec<Gate> {
    gates
        .iter()
        .map(|g| g.controlled_by(control, value))
        .collect()
}

/// Entangling pattern of the real-amplitude ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Linear,
    Circular,
}

/// Shape of the layered R_Y + CNOT ansatz.
///
/// Parameters are layer-major: `theta[i * n + j]` drives the R_Y on wire `j`
/// of layer `i`. Wire 0 is the most significant qubit of the register, wire
/// `n - 1` the least significant one. Each layer applies R_Y on every wire,
/// then CNOT(wire j -> wire j+1) for j = 0..n-2, and for the circular
/// topology a closing CNOT(wire n-1 -> wire 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub layers: usize,
    pub topology: Topology,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, layers: usize, topology: Topology) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::invalid(
                "n_qubits",
                format!("{n_qubits} is outside 1..={MAX_QUBITS}"),
            ));
        }
        if layers == 0 {
            return Err(Error::invalid("layers", "at least one layer is required"));
        }
        if topology == Topology::Circular && n_qubits <= 2 {
            return Err(Error::invalid(
                "topology",
                "circular entanglement needs more than 2 qubits",
            ));
        }
        Ok(Self {
            n_qubits,
            layers,
            topology,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_qubits * self.layers
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        Ok(())
    }

    /// Gate list acting on `register` (LSB first, length `n_qubits`).
    pub fn gates(&self, params: &[f64], register: &[usize]) -> Result<Vec<Gate>> {
        self.check_params(params)?;
        if register.len() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: register.len(),
            });
        }
        let n = self.n_qubits;
        let wire = |j: usize| register[n - 1 - j];
        let mut gates = Vec::with_capacity(self.layers * (2 * n));
        for layer in params.chunks(n) {
            for (j, &theta) in layer.iter().enumerate() {
                gates.push(Gate::ry(wire(j), theta));
            }
            for j in 0..n - 1 {
                gates.push(Gate::cnot(wire(j), wire(j + 1)));
            }
            if self.topology == Topology::Circular {
                gates.push(Gate::cnot(wire(n - 1), wire(0)));
            }
        }
        Ok(gates)
    }

    /// Prepares `U(params)|0...0>` on a fresh `n_qubits` register.
    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        self.check_params(params)?;
        let n = self.n_qubits;
        let mut state = StateVector::zero(n)?;
        for layer in params.chunks(n) {
            for (j, &theta) in layer.iter().enumerate() {
                state.ry_unchecked(n - 1 - j, theta);
            }
            for j in 0..n - 1 {
                state.cnot_unchecked(n - 1 - j, n - 2 - j);
            }
            if self.topology == Topology::Circular {
                state.cnot_unchecked(0, n - 1);
            }
        }
        Ok(state)
    }
}

/// Histogram of sampled basis states.
pub type Counts = BTreeMap<usize, u64>;

/// Real amplitude vector over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<f64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::invalid(
                "n_qubits",
                format!("{n_qubits} exceeds {MAX_QUBITS}"),
            ));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Qubit(format!("basis index {index} out of range")));
        }
        let mut amps = vec![0.0; dim];
        amps[index] = 1.0;
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes as given; the length must be a power of two. No
    /// normalisation is applied.
    pub fn from_amplitudes(amps: Vec<f64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::invalid(
                "amplitudes",
                format!("length {} is not a power of two", amps.len()),
            ));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(Self { n_qubits, amps })
    }

    /// Normalised copy of `values`.
    pub fn normalized(values: &[f64]) -> Result<Self> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm("cannot normalise a zero vector"));
        }
        Self::from_amplitudes(values.iter().map(|v| v / norm).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Euclidean inner product of the amplitude vectors.
    pub fn inner_product(&self, other: &StateVector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(dot(&self.amps, &other.amps))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a * a).collect()
    }

    /// `self (x) other` with `self` occupying the low qubits.
    pub fn tensor(&self, high: &StateVector) -> Result<StateVector> {
        let n = self.n_qubits + high.n_qubits;
        if n > MAX_QUBITS {
            return Err(Error::invalid(
                "n_qubits",
                format!("{n} exceeds {MAX_QUBITS}"),
            ));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for h in &high.amps {
            amps.extend(self.amps.iter().map(|l| l * h));
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_gate_unchecked(gate);
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<()> {
        for g in gates {
            g.validate(self.n_qubits)?;
        }
        for g in gates {
            self.apply_gate_unchecked(g);
        }
        Ok(())
    }

    /// Applies `gates` only on the branch where `control` reads `value`.
    pub fn controlled_apply(&mut self, control: usize, value: bool, gates: &[Gate]) -> Result<()> {
        if control >= self.n_qubits {
            return Err(Error::Qubit(format!("control {control} out of range")));
        }
        if gates.iter().any(|g| g.qubits().contains(&control)) {
            return Err(Error::Qubit(format!(
                "control qubit {control} overlaps the target register"
            )));
        }
        self.apply_gates(&controlled(gates, control, value))
    }

    /// Cyclic shift of the whole register through the gate cascade.
    pub fn apply_shift(&mut self, direction: ShiftDirection) {
        let register: Vec<usize> = (0..self.n_qubits).collect();
        for g in shift_gates(&register, direction) {
            self.apply_gate_unchecked(&g);
        }
    }

    /// Cyclic shift as a direct index permutation.
    pub fn apply_shift_permutation(&mut self, direction: ShiftDirection) {
        match direction {
            ShiftDirection::Increment => self.amps.rotate_right(1),
            ShiftDirection::Decrement => self.amps.rotate_left(1),
        }
    }

    pub(crate) fn apply_gate_unchecked(&mut self, gate: &Gate) {
        let t = 1usize << gate.target;
        let mask = gate.ctrl_mask;
        let want = gate.ctrl_value & mask;
        let dim = self.amps.len();
        let amps = &mut self.amps;
        let mut visit = |f: &mut dyn FnMut(&mut f64, &mut f64)| {
            let mut base = 0;
            while base < dim {
                for i in base..base + t {
                    if i & mask == want {
                        let (lo, hi) = amps.split_at_mut(i + t);
                        f(&mut lo[i], &mut hi[0]);
                    }
                }
                base += 2 * t;
            }
        };
        match gate.kind {
            GateKind::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                visit(&mut |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = c * x0 - s * x1;
                    *a1 = s * x0 + c * x1;
                });
            }
            GateKind::X => visit(&mut |a0, a1| std::mem::swap(a0, a1)),
            GateKind::Z => visit(&mut |_, a1| *a1 = -*a1),
            GateKind::H => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                visit(&mut |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = r * (x0 + x1);
                    *a1 = r * (x0 - x1);
                });
            }
        }
    }

    fn ry_unchecked(&mut self, q: usize, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        let t = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + t {
                let (x0, x1) = (self.amps[i], self.amps[i + t]);
                self.amps[i] = c * x0 - s * x1;
                self.amps[i + t] = s * x0 + c * x1;
            }
            base += 2 * t;
        }
    }

    fn cnot_unchecked(&mut self, control: usize, target: usize) {
        let (c, t) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// Multinomial draw of `shots` basis states from the Born probabilities.
    pub fn sample_bitstrings<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Counts {
        sample_counts(&self.probabilities(), shots, rng)
    }
}

/// Multinomial sampling by successive conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Counts {
    let mut counts = Counts::new();
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let c = if q >= 1.0 {
            remaining
        } else {
            // q is in [0, 1) so construction cannot fail.
            Binomial::new(remaining, q)
                .map(|b| b.sample(rng))
                .unwrap_or(0)
        };
        if c > 0 {
            counts.insert(i, c);
        }
        remaining -= c;
        mass -= p;
    }
    if remaining > 0 {
        // Rounding left mass unassigned; give it to the most likely state.
        let best = probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        *counts.entry(best).or_insert(0) += remaining;
    }
    counts
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
