//! Stochastic gate and readout faults for the sampled backend, and the error
//! propagation formula for the cost function.
//!
//! Gate faults follow a Pauli (depolarizing) channel: after a gate acting on
//! `m` qubits, with probability `p(m)` a Pauli string drawn uniformly from the
//! `4^m - 1` non-identity strings over those qubits is applied. Y is applied
//! as the real product XZ, which differs from Y only by a global phase, so the
//! channel stays exact on real amplitudes.
//!
//! Readout faults flip each measured bit independently. Because flips are
//! independent per shot, applying the flip channel to the outcome distribution
//! before multinomial sampling is equivalent to flipping each shot.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Gate, StateVector};

/// Fault probabilities of the stand-in device model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Fault probability after a single-qubit gate.
    pub single: f64,
    /// Fault probability after a two-qubit gate.
    pub two: f64,
    /// Fault probability after a gate on three or more qubits.
    pub multi: f64,
    /// Bit-flip probability per measured qubit.
    pub readout: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self::NONE
    }
}

impl NoiseConfig {
    pub const NONE: NoiseConfig = NoiseConfig {
        single: 0.0,
        two: 0.0,
        multi: 0.0,
        readout: 0.0,
    };

    /// Preset where multi-controlled gates dominate the error, so circuits
    /// with controlled ansaetze degrade more than uncontrolled ones.
    pub const DEFAULT: NoiseConfig = NoiseConfig {
        single: 0.0005,
        two: 0.01,
        multi: 0.03,
        readout: 0.02,
    };

    pub const PRESETS: [&'static str; 2] = ["none", "default"];

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "none" => Ok(Self::NONE),
            "default" => Ok(Self::DEFAULT),
            other => Err(Error::invalid("noise", format!("unknown preset `{other}`"))),
        }
    }

    pub fn new(single: f64, two: f64, multi: f64, readout: f64) -> Result<Self> {
        let cfg = Self {
            single,
            two,
            multi,
            readout,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("noise.single", self.single),
            ("noise.two", self.two),
            ("noise.multi", self.multi),
            ("noise.readout", self.readout),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::invalid(
                    "noise",
                    format!("{name} = {p} is outside [0, 1)"),
                ));
            }
        }
        Ok(())
    }

    pub fn gate_probability(&self, arity: usize) -> f64 {
        match arity {
            0 | 1 => self.single,
            2 => self.two,
            _ => self.multi,
        }
    }

    pub fn has_gate_noise(&self) -> bool {
        self.single > 0.0 || self.two > 0.0 || self.multi > 0.0
    }

    pub fn is_noiseless(&self) -> bool {
        !self.has_gate_noise() && self.readout == 0.0
    }
}

/// With the configured probability, applies a random non-identity Pauli
/// string on the qubits `gate` touched. Returns whether a fault occurred.
pub fn apply_noise_channel<R: Rng + ?Sized>(
    state: &mut StateVector,
    gate: &Gate,
    config: &NoiseConfig,
    rng: &mut R,
) -> bool {
    let p = config.gate_probability(gate.arity());
    if p <= 0.0 || rng.random::<f64>() >= p {
        return false;
    }
    let qubits = gate.qubits();
    let strings = 1u64 << (2 * qubits.len());
    // Uniform over 1..4^m: code 0 is the all-identity string.
    let code = rng.random_range(1..strings);
    for (i, &q) in qubits.iter().enumerate() {
        let pauli = (code >> (2 * i)) & 3;
        if pauli & 1 != 0 {
            state.apply_gate_unchecked(&Gate::z(q));
        }
        if pauli & 2 != 0 {
            state.apply_gate_unchecked(&Gate::x(q));
        }
    }
    true
}

/// Runs `gates` on `state`, injecting a fault channel after each gate.
pub fn run_noisy<R: Rng + ?Sized>(
    state: &mut StateVector,
    gates: &[Gate],
    config: &NoiseConfig,
    rng: &mut R,
) -> Result<usize> {
    let mut faults = 0;
    for g in gates {
        state.apply_gate(g)?;
        if apply_noise_channel(state, g, config, rng) {
            faults += 1;
        }
    }
    Ok(faults)
}

/// Applies independent bit flips with probability `p` on every bit of an
/// outcome distribution over `bits` bits.
pub fn readout_channel(probs: &mut [f64], bits: usize, p: f64) {
    if p == 0.0 {
        return;
    }
    debug_assert_eq!(probs.len(), 1 << bits);
    for b in 0..bits {
        let t = 1usize << b;
        for i in 0..probs.len() {
            if i & t == 0 {
                let (p0, p1) = (probs[i], probs[i | t]);
                probs[i] = (1.0 - p) * p0 + p * p1;
                probs[i | t] = p * p0 + (1.0 - p) * p1;
            }
        }
    }
}

/// Fractional noise errors of the overlap and Hamiltonian measurements and the
/// resulting error of the cost function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseErrorBudget {
    pub eta_o: f64,
    pub eta_h: f64,
    pub eta_c: f64,
}

impl NoiseErrorBudget {
    /// Fraction `(2 eta_O)^2 / eta_C^2` of the cost variance due to overlaps.
    pub fn overlap_variance_share(&self) -> f64 {
        if self.eta_c == 0.0 {
            0.0
        } else {
            (2.0 * self.eta_o).powi(2) / self.eta_c.powi(2)
        }
    }

    /// Square root of [`Self::overlap_variance_share`].
    pub fn overlap_share(&self) -> f64 {
        self.overlap_variance_share().sqrt()
    }
}

/// The cost is quadratic in the overlap and linear in the Hamiltonian
/// expectation, so independent fractional errors combine as
/// `eta_C = sqrt((2 eta_O)^2 + eta_H^2)`.
pub fn error_budget(eta_o: f64, eta_h: f64) -> Result<NoiseErrorBudget> {
    if !(eta_o >= 0.0) || !(eta_h >= 0.0) {
        return Err(Error::invalid(
            "eta",
            "fractional errors must be non-negative",
        ));
    }
    let eta_c = (2.0 * eta_o).hypot(eta_h);
    Ok(NoiseErrorBudget {
        eta_o,
        eta_h,
        eta_c,
    })
}
