//! Gradients of the step cost with respect to the ansatz angles.
//!
//! Every angle drives exactly one R_Y gate, and
//! `d/dtheta R_Y(theta) = R_Y(theta + pi) / 2`, so
//! `du/dtheta_i = u(theta + pi e_i) / 2`. With `C = -P^2 / (2Q)`, `P` linear
//! and `Q` a symmetric bilinear form, this gives
//! `dC/dtheta_i = -(P/Q) P(u_i) / 2 + (P/Q)^2 Q(u_i, u) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measurement::Estimator;
use crate::vqa::cost::StepCost;
use crate::vqa::optimizer::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Shifted-circuit evaluation of the exact derivative.
    ParameterShift,
    /// Central differences of the cost.
    #[default]
    CentralDifference,
}

pub fn parameter_shift(cost: &StepCost, est: &Estimator, theta: &[f64]) -> Result<Vec<f64>> {
    let u = cost.encode(theta)?;
    let eval = cost.evaluate_encoded(est, &u)?;
    let ratio = eval.norm();
    let mut shifted = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        shifted[i] = theta[i] + std::f64::consts::PI;
        let ui = cost.encode(&shifted)?;
        shifted[i] = theta[i];
        let dp = 0.5 * cost.source(est, &ui)?;
        let dq = cost.energy_bilinear(est, &ui, &u)?;
        grad.push(-ratio * dp + 0.5 * ratio * ratio * dq);
    }
    Ok(grad)
}

pub fn central_difference(
    cost: &StepCost,
    est: &Estimator,
    theta: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    let mut x = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        x[i] = theta[i] + step;
        let fp = cost.cost(est, &x)?;
        x[i] = theta[i] - step;
        let fm = cost.cost(est, &x)?;
        x[i] = theta[i];
        grad.push((fp - fm) / (2.0 * step));
    }
    Ok(grad)
}

/// The step cost as an optimizer objective.
pub struct CostObjective<'a> {
    pub cost: &'a StepCost,
    pub estimator: &'a Estimator,
    pub method: GradientMethod,
}

impl Objective for CostObjective<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.cost.cost(self.estimator, x)
    }

    fn gradient(&mut self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        match self.method {
            GradientMethod::ParameterShift => Some(parameter_shift(self.cost, self.estimator, x)),
            GradientMethod::CentralDifference => None,
        }
    }
}
