//! Variational time stepping: cost functions, gradients, optimizers and the
//! march driver.

pub mod cost;
pub mod gradient;
pub mod march;
pub mod optimizer;

pub use cost::{EnergyTerm, Evaluation, SourceTerm, StepCost, Stored};
pub use gradient::{CostObjective, GradientMethod};
pub use march::{
    encode_initial, norm_reset_policy, time_march, Encoding, EncodingConfig, MarchConfig,
    MarchOutcome, SolutionHistory, StepFailure, StepRecord,
};
pub use optimizer::{minimize, Method, Objective, OptimizeResult, OptimizerConfig, SpsaConfig};
