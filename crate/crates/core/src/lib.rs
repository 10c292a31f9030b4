//! Regularized regression by composition for binary outcomes.
//!
//! A binary outcome's success probability is built by composing three flows
//! on a reference `Ber(p0)`: odds scaling, risk scaling and survival scaling,
//! each driven by its own linear predictor. The flows overlap, so the plain
//! likelihood is flat along whole curves of parameter space. Flow-specific
//! penalties break that invariance; the penalized estimator is computed by
//! proximal gradient descent with backtracking.
//!
//! ```
//! use rbc::{compose_probability, FlowKind, FlowSpec, ModelSpec};
//!
//! let model = ModelSpec::new(0.5, vec![
//!     FlowSpec::new(FlowKind::ScOdds, true, vec![0]).with_coefficients(vec![1.0]),
//!     FlowSpec::new(FlowKind::ScRisk1, false, vec![0]),
//! ]).unwrap();
//! let p = compose_probability(&model, &[0.0]).unwrap();
//! assert_eq!(p, 0.5);
//! ```

pub mod error;
pub mod labbe;
pub mod model;
pub mod objective;
pub mod optimizer;
pub mod simulation;
pub mod tuning;

pub use error::{Error, Result};
pub use model::{apply_flow, compose_probability, linear_predictor, nonident_family, Dataset, FlowKind, FlowSpec, ModelSpec};
pub use objective::{
    clamp_count, nll, nll_gradient, objective_total, penalty_term, penalty_value, prox, soft_threshold,
    ObjectiveConfig, PenaltyKind, PenaltySpec,
};
pub use optimizer::{convergence_report, descent_audit, fit, ConvergenceReport, FitResult, OptimOptions};

// Book chapters are compiled as doctests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/identifiability.md")]
    mod identifiability {}
    #[doc = include_str!("../../../book/src/penalties.md")]
    mod penalties {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/tuning.md")]
    mod tuning {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
