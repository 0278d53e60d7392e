//! Single-shot quantum heat engines that can beat the Carnot efficiency.
//!
//! The crate evaluates the generalized second laws of thermodynamics on
//! energy-diagonal states, solves for the maximum extractable work both by
//! brute force ([`oracle`]) and through quasi-static closed forms
//! ([`quasistatic`]), and turns those into engine efficiencies
//! ([`engine`]).

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergences;
pub mod engine;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod par;
pub mod quasistatic;
pub mod states;
pub mod verify;

pub use divergences::{free_energy, renyi_divergence, AlphaValue};
pub use engine::{
    carnot, check_conditions, classify_regime, design_epsilon1, efficiency_from_components, efficiency_quasistatic,
    DesignReport, EpsilonFamily, RegimeReport, WorkClass,
};
pub use error::{Error, Result};
pub use oracle::{max_extractable_work, transition_feasible, FeasibilityReport, Oracle, WorkResult};
pub use par::Exec;
pub use quasistatic::{minimize_w, QuasiStaticConfig};
pub use states::{DiagonalState, EngineParams};
