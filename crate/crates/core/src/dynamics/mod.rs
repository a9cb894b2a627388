//! Dynamic schemas: rule execution, simulation and trace verification.

mod engine;
mod rule;
mod simulate;
mod trace;
mod verify;

pub use engine::{
    apply_rule, candidate_bindings, diff, enabled_rules, execute, Applied, DynamicsError, Element, Enabled, Footprint,
};
pub use rule::{DynamicRule, Effect, Participant};
pub use simulate::{applicable, simulate, SimulateError};
pub use trace::{Step, Trace};
pub use verify::{step_warnings, verify_trace, StepWarning};
