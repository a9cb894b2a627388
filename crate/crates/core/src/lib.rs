//! Checking toolkit for engineering-viewpoint specifications of distributed
//! systems: a template-based model language, an instance language, a
//! predicate language, and checkers for well-formedness, conformance and
//! dynamic behaviour.

pub mod conformance;
pub mod constraints;
pub mod dsl;
pub mod dynamics;
pub mod engineering;
pub mod instance;
pub mod metamodel;
pub mod rules;
pub mod span;
pub mod value;
pub mod wf;

pub use rules::{RuleId, Violation};
pub use span::SourceSpan;
