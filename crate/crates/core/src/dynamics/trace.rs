use crate::constraints::Binding;
use crate::instance::{ConditionBinding, System};
use crate::metamodel::ActionKind;

/// One executed transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: String,
    pub kind: ActionKind,
    /// Participant and created variables to object ids.
    pub binding: Binding,
    pub conditions: Vec<ConditionBinding>,
}

/// A run of a model: `snapshots[i]` and `snapshots[i + 1]` bracket
/// `steps[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub model_ref: String,
    pub seed: Option<u64>,
    pub snapshots: Vec<System>,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn new(model_ref: impl Into<String>, initial: System, seed: Option<u64>) -> Self {
        Trace {
            model_ref: model_ref.into(),
            seed,
            snapshots: vec![initial],
            steps: Vec::new(),
        }
    }

    pub fn initial(&self) -> &System {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &System {
        self.snapshots.last().expect("a trace has at least one snapshot")
    }

    pub fn push(&mut self, step: Step, next: System) {
        self.steps.push(step);
        self.snapshots.push(next);
    }
}
