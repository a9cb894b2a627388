use std::collections::BTreeMap;

use crate::constraints::Expr;
use crate::constraints::Predicate;
use crate::span::Loc;

/// A participant slot of a rule: a variable bound to an object whose
/// template closure contains `template`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Participant {
    pub var: String,
    pub template: String,
}

impl Participant {
    pub fn new(var: impl Into<String>, template: impl Into<String>) -> Self {
        Participant {
            var: var.into(),
            template: template.into(),
        }
    }
}

/// One state change.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Effect {
    /// `var.attr := value`
    Assign { var: String, attr: String, value: Expr },
    /// `create var : Template { attr = expr; ... }`
    Create {
        var: String,
        template: String,
        init: BTreeMap<String, Expr>,
    },
    /// `delete var`
    Delete { var: String },
    /// `reclassify var as Template { attr = expr; ... }`
    Reclassify {
        var: String,
        template: String,
        init: BTreeMap<String, Expr>,
    },
    /// `link role(source, target)`
    AddLink {
        role: String,
        source: String,
        target: String,
    },
    /// `unlink role(source, target)`
    RemoveLink {
        role: String,
        source: String,
        target: String,
    },
}

/// An executable transition rule of a dynamic schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DynamicRule {
    pub name: String,
    pub action: String,
    pub participants: Vec<Participant>,
    pub pre: Predicate,
    pub effects: Vec<Effect>,
    pub post: Predicate,
    pub loc: Loc,
}
