//! The model language: templates, actions, types, roles and schemas.

use std::collections::{BTreeMap, BTreeSet};

use crate::constraints::Predicate;
use crate::dynamics::DynamicRule;
use crate::engineering::EngineeringTag;
use crate::span::Loc;
use crate::value::Sort;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetamodelError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("inheritance cycle through template `{0}`")]
    CyclicInheritance(String),
}

/// A complete model specification.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub templates: BTreeMap<String, ObjectTemplate>,
    pub action_templates: BTreeMap<String, ActionTemplate>,
    pub types: BTreeMap<String, Type>,
    pub roles: BTreeMap<String, Role>,
    /// The specifier: dynamic schemas.
    pub dynamic_schemas: BTreeMap<String, DynamicSchema>,
    /// The describer: static schemas.
    pub static_schemas: BTreeMap<String, StaticSchema>,
    /// The constrainer: invariant schemas.
    pub invariant_schemas: BTreeMap<String, InvariantSchema>,
    pub loc: Loc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ObjectTemplate {
    pub name: String,
    pub parents: BTreeSet<String>,
    pub attributes: BTreeMap<String, Sort>,
    pub types: BTreeSet<String>,
    pub actions: BTreeSet<String>,
    pub dynamic_schemas: BTreeSet<String>,
    pub static_schemas: BTreeSet<String>,
    pub invariant_schemas: BTreeSet<String>,
    pub tags: BTreeSet<EngineeringTag>,
    pub loc: Loc,
}

impl ObjectTemplate {
    pub fn new(name: impl Into<String>) -> Self {
        ObjectTemplate {
            name: name.into(),
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Internal,
    Interaction,
}

impl ActionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Internal => "internal",
            ActionKind::Interaction => "interaction",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionTemplate {
    pub name: String,
    /// Never empty.
    pub participants: Vec<String>,
    pub start_label: String,
    pub end_label: String,
    pub types: BTreeSet<String>,
    pub loc: Loc,
}

impl ActionTemplate {
    /// Counts participant slots, not distinct templates.
    pub fn kind(&self) -> ActionKind {
        action_kind(self)
    }
}

/// Internal iff the action has a single participant.
pub fn action_kind(action: &ActionTemplate) -> ActionKind {
    if action.participants.len() == 1 {
        ActionKind::Internal
    } else {
        ActionKind::Interaction
    }
}

/// A type: a predicate over the object bound to `self`. Its class in a
/// system is computed by [`crate::constraints::extension`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Type {
    pub name: String,
    pub predicate: Predicate,
    pub subtypes: BTreeSet<String>,
    pub supertypes: BTreeSet<String>,
    pub loc: Loc,
}

/// Variable bound to the candidate object inside a type predicate.
pub const SELF_VAR: &str = "self";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum CountingScope {
    #[default]
    Global,
    PerSource,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Role {
    pub name: String,
    pub source_templates: BTreeSet<String>,
    pub target_templates: BTreeSet<String>,
    pub lower: u64,
    /// `None` is unbounded.
    pub upper: Option<u64>,
    pub inverse: Option<String>,
    pub scope: CountingScope,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantSchema {
    pub name: String,
    pub predicate: Predicate,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticSchema {
    pub name: String,
    pub at: String,
    pub predicate: Predicate,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicSchema {
    pub name: String,
    pub rules: Vec<DynamicRule>,
    pub loc: Loc,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Transitive parents of `template`, excluding itself.
    pub fn ancestors(&self, template: &str) -> Result<BTreeSet<String>, MetamodelError> {
        ancestors(template, self)
    }

    /// `{template} ∪ ancestors(template)`: the of-set an instance of
    /// `template` must carry.
    pub fn closure(&self, template: &str) -> Result<BTreeSet<String>, MetamodelError> {
        let mut set = self.ancestors(template)?;
        set.insert(template.to_string());
        Ok(set)
    }

    /// Attributes declared by `template` and all its ancestors.
    pub fn attributes_of(&self, template: &str) -> Result<BTreeMap<String, Sort>, MetamodelError> {
        let closure = self.closure(template)?;
        Ok(self.attributes_of_set(&closure))
    }

    /// Attributes declared by any template in `templates`; unknown names are
    /// skipped.
    pub fn attributes_of_set<'a>(&self, templates: impl IntoIterator<Item = &'a String>) -> BTreeMap<String, Sort> {
        let mut attrs = BTreeMap::new();
        for t in templates {
            if let Some(tpl) = self.templates.get(t) {
                for (name, sort) in &tpl.attributes {
                    attrs.insert(name.clone(), *sort);
                }
            }
        }
        attrs
    }

    /// Sorts under which `attr` is declared anywhere in the model.
    pub fn attribute_sorts(&self, attr: &str) -> BTreeSet<Sort> {
        self.templates
            .values()
            .filter_map(|t| t.attributes.get(attr).copied())
            .collect()
    }

    /// Looks up a rule by name across all dynamic schemas.
    pub fn rule(&self, name: &str) -> Option<&DynamicRule> {
        self.rules().find(|r| r.name == name)
    }

    /// All rules, schema by schema in name order, rules in declaration order.
    pub fn rules(&self) -> impl Iterator<Item = &DynamicRule> {
        self.dynamic_schemas.values().flat_map(|d| d.rules.iter())
    }

    /// Every tag carried by a template of the closure `of`.
    pub fn tags_of<'a>(&self, of: impl IntoIterator<Item = &'a String>) -> BTreeSet<EngineeringTag> {
        of.into_iter()
            .filter_map(|t| self.templates.get(t))
            .flat_map(|t| t.tags.iter().copied())
            .collect()
    }
}

/// Transitive closure of the parents of `template`, excluding `template`.
///
/// Fails on an unresolved name anywhere in the reachable parent graph, and on
/// any cycle reachable from `template`.
pub fn ancestors(template: &str, model: &Model) -> Result<BTreeSet<String>, MetamodelError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }

    fn visit<'m>(
        name: &'m str,
        model: &'m Model,
        marks: &mut BTreeMap<&'m str, Mark>,
        out: &mut BTreeSet<String>,
    ) -> Result<(), MetamodelError> {
        match marks.get(name) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Active) => return Err(MetamodelError::CyclicInheritance(name.to_string())),
            None => {}
        }
        let tpl = model
            .templates
            .get(name)
            .ok_or_else(|| MetamodelError::UnknownTemplate(name.to_string()))?;
        marks.insert(name, Mark::Active);
        for parent in &tpl.parents {
            visit(parent, model, marks, out)?;
            out.insert(parent.clone());
        }
        marks.insert(name, Mark::Done);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    let mut out = BTreeSet::new();
    visit(template, model, &mut marks, &mut out)?;
    Ok(out)
}
