use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::rule::{DynamicRule, Effect};
use crate::constraints::{eval_expr, eval_predicate, Binding, Datum, EvalError, Expr};
use crate::instance::{Link, LinkKey, ObjectInstance, System};
use crate::metamodel::Model;
use crate::value::StateMap;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DynamicsError {
    #[error("rule {rule}: {message}")]
    BadBinding { rule: String, message: String },
    #[error("rule {rule}: {source}")]
    Eval { rule: String, source: EvalError },
    #[error("rule {rule}: unknown template {template}")]
    UnknownTemplate { rule: String, template: String },
    #[error("rule {rule}: no initial value for attribute {attribute} of {object}")]
    MissingInitialValue {
        rule: String,
        object: String,
        attribute: String,
    },
    #[error("rule {rule}: object {object} already exists")]
    DuplicateObject { rule: String, object: String },
    #[error("rule {rule}: link {key} already exists")]
    DuplicateLink { rule: String, key: LinkKey },
    #[error("rule {rule}: link {key} does not exist")]
    MissingLink { rule: String, key: LinkKey },
    #[error("rule {rule}: link {key} would refer to missing object")]
    DanglingEndpoint { rule: String, key: LinkKey },
    #[error("rule {rule}: deleting {object} leaves link {link} dangling")]
    DeleteDanglingLink { rule: String, object: String, link: String },
    #[error("rule {0}: postcondition does not hold")]
    PostconditionFailed(String),
    #[error("rule {rule}: invariant {schema} broken")]
    InvariantBroken { rule: String, schema: String },
}

/// One element of system state, at the granularity used for frame checks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// The object as a whole: existence and template set.
    Object(String),
    Attr(String, String),
    Link(LinkKey),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Object(o) => write!(f, "object {o}"),
            Element::Attr(o, a) => write!(f, "{o}.{a}"),
            Element::Link(k) => write!(f, "link {k}"),
        }
    }
}

/// State elements written by a step. An object element covers all of the
/// object's attributes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Footprint(pub BTreeSet<Element>);

impl Footprint {
    pub fn covers(&self, e: &Element) -> bool {
        self.0.contains(e) || matches!(e, Element::Attr(o, _) if self.0.contains(&Element::Object(o.clone())))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.0.iter()
    }
}

/// Elements that differ between two systems. Link ids and time points are
/// ignored; links are compared by key.
pub fn diff(a: &System, b: &System) -> BTreeSet<Element> {
    let mut out = BTreeSet::new();
    let ids: BTreeSet<&String> = a.objects.keys().chain(b.objects.keys()).collect();
    for id in ids {
        match (a.objects.get(id), b.objects.get(id)) {
            (Some(x), Some(y)) if x.of == y.of => {
                let attrs: BTreeSet<&String> = x.state.keys().chain(y.state.keys()).collect();
                for attr in attrs {
                    if x.state.get(attr) != y.state.get(attr) {
                        out.insert(Element::Attr(id.clone(), attr.clone()));
                    }
                }
            }
            _ => {
                out.insert(Element::Object(id.clone()));
            }
        }
    }
    let ka: BTreeSet<LinkKey> = a.links.values().map(Link::key).collect();
    let kb: BTreeSet<LinkKey> = b.links.values().map(Link::key).collect();
    for k in ka.symmetric_difference(&kb) {
        out.insert(Element::Link(k.clone()));
    }
    out
}

/// Result of executing a rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub system: System,
    /// Participants plus the ids given to created objects.
    pub binding: Binding,
    pub footprint: Footprint,
}

/// Rule/binding pairs enabled in a system, with diagnostics for
/// preconditions that could not be evaluated.
#[derive(Clone, Debug, Default)]
pub struct Enabled<'m> {
    pub pairs: Vec<(&'m DynamicRule, Binding)>,
    pub diagnostics: Vec<String>,
}

/// Candidate bindings of `rule`'s participants in object-id order. Distinct
/// participants take distinct objects.
pub fn candidate_bindings(rule: &DynamicRule, model: &Model, system: &System) -> Vec<Binding> {
    let pools: Vec<Vec<&str>> = rule
        .participants
        .iter()
        .map(|p| {
            system
                .objects
                .values()
                .filter(|o| crate::constraints::in_template_closure(model, &o.of, &p.template))
                .map(|o| o.id.as_str())
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut chosen: Vec<&str> = Vec::new();
    fn walk<'a>(
        i: usize,
        pools: &[Vec<&'a str>],
        rule: &DynamicRule,
        chosen: &mut Vec<&'a str>,
        out: &mut Vec<Binding>,
    ) {
        if i == pools.len() {
            let mut b = Binding::new();
            for (p, id) in rule.participants.iter().zip(chosen.iter()) {
                let _ = b.bind(p.var.clone(), Datum::obj(*id));
            }
            out.push(b);
            return;
        }
        for id in &pools[i] {
            if chosen.contains(id) {
                continue;
            }
            chosen.push(id);
            walk(i + 1, pools, rule, chosen, out);
            chosen.pop();
        }
    }
    walk(0, &pools, rule, &mut chosen, &mut out);
    out
}

/// Every rule/binding pair whose precondition holds in `system`, by rule
/// name and then binding.
pub fn enabled_rules<'m>(system: &System, model: &'m Model) -> Enabled<'m> {
    let mut rules: Vec<&DynamicRule> = model.rules().collect();
    rules.sort_by(|a, b| a.name.cmp(&b.name));
    let mut enabled = Enabled::default();
    for rule in rules {
        for b in candidate_bindings(rule, model, system) {
            match eval_predicate(&rule.pre, model, system, &b) {
                Ok(true) => enabled.pairs.push((rule, b)),
                Ok(false) => {}
                Err(e) => enabled
                    .diagnostics
                    .push(format!("precondition of {} not evaluable: {e}", rule.name)),
            }
        }
    }
    enabled
}

/// Applies `rule` under `binding`: runs the effects, then checks the
/// postcondition and every invariant schema on the result.
pub fn apply_rule(
    system: &System,
    model: &Model,
    rule: &DynamicRule,
    binding: &Binding,
) -> Result<Applied, DynamicsError> {
    let applied = execute(system, model, rule, binding)?;
    match eval_predicate(&rule.post, model, &applied.system, &applied.binding) {
        Ok(true) => {}
        Ok(false) => return Err(DynamicsError::PostconditionFailed(rule.name.clone())),
        Err(source) => {
            return Err(DynamicsError::Eval {
                rule: rule.name.clone(),
                source,
            })
        }
    }
    for inv in model.invariant_schemas.values() {
        if eval_predicate(&inv.predicate, model, &applied.system, &Binding::new()) != Ok(true) {
            return Err(DynamicsError::InvariantBroken {
                rule: rule.name.clone(),
                schema: inv.name.clone(),
            });
        }
    }
    Ok(applied)
}

/// Runs the effects of `rule` in order, without checking the
/// postcondition or invariants. Variables of created objects that are
/// already bound in `binding` reuse the bound id.
pub fn execute(
    system: &System,
    model: &Model,
    rule: &DynamicRule,
    binding: &Binding,
) -> Result<Applied, DynamicsError> {
    let err_binding = |message: String| DynamicsError::BadBinding {
        rule: rule.name.clone(),
        message,
    };
    for p in &rule.participants {
        let id = binding
            .object_of(&p.var)
            .ok_or_else(|| err_binding(format!("participant {} is unbound", p.var)))?;
        if !system.objects.contains_key(id) {
            return Err(err_binding(format!(
                "participant {} is bound to missing object {id}",
                p.var
            )));
        }
    }

    let mut s = system.clone();
    let mut env = binding.clone();
    let mut footprint = BTreeSet::new();
    let mut deleted = BTreeSet::new();
    let eval = |e: &Expr, s: &System, env: &Binding| -> Result<crate::value::Value, DynamicsError> {
        let d = eval_expr(e, model, s, env).map_err(|source| DynamicsError::Eval {
            rule: rule.name.clone(),
            source,
        })?;
        d.into_value().ok_or_else(|| DynamicsError::Eval {
            rule: rule.name.clone(),
            source: EvalError::SortMismatch("object or set where a value is required".into()),
        })
    };
    let object_of = |env: &Binding, var: &str| -> Result<String, DynamicsError> {
        env.object_of(var)
            .map(str::to_string)
            .ok_or_else(|| DynamicsError::Eval {
                rule: rule.name.clone(),
                source: EvalError::UnboundVariable(var.to_string()),
            })
    };
    let closure = |template: &str| {
        model.closure(template).map_err(|_| DynamicsError::UnknownTemplate {
            rule: rule.name.clone(),
            template: template.to_string(),
        })
    };
    let eval_init = |init: &BTreeMap<String, Expr>, s: &System, env: &Binding| -> Result<StateMap, DynamicsError> {
        init.iter().map(|(a, e)| Ok((a.clone(), eval(e, s, env)?))).collect()
    };
    let missing = |id: &str| DynamicsError::Eval {
        rule: rule.name.clone(),
        source: EvalError::UnknownObject(id.to_string()),
    };

    for effect in &rule.effects {
        match effect {
            Effect::Assign { var, attr, value } => {
                let id = object_of(&env, var)?;
                let v = eval(value, &s, &env)?;
                let object = s.objects.get_mut(&id).ok_or_else(|| missing(&id))?;
                object.state.insert(attr.clone(), v);
                footprint.insert(Element::Attr(id, attr.clone()));
            }
            Effect::Create { var, template, init } => {
                let of = closure(template)?;
                let state = eval_init(init, &s, &env)?;
                let id = match env.object_of(var) {
                    Some(id) => id.to_string(),
                    None => {
                        let id = s.fresh_object_id(var);
                        env.bind(var.clone(), Datum::obj(id.clone()))
                            .map_err(|e| err_binding(e.to_string()))?;
                        id
                    }
                };
                if s.objects.contains_key(&id) {
                    return Err(DynamicsError::DuplicateObject {
                        rule: rule.name.clone(),
                        object: id,
                    });
                }
                for attr in model.attributes_of_set(&of).keys() {
                    if !state.contains_key(attr) {
                        return Err(DynamicsError::MissingInitialValue {
                            rule: rule.name.clone(),
                            object: id,
                            attribute: attr.clone(),
                        });
                    }
                }
                s.objects.insert(
                    id.clone(),
                    ObjectInstance {
                        id: id.clone(),
                        of,
                        state,
                        loc: Default::default(),
                    },
                );
                deleted.remove(&id);
                footprint.insert(Element::Object(id));
            }
            Effect::Delete { var } => {
                let id = object_of(&env, var)?;
                s.objects.remove(&id).ok_or_else(|| missing(&id))?;
                deleted.insert(id.clone());
                footprint.insert(Element::Object(id));
            }
            Effect::Reclassify { var, template, init } => {
                let id = object_of(&env, var)?;
                let of = closure(template)?;
                let fresh = eval_init(init, &s, &env)?;
                let attrs = model.attributes_of_set(&of);
                let object = s.objects.get_mut(&id).ok_or_else(|| missing(&id))?;
                object.state.retain(|a, _| attrs.contains_key(a));
                object.state.extend(fresh);
                if let Some(a) = attrs.keys().find(|a| !object.state.contains_key(*a)) {
                    return Err(DynamicsError::MissingInitialValue {
                        rule: rule.name.clone(),
                        object: id,
                        attribute: a.clone(),
                    });
                }
                object.of = of;
                footprint.insert(Element::Object(id));
            }
            Effect::AddLink { role, source, target } => {
                let key = LinkKey {
                    role: role.clone(),
                    source: object_of(&env, source)?,
                    target: object_of(&env, target)?,
                };
                if s.find_link(&key).is_some() {
                    return Err(DynamicsError::DuplicateLink {
                        rule: rule.name.clone(),
                        key,
                    });
                }
                if !s.objects.contains_key(&key.source) || !s.objects.contains_key(&key.target) {
                    return Err(DynamicsError::DanglingEndpoint {
                        rule: rule.name.clone(),
                        key,
                    });
                }
                let id = s.fresh_link_id(&key);
                s.links.insert(
                    id.clone(),
                    Link::new(id, key.role.clone(), key.source.clone(), key.target.clone()),
                );
                footprint.insert(Element::Link(key));
            }
            Effect::RemoveLink { role, source, target } => {
                let key = LinkKey {
                    role: role.clone(),
                    source: object_of(&env, source)?,
                    target: object_of(&env, target)?,
                };
                let Some(id) = s.find_link(&key).map(|l| l.id.clone()) else {
                    return Err(DynamicsError::MissingLink {
                        rule: rule.name.clone(),
                        key,
                    });
                };
                s.links.remove(&id);
                footprint.insert(Element::Link(key));
            }
        }
    }

    for link in s.links.values() {
        for end in [&link.source, &link.target] {
            if deleted.contains(end) && !s.objects.contains_key(end) {
                return Err(DynamicsError::DeleteDanglingLink {
                    rule: rule.name.clone(),
                    object: end.clone(),
                    link: link.id.clone(),
                });
            }
        }
    }
    Ok(Applied {
        system: s,
        binding: env,
        footprint: Footprint(footprint),
    })
}
