//! Conformance of a system to its model (C1–C8) and schema satisfaction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::constraints::{eval_predicate, Binding, Evaluator};
use crate::instance::System;
use crate::metamodel::{CountingScope, Model, Role};
use crate::rules::{sort_violations, RuleId, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Conforms,
    Violates,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Conforms => "CONFORMS",
            Verdict::Violates => "VIOLATES",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformanceReport {
    pub system_name: String,
    pub model_name: String,
    pub violations: Vec<Violation>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConformOptions {
    /// Check the lower cardinality clause against the upper bound, as the
    /// formula is literally written, instead of against the lower bound.
    pub paper_literal_c6: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("system {system} claims model {claimed}, not {model}")]
pub struct ModelMismatch {
    pub system: String,
    pub claimed: String,
    pub model: String,
}

/// Key of a cardinality count.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScopeKey {
    Global,
    Source(String),
}

impl fmt::Display for ScopeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScopeKey::Global => f.write_str("global"),
            ScopeKey::Source(s) => f.write_str(s),
        }
    }
}

/// Number of `role` links in `system`, per counting scope. Under
/// per-source counting every object that may act as a source gets a key,
/// even with no links.
pub fn cardinality_count(role: &Role, system: &System) -> BTreeMap<ScopeKey, u64> {
    let mut counts = BTreeMap::new();
    match role.scope {
        CountingScope::Global => {
            counts.insert(ScopeKey::Global, system.links_of_role(&role.name).count() as u64);
        }
        CountingScope::PerSource => {
            for o in system.objects.values() {
                if o.of.iter().any(|t| role.source_templates.contains(t)) {
                    counts.insert(ScopeKey::Source(o.id.clone()), 0);
                }
            }
            for l in system.links_of_role(&role.name) {
                *counts.entry(ScopeKey::Source(l.source.clone())).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// Ancestors of `template`, skipping names the model does not declare and
/// tolerating cycles.
fn lenient_ancestors(model: &Model, template: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![template.to_string()];
    while let Some(t) = stack.pop() {
        if let Some(tpl) = model.templates.get(&t) {
            for p in &tpl.parents {
                if seen.insert(p.clone()) {
                    stack.push(p.clone());
                }
            }
        }
    }
    seen
}

/// Checks `system` against `model`. Fails only when the system claims a
/// different model.
pub fn conform(system: &System, model: &Model, options: ConformOptions) -> Result<ConformanceReport, ModelMismatch> {
    if system.model_ref != model.name {
        return Err(ModelMismatch {
            system: system.name.clone(),
            claimed: system.model_ref.clone(),
            model: model.name.clone(),
        });
    }
    let mut out = Vec::new();

    for o in system.objects.values() {
        let span = o.loc.span();
        let closed = o.of.iter().any(|t| {
            let mut closure = lenient_ancestors(model, t);
            closure.insert(t.clone());
            closure == o.of
        });
        if !closed {
            out.push(
                Violation::new(
                    RuleId::C1,
                    [o.id.as_str()],
                    format!(
                        "templates of {} are not one template together with all its ancestors",
                        o.id
                    ),
                )
                .at(span),
            );
        }
        for t in &o.of {
            if !model.templates.contains_key(t) {
                out.push(
                    Violation::new(
                        RuleId::C3,
                        [o.id.as_str(), t.as_str()],
                        format!("model {} has no template {t}", model.name),
                    )
                    .at(span),
                );
            }
        }
    }

    let in_use: BTreeSet<&String> = system
        .objects
        .values()
        .flat_map(|o| o.of.iter())
        .filter(|t| model.templates.contains_key(*t))
        .collect();
    for t in in_use {
        for ty in &model.templates[t].types {
            if !model.types.contains_key(ty) {
                out.push(Violation::new(
                    RuleId::C4,
                    [t.as_str(), ty.as_str()],
                    format!(
                        "template {t} in use references type {ty}, which model {} lacks",
                        model.name
                    ),
                ));
            }
        }
    }

    for l in system.links.values() {
        let span = l.loc.span();
        let Some(role) = model.roles.get(&l.role) else {
            out.push(
                Violation::new(
                    RuleId::C5,
                    [l.id.as_str()],
                    format!("model {} has no role {}", model.name, l.role),
                )
                .at(span),
            );
            continue;
        };
        if let (Some(src), Some(tgt)) = (system.objects.get(&l.source), system.objects.get(&l.target)) {
            let src_ok = src.of.iter().any(|t| role.source_templates.contains(t));
            let tgt_ok = tgt.of.iter().any(|t| role.target_templates.contains(t));
            if !src_ok || !tgt_ok {
                let end = if src_ok { &l.target } else { &l.source };
                out.push(
                    Violation::new(
                        RuleId::C2,
                        [l.id.as_str()],
                        format!(
                            "{end} is not a valid {} end of role {}",
                            if src_ok { "target" } else { "source" },
                            role.name
                        ),
                    )
                    .at(span),
                );
            }
        }
        if let Some(inverse) = &role.inverse {
            let reverse = system
                .links_of_role(inverse)
                .filter(|r| r.source == l.target && r.target == l.source)
                .count();
            if reverse != 1 {
                out.push(
                    Violation::new(
                        RuleId::C7,
                        [l.id.as_str()],
                        format!(
                            "link {} has {reverse} reverse {inverse} links; exactly one is required",
                            l.id
                        ),
                    )
                    .at(span),
                );
            }
        }
    }

    for role in model.roles.values() {
        let lower = match (options.paper_literal_c6, role.upper) {
            (true, Some(upper)) => upper,
            _ => role.lower,
        };
        for (key, count) in cardinality_count(role, system) {
            let too_many = role.upper.is_some_and(|u| count > u);
            if count < lower || too_many {
                let bound = role.upper.map_or("*".to_string(), |u| u.to_string());
                let (subjects, scope) = match &key {
                    ScopeKey::Global => (vec![role.name.clone()], String::new()),
                    ScopeKey::Source(s) => (vec![role.name.clone(), s.clone()], format!(" from {s}")),
                };
                out.push(
                    Violation::new(
                        RuleId::C6,
                        subjects,
                        format!("{count} {} links{scope}, outside {}..{bound}", role.name, lower),
                    )
                    .at(role.loc.span()),
                );
            }
        }
    }

    let ev = Evaluator::new(model, system);
    for t2 in model.types.values() {
        let pairs = t2
            .subtypes
            .iter()
            .map(|t1| (t1.as_str(), t2.name.as_str()))
            .chain(t2.supertypes.iter().map(|sup| (t2.name.as_str(), sup.as_str())));
        for (t1, sup) in pairs {
            let (Some(sub_ty), Some(sup_ty)) = (model.types.get(t1), model.types.get(sup)) else {
                continue;
            };
            match (ev.extension(sub_ty), ev.extension(sup_ty)) {
                (Ok(a), Ok(b)) => {
                    let escaped: Vec<&String> = a.difference(&b).collect();
                    if !escaped.is_empty() {
                        let ids: Vec<&str> = escaped.iter().map(|s| s.as_str()).collect();
                        out.push(Violation::new(
                            RuleId::C8,
                            [t1, sup],
                            format!("{} satisfy subtype {t1} but not supertype {sup}", ids.join(", ")),
                        ));
                    }
                }
                (Err(e), _) | (_, Err(e)) => {
                    out.push(Violation::new(
                        RuleId::C8,
                        [t1, sup],
                        format!("cannot evaluate type extension: {e}"),
                    ));
                }
            }
        }
    }

    out.extend(schema_failures(system, model));
    sort_violations(&mut out);
    let verdict = if out.is_empty() {
        Verdict::Conforms
    } else {
        Verdict::Violates
    };
    Ok(ConformanceReport {
        system_name: system.name.clone(),
        model_name: model.name.clone(),
        violations: out,
        verdict,
    })
}

/// Invariant schemas false on `system` (D2) and static schemas false at a
/// time point of `system` (D3).
pub fn schema_failures(system: &System, model: &Model) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in model.invariant_schemas.values() {
        match eval_predicate(&s.predicate, model, system, &Binding::new()) {
            Ok(true) => {}
            Ok(false) => out.push(
                Violation::new(
                    RuleId::D2,
                    [s.name.as_str()],
                    format!("invariant {} does not hold", s.name),
                )
                .at(s.loc.span()),
            ),
            Err(e) => out.push(
                Violation::new(
                    RuleId::D2,
                    [s.name.as_str()],
                    format!("invariant {} cannot be evaluated: {e}", s.name),
                )
                .at(s.loc.span()),
            ),
        }
    }
    for s in model.static_schemas.values() {
        let Some(view) = system.view_at(&s.at) else {
            continue;
        };
        match eval_predicate(&s.predicate, model, &view, &Binding::new()) {
            Ok(true) => {}
            Ok(false) => out.push(
                Violation::new(
                    RuleId::D3,
                    [s.name.as_str()],
                    format!("static schema {} does not hold at {}", s.name, s.at),
                )
                .at(s.loc.span()),
            ),
            Err(e) => out.push(
                Violation::new(
                    RuleId::D3,
                    [s.name.as_str()],
                    format!("static schema {} cannot be evaluated at {}: {e}", s.name, s.at),
                )
                .at(s.loc.span()),
            ),
        }
    }
    out
}
