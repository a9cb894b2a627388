use std::collections::{BTreeMap, BTreeSet};

use super::report::{Diagnostic, Severity};
use crate::constraints::{typecheck_expr, Domain, Expr, Ty, TypeError};
use crate::dynamics::{DynamicRule, Effect};
use crate::instance::System;
use crate::metamodel::{Model, SELF_VAR};
use crate::span::{Loc, SourceSpan};

struct Resolver<'a> {
    fallback: SourceSpan,
    diags: &'a mut Vec<Diagnostic>,
}

impl Resolver<'_> {
    fn error(&mut self, loc: &Loc, message: String) {
        let span = loc.span().cloned().unwrap_or_else(|| self.fallback.clone());
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            span,
            message,
        });
    }

    fn type_errors(&mut self, loc: &Loc, errs: Vec<TypeError>) {
        for e in errs {
            let span = e
                .span
                .or_else(|| loc.span().cloned())
                .unwrap_or_else(|| self.fallback.clone());
            self.diags.push(Diagnostic {
                severity: Severity::Error,
                span,
                message: e.message,
            });
        }
    }

    fn check(&mut self, e: &Expr, model: &Model, scope: &[(String, Ty)], want: Option<&Ty>, loc: &Loc) {
        if let Err(errs) = typecheck_expr(e, model, scope, want) {
            self.type_errors(loc, errs);
        }
    }
}

/// Name resolution and typechecking of a parsed model. References that the
/// well-formedness rules cover (schemas, actions and types named by
/// templates, sub/supertype lists, parent cycles) are left to `check_model`.
pub(crate) fn resolve_model(model: &Model, fallback: SourceSpan, diags: &mut Vec<Diagnostic>) {
    let mut r = Resolver { fallback, diags };

    for t in model.templates.values() {
        for p in &t.parents {
            if !model.templates.contains_key(p) {
                r.error(&t.loc, format!("unresolved template {p} in parents of {}", t.name));
            }
        }
    }
    for a in model.action_templates.values() {
        for p in &a.participants {
            if !model.templates.contains_key(p) {
                r.error(&a.loc, format!("unresolved template {p} in participants of {}", a.name));
            }
        }
    }
    for role in model.roles.values() {
        if role.source_templates.is_empty() || role.target_templates.is_empty() {
            r.error(
                &role.loc,
                format!("role {} needs both source and target templates", role.name),
            );
        }
        for t in role.source_templates.iter().chain(&role.target_templates) {
            if !model.templates.contains_key(t) {
                r.error(&role.loc, format!("unresolved template {t} in role {}", role.name));
            }
        }
        if let Some(upper) = role.upper {
            if role.lower > upper {
                r.error(
                    &role.loc,
                    format!("role {} has lower bound above upper bound", role.name),
                );
            }
        }
        if let Some(inv) = &role.inverse {
            match model.roles.get(inv) {
                None => r.error(
                    &role.loc,
                    format!("unresolved role {inv} named as inverse of {}", role.name),
                ),
                Some(other) if other.inverse.as_deref() != Some(role.name.as_str()) => r.error(
                    &role.loc,
                    format!("roles {} and {inv} must name each other as inverse", role.name),
                ),
                Some(_) => {}
            }
        }
    }

    for ty in model.types.values() {
        let scope = [(SELF_VAR.to_string(), Ty::Obj(Domain::Any))];
        r.check(&ty.predicate, model, &scope, Some(&Ty::Bool), &ty.loc);
    }
    for s in model.invariant_schemas.values() {
        r.check(&s.predicate, model, &[], Some(&Ty::Bool), &s.loc);
    }
    for s in model.static_schemas.values() {
        r.check(&s.predicate, model, &[], Some(&Ty::Bool), &s.loc);
    }

    let mut rule_names = BTreeSet::new();
    for schema in model.dynamic_schemas.values() {
        for rule in &schema.rules {
            if !rule_names.insert(rule.name.as_str()) {
                r.error(&rule.loc, format!("duplicate rule {}", rule.name));
            }
            resolve_rule(&mut r, model, rule);
        }
    }
}

fn resolve_rule(r: &mut Resolver<'_>, model: &Model, rule: &DynamicRule) {
    match model.action_templates.get(&rule.action) {
        None => r.error(
            &rule.loc,
            format!("unresolved action {} in rule {}", rule.action, rule.name),
        ),
        Some(action) => {
            let declared: Vec<&str> = rule.participants.iter().map(|p| p.template.as_str()).collect();
            let expected: Vec<&str> = action.participants.iter().map(String::as_str).collect();
            if declared != expected {
                r.error(
                    &rule.loc,
                    format!(
                        "rule {} participants ({}) do not match action {} ({})",
                        rule.name,
                        declared.join(", "),
                        action.name,
                        expected.join(", ")
                    ),
                );
            }
        }
    }

    let mut scope: Vec<(String, Ty)> = Vec::new();
    for p in &rule.participants {
        if scope.iter().any(|(v, _)| v == &p.var) {
            r.error(&rule.loc, format!("participant variable {} is declared twice", p.var));
            continue;
        }
        if !model.templates.contains_key(&p.template) {
            r.error(
                &rule.loc,
                format!("unresolved template {} in rule {}", p.template, rule.name),
            );
            continue;
        }
        scope.push((p.var.clone(), Ty::Obj(Domain::Template(p.template.clone()))));
    }
    r.check(&rule.pre, model, &scope, Some(&Ty::Bool), &rule.loc);

    let template_of = |scope: &[(String, Ty)], var: &str| -> Option<Option<String>> {
        scope.iter().rev().find(|(v, _)| v == var).map(|(_, t)| match t {
            Ty::Obj(Domain::Template(t)) => Some(t.clone()),
            _ => None,
        })
    };

    for effect in &rule.effects {
        match effect {
            Effect::Assign { var, attr, value } => match template_of(&scope, var) {
                None => r.error(&rule.loc, format!("unbound variable {var} in rule {}", rule.name)),
                Some(tpl) => {
                    let sort = tpl
                        .and_then(|t| model.attributes_of(&t).ok())
                        .and_then(|attrs| attrs.get(attr).copied());
                    match sort {
                        None => r.error(&rule.loc, format!("{var} has no attribute {attr}")),
                        Some(sort) => r.check(value, model, &scope, Some(&sort.into()), &rule.loc),
                    }
                }
            },
            Effect::Create { var, template, init } => {
                if template_of(&scope, var).is_some() {
                    r.error(&rule.loc, format!("variable {var} is already bound"));
                }
                match model.attributes_of(template) {
                    Err(_) => r.error(
                        &rule.loc,
                        format!("unresolved template {template} in rule {}", rule.name),
                    ),
                    Ok(attrs) => {
                        check_init(r, model, &scope, init, &attrs, &attrs, &rule.loc, var);
                    }
                }
                scope.push((var.clone(), Ty::Obj(Domain::Template(template.clone()))));
            }
            Effect::Delete { var } => {
                if template_of(&scope, var).is_none() {
                    r.error(&rule.loc, format!("unbound variable {var} in rule {}", rule.name));
                }
            }
            Effect::Reclassify { var, template, init } => {
                let old = template_of(&scope, var);
                if old.is_none() {
                    r.error(&rule.loc, format!("unbound variable {var} in rule {}", rule.name));
                }
                match model.attributes_of(template) {
                    Err(_) => r.error(
                        &rule.loc,
                        format!("unresolved template {template} in rule {}", rule.name),
                    ),
                    Ok(attrs) => {
                        let kept = old
                            .flatten()
                            .and_then(|t| model.attributes_of(&t).ok())
                            .unwrap_or_default();
                        let required: BTreeMap<_, _> = attrs
                            .iter()
                            .filter(|(a, _)| !kept.contains_key(*a))
                            .map(|(a, s)| (a.clone(), *s))
                            .collect();
                        check_init(r, model, &scope, init, &attrs, &required, &rule.loc, var);
                    }
                }
                scope.push((var.clone(), Ty::Obj(Domain::Template(template.clone()))));
            }
            Effect::AddLink { role, source, target } | Effect::RemoveLink { role, source, target } => {
                if !model.roles.contains_key(role) {
                    r.error(&rule.loc, format!("unresolved role {role} in rule {}", rule.name));
                }
                for v in [source, target] {
                    if template_of(&scope, v).is_none() {
                        r.error(&rule.loc, format!("unbound variable {v} in rule {}", rule.name));
                    }
                }
            }
        }
    }
    r.check(&rule.post, model, &scope, Some(&Ty::Bool), &rule.loc);
}

#[allow(clippy::too_many_arguments)]
fn check_init(
    r: &mut Resolver<'_>,
    model: &Model,
    scope: &[(String, Ty)],
    init: &BTreeMap<String, Expr>,
    allowed: &BTreeMap<String, crate::value::Sort>,
    required: &BTreeMap<String, crate::value::Sort>,
    loc: &Loc,
    var: &str,
) {
    for (attr, e) in init {
        match allowed.get(attr) {
            None => r.error(loc, format!("{var} gets value for undeclared attribute {attr}")),
            Some(sort) => r.check(e, model, scope, Some(&(*sort).into()), loc),
        }
    }
    for attr in required.keys() {
        if !init.contains_key(attr) {
            r.error(loc, format!("{var} lacks initial value for attribute {attr}"));
        }
    }
}

/// Checks object references of a parsed system. Dangling link endpoints are
/// reported only when `links` is set.
pub(crate) fn resolve_system(system: &System, links: bool, fallback: SourceSpan, diags: &mut Vec<Diagnostic>) {
    let mut r = Resolver { fallback, diags };
    if links {
        for link in system.links.values() {
            for end in [&link.source, &link.target] {
                if !system.objects.contains_key(end) {
                    r.error(&link.loc, format!("unknown object {end} in link {}", link.id));
                }
            }
        }
    }
    for tp in &system.time_points {
        if let Some(states) = &tp.states {
            for id in states.keys() {
                if !system.objects.contains_key(id) {
                    r.error(&tp.loc, format!("unknown object {id} at time {}", tp.label));
                }
            }
        }
    }
}
