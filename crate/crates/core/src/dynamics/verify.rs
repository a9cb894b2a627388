use std::collections::BTreeSet;

use super::engine::{diff, execute, Element};
use super::trace::Trace;
use crate::constraints::{eval_predicate, in_template_closure, Binding};
use crate::metamodel::Model;
use crate::rules::{sort_violations, RuleId, Violation};

fn step_violation(rule: RuleId, i: usize, name: &str, message: String) -> Violation {
    Violation::new(rule, [format!("step{i}"), name.to_string()], message)
}

/// Checks a trace against the dynamic, invariant and static schemas of
/// `model` (D1–D5).
pub fn verify_trace(model: &Model, trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, snap) in trace.snapshots.iter().enumerate() {
        for inv in model.invariant_schemas.values() {
            match eval_predicate(&inv.predicate, model, snap, &Binding::new()) {
                Ok(true) => {}
                Ok(false) => out.push(Violation::new(
                    RuleId::D2,
                    [inv.name.clone(), format!("snapshot{i}")],
                    format!("invariant {} does not hold in snapshot {i}", inv.name),
                )),
                Err(e) => out.push(Violation::new(
                    RuleId::D2,
                    [inv.name.clone(), format!("snapshot{i}")],
                    format!("invariant {} cannot be evaluated in snapshot {i}: {e}", inv.name),
                )),
            }
        }
    }
    if let Some(first) = trace.snapshots.first() {
        for st in model.static_schemas.values() {
            let Some(idx) = first.time_index(&st.at) else {
                continue;
            };
            let Some(snap) = trace.snapshots.get(idx) else {
                continue;
            };
            let view = snap.view_at(&st.at).unwrap_or_else(|| snap.clone());
            match eval_predicate(&st.predicate, model, &view, &Binding::new()) {
                Ok(true) => {}
                Ok(false) => out.push(Violation::new(
                    RuleId::D3,
                    [st.name.as_str(), st.at.as_str()],
                    format!("static schema {} does not hold at {} (snapshot {idx})", st.name, st.at),
                )),
                Err(e) => out.push(Violation::new(
                    RuleId::D3,
                    [st.name.as_str(), st.at.as_str()],
                    format!("static schema {} cannot be evaluated at {}: {e}", st.name, st.at),
                )),
            }
        }
    }

    for (i, step) in trace.steps.iter().enumerate() {
        let (Some(start), Some(end)) = (trace.snapshots.get(i), trace.snapshots.get(i + 1)) else {
            continue;
        };
        let d1 = |message: String| step_violation(RuleId::D1, i, &step.rule, message);
        let Some(rule) = model.rule(&step.rule) else {
            out.push(d1(format!("model has no rule {}", step.rule)));
            continue;
        };
        if let Some(action) = model.action_templates.get(&rule.action) {
            if action.kind() != step.kind {
                out.push(d1(format!(
                    "step is recorded as {} but action {} is {}",
                    step.kind.as_str(),
                    action.name,
                    action.kind().as_str()
                )));
            }
        }
        let mut bound = BTreeSet::new();
        let mut binding_ok = true;
        for p in &rule.participants {
            let problem = match step.binding.object_of(&p.var) {
                None => Some(format!("participant {} is unbound", p.var)),
                Some(id) => match start.objects.get(id) {
                    None => Some(format!(
                        "participant {} is bound to {id}, absent from the start snapshot",
                        p.var
                    )),
                    Some(o) if !in_template_closure(model, &o.of, &p.template) => {
                        Some(format!("{id} does not instantiate {}", p.template))
                    }
                    Some(_) if !bound.insert(id) => Some(format!("{id} is bound to two participants")),
                    Some(_) => None,
                },
            };
            if let Some(problem) = problem {
                out.push(d1(problem));
                binding_ok = false;
            }
        }
        if !binding_ok {
            continue;
        }
        let participants: Binding = {
            let mut b = Binding::new();
            for p in &rule.participants {
                if let Some(d) = step.binding.get(&p.var) {
                    let _ = b.bind(p.var.clone(), d.clone());
                }
            }
            b
        };
        match eval_predicate(&rule.pre, model, start, &participants) {
            Ok(true) => {}
            Ok(false) => {
                out.push(d1(format!(
                    "precondition of {} is false in the start snapshot",
                    rule.name
                )));
                continue;
            }
            Err(e) => {
                out.push(d1(format!("precondition of {} cannot be evaluated: {e}", rule.name)));
                continue;
            }
        }
        let expected = match execute(start, model, rule, &step.binding) {
            Ok(a) => a,
            Err(e) => {
                out.push(d1(format!("effects cannot be replayed: {e}")));
                continue;
            }
        };
        match eval_predicate(&rule.post, model, end, &expected.binding) {
            Ok(true) => {}
            Ok(false) => out.push(d1(format!(
                "postcondition of {} is false in the end snapshot",
                rule.name
            ))),
            Err(e) => out.push(d1(format!("postcondition of {} cannot be evaluated: {e}", rule.name))),
        }
        for element in diff(end, &expected.system) {
            let (rule_id, what) = match &element {
                Element::Object(_) => (RuleId::D4, "creation, deletion or reclassification"),
                e if expected.footprint.covers(e) => (RuleId::D1, "written element"),
                _ => (RuleId::D5, "untouched element"),
            };
            out.push(Violation::new(
                rule_id,
                [format!("step{i}"), element.to_string()],
                format!("{what} {element} differs from what {} produces", rule.name),
            ));
        }
    }
    sort_violations(&mut out);
    out
}

/// A note about a step that is legal but suspicious.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepWarning {
    pub step: usize,
    pub rule: String,
    pub message: String,
}

/// Steps whose start and end snapshots coincide: an action is expected
/// to move between distinct states.
pub fn step_warnings(model: &Model, trace: &Trace) -> Vec<StepWarning> {
    let mut out = Vec::new();
    for (i, step) in trace.steps.iter().enumerate() {
        let (Some(a), Some(b)) = (trace.snapshots.get(i), trace.snapshots.get(i + 1)) else {
            continue;
        };
        if diff(a, b).is_empty() {
            let empty = model.rule(&step.rule).is_some_and(|r| r.effects.is_empty());
            let message = if empty {
                format!(
                    "rule {} has no effects; the step starts and ends in the same state",
                    step.rule
                )
            } else {
                format!("step of {} leaves the system unchanged", step.rule)
            };
            out.push(StepWarning {
                step: i,
                rule: step.rule.clone(),
                message,
            });
        }
    }
    out
}
