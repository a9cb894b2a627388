//! Well-formedness of models (W1–W9) and of systems and traces (I1–I5).

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::dynamics::Trace;
use crate::instance::{BoundState, Condition, System};
use crate::metamodel::Model;
use crate::rules::{sort_violations, RuleId, Violation};

/// Every well-formedness violation of `model`, in report order.
pub fn check_model(model: &Model) -> Vec<Violation> {
    let mut out = Vec::new();
    for t in model.templates.values() {
        let span = t.loc.span();
        let refs = [
            (
                RuleId::W1,
                &t.dynamic_schemas,
                "dynamic schema",
                &model.dynamic_schemas.keys().collect::<BTreeSet<_>>(),
            ),
            (
                RuleId::W2,
                &t.static_schemas,
                "static schema",
                &model.static_schemas.keys().collect(),
            ),
            (
                RuleId::W3,
                &t.invariant_schemas,
                "invariant schema",
                &model.invariant_schemas.keys().collect(),
            ),
            (
                RuleId::W4,
                &t.actions,
                "action template",
                &model.action_templates.keys().collect(),
            ),
            (RuleId::W5, &t.types, "type", &model.types.keys().collect()),
        ];
        for (rule, names, what, known) in refs {
            for name in names {
                if !known.contains(name) {
                    out.push(
                        Violation::new(
                            rule,
                            [t.name.as_str(), name.as_str()],
                            format!("template {} references {what} {name}, which the model does not declare; declaring it removes this violation", t.name),
                        )
                        .at(span),
                    );
                }
            }
        }
    }
    for a in model.action_templates.values() {
        for ty in &a.types {
            if !model.types.contains_key(ty) {
                out.push(
                    Violation::new(
                        RuleId::W5,
                        [a.name.as_str(), ty.as_str()],
                        format!("action {} references type {ty}, which the model does not declare; declaring it removes this violation", a.name),
                    )
                    .at(a.loc.span()),
                );
            }
        }
        if a.start_label == a.end_label {
            out.push(
                Violation::new(
                    RuleId::W8,
                    [a.name.as_str()],
                    format!(
                        "action {} starts and ends in the same state `{}`",
                        a.name, a.start_label
                    ),
                )
                .at(a.loc.span()),
            );
        }
    }

    for t2 in model.types.values() {
        for t1 in &t2.subtypes {
            let mutual = model.types.get(t1).is_some_and(|t| t.supertypes.contains(&t2.name));
            if !mutual {
                out.push(
                    Violation::new(
                        RuleId::W6,
                        [t1.as_str(), t2.name.as_str()],
                        format!(
                            "{} lists {t1} as subtype, but {t1} does not list {} as supertype",
                            t2.name, t2.name
                        ),
                    )
                    .at(t2.loc.span()),
                );
            }
        }
        for sup in &t2.supertypes {
            let mutual = model.types.get(sup).is_some_and(|t| t.subtypes.contains(&t2.name));
            if !mutual {
                out.push(
                    Violation::new(
                        RuleId::W7,
                        [t2.name.as_str(), sup.as_str()],
                        format!(
                            "{} lists {sup} as supertype, but {sup} does not list {} as subtype",
                            t2.name, t2.name
                        ),
                    )
                    .at(t2.loc.span()),
                );
            }
        }
    }
    let sub_edges = model
        .types
        .values()
        .flat_map(|t| t.subtypes.iter().map(move |s| (t.name.as_str(), s.as_str())));
    for cycle in cycles(sub_edges) {
        out.push(Violation::new(
            RuleId::W6,
            cycle.clone(),
            format!("subtype declarations form a cycle through {}", cycle.join(", ")),
        ));
    }
    let sup_edges = model
        .types
        .values()
        .flat_map(|t| t.supertypes.iter().map(move |s| (t.name.as_str(), s.as_str())));
    for cycle in cycles(sup_edges) {
        out.push(Violation::new(
            RuleId::W7,
            cycle.clone(),
            format!("supertype declarations form a cycle through {}", cycle.join(", ")),
        ));
    }

    let parent_edges = model
        .templates
        .values()
        .flat_map(|t| t.parents.iter().map(move |p| (t.name.as_str(), p.as_str())));
    for cycle in cycles(parent_edges) {
        let message = if cycle.len() == 1 {
            format!("template {} is its own parent", cycle[0])
        } else {
            format!("parenthood forms a cycle through {}", cycle.join(", "))
        };
        let span = model.templates.get(&cycle[0]).and_then(|t| t.loc.span().cloned());
        out.push(Violation::new(RuleId::W9, cycle, message).at(span.as_ref()));
    }

    sort_violations(&mut out);
    out
}

/// Strongly connected components that contain a cycle, each as a sorted
/// list of names.
fn cycles<'a>(edges: impl Iterator<Item = (&'a str, &'a str)>) -> Vec<Vec<String>> {
    let mut graph = DiGraph::<&str, ()>::new();
    let mut nodes = BTreeMap::new();
    let mut self_loops = BTreeSet::new();
    for (a, b) in edges {
        let ia = *nodes.entry(a).or_insert_with(|| graph.add_node(a));
        let ib = *nodes.entry(b).or_insert_with(|| graph.add_node(b));
        if a == b {
            self_loops.insert(a);
        }
        graph.add_edge(ia, ib, ());
    }
    let mut out: Vec<Vec<String>> = tarjan_scc(&graph)
        .into_iter()
        .filter(|scc| scc.len() > 1 || self_loops.contains(graph[scc[0]]))
        .map(|scc| {
            let mut names: Vec<String> = scc.iter().map(|i| graph[*i].to_string()).collect();
            names.sort();
            names
        })
        .collect();
    out.sort();
    out
}

/// Instance-level well-formedness of one system (I1–I3).
pub fn check_system_wf(system: &System) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_key: BTreeMap<_, Vec<&str>> = BTreeMap::new();
    for link in system.links.values() {
        for end in [&link.source, &link.target] {
            if !system.objects.contains_key(end) {
                out.push(
                    Violation::new(
                        RuleId::I1,
                        [link.id.as_str()],
                        format!("link {} refers to missing object {end}", link.id),
                    )
                    .at(link.loc.span()),
                );
            }
        }
        by_key.entry(link.key()).or_default().push(&link.id);
    }
    for (key, ids) in by_key {
        if ids.len() > 1 {
            out.push(Violation::new(
                RuleId::I2,
                ids.iter().copied(),
                format!("links {} all connect {key}", ids.join(", ")),
            ));
        }
    }
    for tp in &system.time_points {
        if let Some(states) = &tp.states {
            for id in system.objects.keys() {
                if !states.contains_key(id) {
                    out.push(
                        Violation::new(
                            RuleId::I3,
                            [tp.label.as_str(), id.as_str()],
                            format!("object {id} has no state at time {}", tp.label),
                        )
                        .at(tp.loc.span()),
                    );
                }
            }
        }
    }
    sort_violations(&mut out);
    out
}

/// I1–I3 on every snapshot of `trace`, plus I4/I5 on its condition
/// bindings.
pub fn check_trace_wf(trace: &Trace) -> Vec<Violation> {
    let mut out: Vec<Violation> = trace.snapshots.iter().flat_map(check_system_wf).collect();
    for (i, step) in trace.steps.iter().enumerate() {
        let (Some(start), Some(end)) = (trace.snapshots.get(i), trace.snapshots.get(i + 1)) else {
            continue;
        };
        for c in &step.conditions {
            let subjects = [step.rule.as_str(), c.object.as_str()];
            match c.condition {
                Condition::Pre => {
                    if c.bound != BoundState::Start {
                        out.push(Violation::new(
                            RuleId::I4,
                            subjects,
                            format!(
                                "step {i}: precondition of {} bound to the end state of {}",
                                step.rule, c.object
                            ),
                        ));
                    } else if !start.objects.contains_key(&c.object) {
                        out.push(Violation::new(
                            RuleId::I4,
                            subjects,
                            format!(
                                "step {i}: precondition of {} bound to {}, which has no start state",
                                step.rule, c.object
                            ),
                        ));
                    }
                }
                Condition::Post => {
                    if c.bound != BoundState::End {
                        out.push(Violation::new(
                            RuleId::I5,
                            subjects,
                            format!(
                                "step {i}: postcondition of {} bound to the start state of {}",
                                step.rule, c.object
                            ),
                        ));
                    } else if !end.objects.contains_key(&c.object) {
                        out.push(Violation::new(
                            RuleId::I5,
                            subjects,
                            format!(
                                "step {i}: postcondition of {} bound to {}, which has no end state",
                                step.rule, c.object
                            ),
                        ));
                    }
                }
            }
        }
    }
    sort_violations(&mut out);
    out
}
