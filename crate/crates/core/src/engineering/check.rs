use std::collections::BTreeMap;

use super::channel::{follow_chain, CHAIN_ROLES};
use super::containment::{is_at_level, Level};
use super::operations::PAYLOAD;
use crate::instance::System;
use crate::metamodel::Model;
use crate::rules::{sort_violations, RuleId, Violation};
use crate::value::Value;

/// Engineering structure checks:
/// E1 containment link between the wrong levels,
/// E2 object with more than one container,
/// E3 two nodes with the same name,
/// E4 software entity with an incomplete payload,
/// E5 channel chain with a missing or ambiguous hop.
pub fn check_engineering(system: &System, model: &Model) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut containers: BTreeMap<(&str, &str), Vec<&str>> = BTreeMap::new();
    for link in system.links.values() {
        let Some((upper, lower)) = Level::of_role(&link.role) else {
            continue;
        };
        if !is_at_level(system, model, &link.source, upper) || !is_at_level(system, model, &link.target, lower) {
            out.push(
                Violation::new(
                    RuleId::E1,
                    [link.id.as_str()],
                    format!(
                        "{} link {} does not join a {upper:?} to a {lower:?}",
                        link.role, link.id
                    ),
                )
                .at(link.loc.span()),
            );
        }
        containers
            .entry((link.role.as_str(), link.target.as_str()))
            .or_default()
            .push(&link.source);
    }
    for ((role, object), parents) in containers {
        if parents.len() > 1 {
            out.push(Violation::new(
                RuleId::E2,
                [object],
                format!(
                    "{object} has {} containers via {role}: {}",
                    parents.len(),
                    parents.join(", ")
                ),
            ));
        }
    }

    let mut names: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for o in system.objects.values() {
        if is_at_level(system, model, &o.id, Level::Node) {
            if let Some(name) = o.state.get("name").and_then(Value::as_str) {
                names.entry(name).or_default().push(&o.id);
            }
        }
    }
    for (name, ids) in names {
        if ids.len() > 1 {
            out.push(Violation::new(
                RuleId::E3,
                ids.iter().copied(),
                format!("nodes share the name {name:?}"),
            ));
        }
    }

    for o in system.objects.values() {
        if !is_at_level(system, model, &o.id, Level::Object) {
            continue;
        }
        for attr in PAYLOAD {
            let present = matches!(o.state.get(attr).and_then(Value::as_str), Some(v) if !v.is_empty());
            if !present {
                out.push(
                    Violation::new(
                        RuleId::E4,
                        [o.id.as_str(), attr],
                        format!("{} lacks a {attr} to travel with", o.id),
                    )
                    .at(o.loc.span()),
                );
            }
        }
    }

    for link in system.links_of_role(CHAIN_ROLES[0]) {
        if follow_chain(system, &link.source, &link.target).is_none() {
            out.push(
                Violation::new(
                    RuleId::E5,
                    [link.target.as_str()],
                    format!(
                        "channel from {} through {} does not reach a server",
                        link.source, link.target
                    ),
                )
                .at(link.loc.span()),
            );
        }
    }
    sort_violations(&mut out);
    out
}
