//! Rule-by-rule restatement of the instance and conformance rules, written
//! for clarity over plain vectors.

use std::collections::BTreeSet;

use odp_core::instance::System;
use odp_core::metamodel::{CountingScope, Model};

use super::interp;

pub type Finding = (String, Vec<String>);

fn finding(rule: &str, subjects: &[&str]) -> Finding {
    (rule.to_string(), subjects.iter().map(|s| s.to_string()).collect())
}

pub fn instance_findings(s: &System) -> BTreeSet<Finding> {
    let mut out = BTreeSet::new();
    let links: Vec<_> = s.links.values().collect();
    for l in &links {
        if !s.objects.contains_key(&l.source) || !s.objects.contains_key(&l.target) {
            out.insert(finding("I1", &[&l.id]));
        }
    }
    for l in &links {
        let mut same: Vec<String> = links
            .iter()
            .filter(|m| m.role == l.role && m.source == l.source && m.target == l.target)
            .map(|m| m.id.clone())
            .collect();
        if same.len() > 1 {
            same.sort();
            out.insert(("I2".to_string(), same));
        }
    }
    for t in &s.time_points {
        if let Some(states) = &t.states {
            for o in s.objects.keys() {
                if !states.contains_key(o) {
                    out.insert(finding("I3", &[&t.label, o]));
                }
            }
        }
    }
    out
}

fn parents_closure(m: &Model, t: &str) -> BTreeSet<String> {
    let mut result = BTreeSet::new();
    let mut frontier = vec![t.to_string()];
    for _ in 0..=m.templates.len() {
        let mut next = Vec::new();
        for x in &frontier {
            if let Some(tpl) = m.templates.get(x) {
                for p in &tpl.parents {
                    if result.insert(p.clone()) {
                        next.push(p.clone());
                    }
                }
            }
        }
        frontier = next;
    }
    result
}

pub fn conformance_findings(s: &System, m: &Model, literal_c6: bool) -> BTreeSet<Finding> {
    let mut out = BTreeSet::new();
    for o in s.objects.values() {
        let ok = o.of.iter().any(|t| {
            let mut c = parents_closure(m, t);
            c.insert(t.clone());
            c == o.of
        });
        if !ok {
            out.insert(finding("C1", &[&o.id]));
        }
        for t in &o.of {
            if !m.templates.contains_key(t) {
                out.insert(finding("C3", &[&o.id, t]));
            }
        }
        for t in &o.of {
            if let Some(tpl) = m.templates.get(t) {
                for ty in &tpl.types {
                    if !m.types.contains_key(ty) {
                        out.insert(finding("C4", &[t, ty]));
                    }
                }
            }
        }
    }
    for l in s.links.values() {
        match m.roles.get(&l.role) {
            None => {
                out.insert(finding("C5", &[&l.id]));
            }
            Some(r) => {
                if let (Some(a), Some(b)) = (s.objects.get(&l.source), s.objects.get(&l.target)) {
                    let a_ok = !a.of.is_disjoint(&r.source_templates);
                    let b_ok = !b.of.is_disjoint(&r.target_templates);
                    if !(a_ok && b_ok) {
                        out.insert(finding("C2", &[&l.id]));
                    }
                }
                if let Some(inv) = &r.inverse {
                    let n = s
                        .links
                        .values()
                        .filter(|x| &x.role == inv && x.source == l.target && x.target == l.source)
                        .count();
                    if n != 1 {
                        out.insert(finding("C7", &[&l.id]));
                    }
                }
            }
        }
    }
    for r in m.roles.values() {
        let lower = if literal_c6 {
            r.upper.unwrap_or(r.lower)
        } else {
            r.lower
        };
        let bad = |n: usize| (n as u64) < lower || r.upper.is_some_and(|u| n as u64 > u);
        match r.scope {
            CountingScope::Global => {
                let n = s.links.values().filter(|l| l.role == r.name).count();
                if bad(n) {
                    out.insert(finding("C6", &[&r.name]));
                }
            }
            CountingScope::PerSource => {
                let mut sources: BTreeSet<String> = s
                    .objects
                    .values()
                    .filter(|o| !o.of.is_disjoint(&r.source_templates))
                    .map(|o| o.id.clone())
                    .collect();
                sources.extend(s.links.values().filter(|l| l.role == r.name).map(|l| l.source.clone()));
                for src in sources {
                    let n = s.links.values().filter(|l| l.role == r.name && l.source == src).count();
                    if bad(n) {
                        out.insert(finding("C6", &[&r.name, &src]));
                    }
                }
            }
        }
    }
    for t2 in m.types.values() {
        let mut pairs: Vec<(String, String)> = t2.subtypes.iter().map(|t1| (t1.clone(), t2.name.clone())).collect();
        pairs.extend(t2.supertypes.iter().map(|sup| (t2.name.clone(), sup.clone())));
        for (sub, sup) in pairs {
            if let (Some(a), Some(b)) = (m.types.get(&sub), m.types.get(&sup)) {
                let ea = interp::extension(m, s, a);
                let eb = interp::extension(m, s, b);
                if !ea.is_subset(&eb) {
                    out.insert(finding("C8", &[&sub, &sup]));
                }
            }
        }
    }
    for inv in m.invariant_schemas.values() {
        if interp::holds(m, s, &inv.predicate) != Some(true) {
            out.insert(finding("D2", &[&inv.name]));
        }
    }
    for st in m.static_schemas.values() {
        if let Some(view) = s.view_at(&st.at) {
            if interp::holds(m, &view, &st.predicate) != Some(true) {
                out.insert(finding("D3", &[&st.name]));
            }
        }
    }
    out
}
