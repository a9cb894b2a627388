//! Library-level checks behind the acceptance criteria. Each returns a
//! one-line summary on success and the list of failures otherwise.

use std::collections::BTreeSet;
use std::path::Path;

use odp_core::conformance::{conform, ConformOptions};
use odp_core::constraints::{eval_predicate, typecheck_predicate, Binding};
use odp_core::dsl::{
    parse_expr, parse_model, parse_model_named, parse_system, parse_system_with, parse_trace_named, print_expr,
    serialize_model, serialize_system, serialize_trace, SystemParseOptions,
};
use odp_core::dynamics::{diff, execute, simulate, verify_trace};
use odp_core::engineering::{
    authorize_invocation, build_channel, check_engineering, remote_create, transfer_entity, Authorization, Containment,
    DenyReason, EngineeringError, SoftwareEntity,
};
use odp_core::instance::{Link, System};
use odp_core::metamodel::Model;
use odp_core::value::{StateMap, Value};
use odp_core::wf::{check_model, check_system_wf, check_trace_wf};
use odp_core::{RuleId, Violation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{gen, interp, naive, read, repo_root, small, spec_files};

pub type Verdict = Result<String, Vec<String>>;

fn verdict(summary: String, failures: Vec<String>) -> Verdict {
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(failures)
    }
}

const LENIENT: SystemParseOptions = SystemParseOptions { resolve_links: false };

pub fn corpus_model() -> Model {
    parse_model(&read("corpus/dbms.odpm")).unwrap()
}

fn model_named(name: &str) -> Model {
    let root = repo_root();
    for dir in ["corpus", "fixtures"] {
        let path = root.join(dir).join(format!("{name}.odpm"));
        if path.exists() {
            return parse_model(&std::fs::read_to_string(path).unwrap()).unwrap();
        }
    }
    panic!("no model {name}");
}

/// Rules reported for one fixture, using the checker its prefix selects.
pub fn fixture_rules(path: &Path) -> Result<BTreeSet<RuleId>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let file = path.file_name().unwrap().to_string_lossy().to_string();
    let family = file.chars().next().unwrap();
    let violations: Vec<Violation> = match (family, path.extension().and_then(|e| e.to_str())) {
        ('w', _) | (_, Some("odpm")) => check_model(&parse_model_named(&text, &file).map_err(|r| r.to_string())?),
        (_, Some("odps")) => {
            let system = parse_system_with(&text, &file, LENIENT).map_err(|r| r.to_string())?;
            let mut v = check_system_wf(&system);
            if family == 'c' {
                let model = model_named(&system.model_ref);
                v.extend(
                    conform(&system, &model, ConformOptions::default())
                        .map_err(|e| e.to_string())?
                        .violations,
                );
            }
            v
        }
        (_, Some("odpt")) => {
            let trace = parse_trace_named(&text, &file).map_err(|r| r.to_string())?;
            let mut v = check_trace_wf(&trace);
            if family == 'd' {
                v.extend(verify_trace(&model_named(&trace.model_ref), &trace));
            }
            v
        }
        _ => return Err("unknown extension".into()),
    };
    Ok(violations.into_iter().map(|v| v.rule).collect())
}

pub fn rule_fixtures() -> Verdict {
    let dir = repo_root().join("fixtures");
    let mut failures = Vec::new();
    let mut pairs = 0;
    let families: Vec<(char, u32)> = vec![('w', 9), ('i', 5), ('c', 8), ('d', 5)];
    for (family, n) in families {
        for i in 1..=n {
            let rule: RuleId = format!("{}{i}", family.to_ascii_uppercase()).parse().unwrap();
            let stem = format!("{family}{i}");
            let ext = match family {
                'w' => "odpm",
                'i' if i <= 3 => "odps",
                'c' => "odps",
                _ => "odpt",
            };
            for (suffix, expected) in [("ok", BTreeSet::new()), ("bad", BTreeSet::from([rule]))] {
                let path = dir.join(format!("{stem}_{suffix}.{ext}"));
                match fixture_rules(&path) {
                    Ok(got) if got == expected => {}
                    Ok(got) => failures.push(format!("{}: expected {expected:?}, got {got:?}", path.display())),
                    Err(e) => failures.push(format!("{}: {e}", path.display())),
                }
            }
            pairs += 1;
        }
    }
    verdict(format!("{pairs} rules, ok and bad fixture each"), failures)
}

pub fn small_scope(max_objects: usize, max_links: usize) -> Verdict {
    let model = small::model();
    assert!(check_model(&model).is_empty());
    let mut failures = Vec::new();
    let mut fired = BTreeSet::new();
    let n = small::enumerate(max_objects, max_links, |s| {
        let got_i: BTreeSet<naive::Finding> = check_system_wf(s)
            .into_iter()
            .map(|v| (v.rule.to_string(), v.subjects))
            .collect();
        let want_i = naive::instance_findings(s);
        let got_c: BTreeSet<naive::Finding> = conform(s, &model, ConformOptions::default())
            .unwrap()
            .violations
            .into_iter()
            .map(|v| (v.rule.to_string(), v.subjects))
            .collect();
        let want_c = naive::conformance_findings(s, &model, false);
        fired.extend(got_i.iter().chain(&got_c).map(|f| f.0.clone()));
        if (got_i != want_i || got_c != want_c) && failures.len() < 5 {
            failures.push(format!(
                "{}\n  wf {got_i:?} vs oracle {want_i:?}\n  conform {got_c:?} vs oracle {want_c:?}",
                serialize_system(s)
            ));
        }
    });
    let fired: Vec<String> = fired.into_iter().collect();
    verdict(
        format!("{n} systems agree; rules exercised: {}", fired.join(" ")),
        failures,
    )
}

pub fn random_predicates(count: u64) -> Verdict {
    let (model, system) = gen::world();
    let mut failures = Vec::new();
    let mut duals = 0;
    let mut truths = 0;
    for seed in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = gen::Gen::new(&mut rng).predicate(3);
        let text = print_expr(&p);
        if gen::depth(&p) > 4 {
            failures.push(format!("seed {seed}: depth {} > 4: {text}", gen::depth(&p)));
        }
        if let Err(e) = typecheck_predicate(&p, &model) {
            failures.push(format!("seed {seed}: ill-typed {text}: {e:?}"));
            continue;
        }
        let got = eval_predicate(&p, &model, &system, &Binding::new()).ok();
        let want = interp::holds(&model, &system, &p);
        if got != want || want.is_none() {
            failures.push(format!("seed {seed}: {text}: evaluator {got:?}, reference {want:?}"));
        }
        truths += usize::from(want == Some(true));
        match parse_expr(&text) {
            Ok(back) if back == p => {}
            other => failures.push(format!("seed {seed}: {text} reparsed as {other:?}")),
        }
        for q in gen::quantifiers(&p) {
            if !gen::free_vars(q).is_empty() {
                continue;
            }
            let d = gen::dual(q).unwrap();
            let a = eval_predicate(q, &model, &system, &Binding::new()).ok();
            let b = eval_predicate(&d, &model, &system, &Binding::new()).ok();
            if a.is_none() || a != b {
                failures.push(format!("seed {seed}: {} is {a:?} but its dual is {b:?}", print_expr(q)));
            }
            duals += 1;
        }
    }
    verdict(
        format!("{count} predicates ({truths} true), {duals} closed quantifiers dualized"),
        failures,
    )
}

/// Every corpus system that names the corpus model.
pub fn corpus_systems() -> Vec<(String, System)> {
    spec_files()
        .into_iter()
        .filter(|p| p.starts_with(repo_root().join("corpus")) && p.extension().is_some_and(|e| e == "odps"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().to_string();
            (name, parse_system(&std::fs::read_to_string(&p).unwrap()).unwrap())
        })
        .collect()
}

pub fn dynamics(seeds: u64, steps: usize) -> Verdict {
    let model = corpus_model();
    let mut failures = Vec::new();
    let mut total_steps = 0;
    let mut fired = BTreeSet::new();
    for (name, initial) in corpus_systems() {
        for seed in 0..seeds {
            let trace = match simulate(&model, &initial, steps, seed) {
                Ok(t) => t,
                Err(e) => {
                    failures.push(format!("{name} seed {seed}: {e}"));
                    continue;
                }
            };
            total_steps += trace.steps.len();
            let v = verify_trace(&model, &trace);
            if !v.is_empty() {
                failures.push(format!("{name} seed {seed}: verify_trace reports {:?}", v));
            }
            for (i, snap) in trace.snapshots.iter().enumerate() {
                let report = conform(snap, &model, ConformOptions::default()).unwrap();
                let bad: Vec<_> = report
                    .violations
                    .iter()
                    .filter(|v| matches!(v.rule, RuleId::C1 | RuleId::D2))
                    .collect();
                if !bad.is_empty() {
                    failures.push(format!("{name} seed {seed} snapshot {i}: {bad:?}"));
                }
            }
            for (i, step) in trace.steps.iter().enumerate() {
                fired.insert(step.rule.clone());
                let (before, after) = (&trace.snapshots[i], &trace.snapshots[i + 1]);
                let rule = model.rule(&step.rule).unwrap();
                let applied = execute(before, &model, rule, &step.binding).unwrap();
                let outside: Vec<_> = diff(before, after)
                    .into_iter()
                    .filter(|e| !applied.footprint.covers(e))
                    .collect();
                if !outside.is_empty() {
                    failures.push(format!(
                        "{name} seed {seed} step {i}: changes outside the footprint {outside:?}"
                    ));
                }
            }
        }
    }
    let fired: Vec<String> = fired.into_iter().collect();
    verdict(
        format!("{total_steps} steps verified; rules fired: {}", fired.join(" ")),
        failures,
    )
}

pub fn round_trip() -> Verdict {
    let mut failures = Vec::new();
    let files = spec_files();
    for path in &files {
        let text = std::fs::read_to_string(path).unwrap();
        let name = path.display().to_string();
        let (first, second) = match path.extension().and_then(|e| e.to_str()) {
            Some("odpm") => {
                let a = parse_model(&text).unwrap();
                let s1 = serialize_model(&a);
                let b = parse_model(&s1).unwrap();
                if a != b {
                    failures.push(format!("{name}: model changed across a round trip"));
                }
                (s1, serialize_model(&b))
            }
            Some("odps") => {
                let a = parse_system_with(&text, &name, LENIENT).unwrap();
                let s1 = serialize_system(&a);
                let b = parse_system_with(&s1, &name, LENIENT).unwrap();
                if a != b {
                    failures.push(format!("{name}: system changed across a round trip"));
                }
                (s1, serialize_system(&b))
            }
            _ => {
                let a = parse_trace_named(&text, &name).unwrap();
                let s1 = serialize_trace(&a);
                let b = parse_trace_named(&s1, &name).unwrap();
                if a != b {
                    failures.push(format!("{name}: trace changed across a round trip"));
                }
                (s1, serialize_trace(&b))
            }
        };
        if first != second {
            failures.push(format!("{name}: serialization is not idempotent"));
        }
    }
    if files.len() < 50 {
        failures.push(format!("only {} files", files.len()));
    }
    verdict(format!("{} files", files.len()), failures)
}

fn base() -> (Model, System) {
    (corpus_model(), parse_system(&read("corpus/dbms_base.odps")).unwrap())
}

pub fn engineering() -> Verdict {
    let (model, sys) = base();
    let mut failures = Vec::new();

    let pair = parse_system(&read("corpus/dbms_pair.odps")).unwrap();
    match build_channel("c1", "srv1", &pair, &model) {
        Ok(ch) => {
            let objects = ch.objects.len() - pair.objects.len();
            let links = ch.links.len() - pair.links.len();
            if (objects, links) != (6, 7) {
                failures.push(format!("channel added {objects} objects and {links} links"));
            }
            let report = conform(&ch, &model, ConformOptions::default()).unwrap();
            if !report.violations.is_empty() || !check_engineering(&ch, &model).is_empty() {
                failures.push(format!("channel system does not conform: {:?}", report.violations));
            }
        }
        Err(e) => failures.push(format!("build_channel: {e}")),
    }

    let mut table = 0;
    for has_ref in [false, true] {
        for authorized in [false, true] {
            let mut s = pair.clone();
            s.objects
                .get_mut("c1")
                .unwrap()
                .state
                .insert("authorized".into(), Value::Bool(authorized));
            if !has_ref {
                s.links.remove("r1");
            }
            let want = match (has_ref, authorized) {
                (false, _) => Authorization::Deny(DenyReason::NoReference),
                (true, false) => Authorization::Deny(DenyReason::NoAuthorization),
                (true, true) => Authorization::Allow,
            };
            let got = authorize_invocation("c1", "srv1", &s);
            if got != want {
                failures.push(format!("ref={has_ref} authorized={authorized}: {got}, expected {want}"));
            }
            table += 1;
        }
    }
    let mut granted = pair.clone();
    granted
        .objects
        .get_mut("c1")
        .unwrap()
        .state
        .insert("authorized".into(), Value::Bool(false));
    granted.add_link(Link::new("gr1", "grant", "c1", "srv1"));
    if authorize_invocation("c1", "srv1", &granted) != Authorization::Allow {
        failures.push("a grant link does not authorize".into());
    }

    let before = Containment::of(&sys, &model);
    let entity = SoftwareEntity::from_object(&sys, "c1").unwrap();
    let round = transfer_entity(&entity, "n2", &sys, &model).and_then(|(mid, req)| {
        if req.source.as_deref() != Some("n1") || req.destination != "n2" {
            failures.push(format!("unexpected travel request {req:?}"));
        }
        if Containment::of(&mid, &model).location("c1").map(|l| l.0) != Some("n2") {
            failures.push("c1 did not move to n2".into());
        }
        let entity = SoftwareEntity::from_object(&mid, "c1")?;
        transfer_entity(&entity, "n1", &mid, &model)
    });
    match round {
        Ok((back, _)) => {
            if Containment::of(&back, &model) != before {
                failures.push("transfer n1 -> n2 -> n1 does not restore containment".into());
            }
        }
        Err(e) => failures.push(format!("transfer: {e}")),
    }

    let snapshot = sys.clone();
    match remote_create("c2", "ClientMgr", &StateMap::new(), "n1", &sys, &model) {
        Err(EngineeringError::AuthenticationFailed { .. }) => {}
        other => failures.push(format!(
            "unauthenticated remote_create returned {:?}",
            other.map(|r| r.1)
        )),
    }
    if sys != snapshot {
        failures.push("unauthenticated remote_create changed the system".into());
    }
    verdict(
        format!("channel 6/7, {table}-case authorization table, transfer round trip, refused create"),
        failures,
    )
}
