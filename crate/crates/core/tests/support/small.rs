//! Exhaustive small-scope enumeration of systems over a fixed model.

use odp_core::dsl::parse_model;
use odp_core::instance::{Link, ObjectInstance, System, TimePoint};
use odp_core::metamodel::Model;
use odp_core::value::Value;

pub const MODEL: &str = r#"
model small {
  template A {
    attrs { n: int; }
    types: Pos;
  }
  template B {
    parents: A;
  }
  type Pos {
    predicate: exists x: A . x = self and x.n > 0;
  }
  role r { source: A; target: B; card: 0..1; inverse: s; }
  role s { source: B; target: A; card: 1..2; scope: per-source; inverse: r; }
  invariant NonNeg { forall x: A . x.n >= 0 }
}
"#;

pub fn model() -> Model {
    parse_model(MODEL).unwrap()
}

const OF_SETS: &[&[&str]] = &[&["A"], &["A", "B"], &["B"], &["Z"]];
const ROLES: &[&str] = &["r", "s", "q"];
const VALUES: &[i64] = &[1, -1, 0];
const GHOST: &str = "o9";

/// Calls `visit` on every system with at most `max_objects` objects and
/// `max_links` links. Object `oi` has `n = VALUES[i-1]`; links may use the
/// undeclared endpoint `o9` and the undeclared role `q`. Every fifth system
/// additionally gets a time point whose explicit states omit the last
/// object. Returns the number of systems visited.
pub fn enumerate(max_objects: usize, max_links: usize, mut visit: impl FnMut(&System)) -> usize {
    let mut count = 0usize;
    for k in 0..=max_objects {
        let ids: Vec<String> = (1..=k).map(|i| format!("o{i}")).collect();
        let mut ends: Vec<&str> = ids.iter().map(String::as_str).collect();
        ends.push(GHOST);
        let mut choices = Vec::new();
        for role in ROLES {
            for src in &ends {
                for tgt in &ends {
                    choices.push((*role, *src, *tgt));
                }
            }
        }
        for of_choice in 0..OF_SETS.len().pow(k as u32) {
            let mut base = System::new("e", "small");
            let mut c = of_choice;
            for (i, id) in ids.iter().enumerate() {
                let of = OF_SETS[c % OF_SETS.len()];
                c /= OF_SETS.len();
                base.add_object(ObjectInstance::new(id.clone(), of.iter().copied()).with("n", Value::int(VALUES[i])));
            }
            let mut picks = Vec::new();
            multisets(choices.len(), max_links, 0, &mut picks, &mut |picks| {
                let mut s = base.clone();
                for (j, &p) in picks.iter().enumerate() {
                    let (role, src, tgt) = choices[p];
                    s.add_link(Link::new(format!("l{}", j + 1), role, src, tgt));
                }
                if count.is_multiple_of(5) && k > 0 {
                    let mut tp = TimePoint::current("t0");
                    let states = s
                        .objects
                        .values()
                        .take(k - 1)
                        .map(|o| (o.id.clone(), o.state.clone()))
                        .collect();
                    tp.states = Some(states);
                    s.time_points.push(tp);
                }
                visit(&s);
                count += 1;
            });
        }
    }
    count
}

/// Non-decreasing index sequences of length at most `left` over `0..n`.
fn multisets(n: usize, left: usize, from: usize, picks: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    f(picks);
    if left == 0 {
        return;
    }
    for i in from..n {
        picks.push(i);
        multisets(n, left - 1, i, picks, f);
        picks.pop();
    }
}
