//! Reference interpreter: eager, no short-circuiting, machine integers.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;
use odp_core::constraints::{BinOp, Expr, ExprKind, Quantifier, UnOp};
use odp_core::instance::System;
use odp_core::metamodel::{Model, Type};
use odp_core::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum V {
    I(i128),
    B(bool),
    S(String),
    O(String),
    Set(BTreeSet<String>),
}

pub type Env = BTreeMap<String, V>;

pub fn ancestors(m: &Model, t: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![t.to_string()];
    while let Some(x) = stack.pop() {
        if let Some(tpl) = m.templates.get(&x) {
            for p in &tpl.parents {
                if seen.insert(p.clone()) {
                    stack.push(p.clone());
                }
            }
        }
    }
    seen
}

pub fn domain(m: &Model, s: &System, d: &str) -> Option<Vec<String>> {
    if m.templates.contains_key(d) {
        let mut out = Vec::new();
        for o in s.objects.values() {
            let mut all = o.of.clone();
            for t in &o.of {
                all.extend(ancestors(m, t));
            }
            if all.contains(d) {
                out.push(o.id.clone());
            }
        }
        Some(out)
    } else {
        m.types.get(d).map(|ty| extension(m, s, ty).into_iter().collect())
    }
}

/// Objects satisfying the type predicate; an object whose evaluation fails
/// is left out.
pub fn extension(m: &Model, s: &System, ty: &Type) -> BTreeSet<String> {
    s.objects
        .keys()
        .filter(|id| {
            let env = Env::from([("self".to_string(), V::O(id.to_string()))]);
            eval(m, s, &ty.predicate, &env) == Some(V::B(true))
        })
        .cloned()
        .collect()
}

pub fn holds(m: &Model, s: &System, p: &Expr) -> Option<bool> {
    match eval(m, s, p, &Env::new())? {
        V::B(b) => Some(b),
        _ => None,
    }
}

pub fn eval(m: &Model, s: &System, e: &Expr, env: &Env) -> Option<V> {
    Some(match &e.kind {
        ExprKind::Int(i) => V::I(i.to_i128()?),
        ExprKind::Bool(b) => V::B(*b),
        ExprKind::Str(x) => V::S(x.clone()),
        ExprKind::Object(id) => V::O(id.clone()),
        ExprKind::Var(v) => env.get(v)?.clone(),
        ExprKind::Member { base, name, inverse } => {
            let V::O(id) = eval(m, s, base, env)? else { return None };
            if m.roles.contains_key(name) {
                let set = s
                    .links
                    .values()
                    .filter(|l| &l.role == name)
                    .filter_map(|l| match inverse {
                        false if l.source == id => Some(l.target.clone()),
                        true if l.target == id => Some(l.source.clone()),
                        _ => None,
                    })
                    .collect();
                V::Set(set)
            } else {
                match s.objects.get(&id)?.state.get(name)? {
                    Value::Int(i) => V::I(i.to_i128()?),
                    Value::Bool(b) => V::B(*b),
                    Value::Str(x) => V::S(x.clone()),
                }
            }
        }
        ExprKind::Unary(UnOp::Neg, x) => match eval(m, s, x, env)? {
            V::I(i) => V::I(-i),
            _ => return None,
        },
        ExprKind::Unary(UnOp::Not, x) => match eval(m, s, x, env)? {
            V::B(b) => V::B(!b),
            _ => return None,
        },
        ExprKind::Binary(op, l, r) => {
            let a = eval(m, s, l, env)?;
            let b = eval(m, s, r, env)?;
            match (op, a, b) {
                (BinOp::And, V::B(a), V::B(b)) => V::B(a & b),
                (BinOp::Or, V::B(a), V::B(b)) => V::B(a | b),
                (BinOp::Implies, V::B(a), V::B(b)) => V::B(!a | b),
                (BinOp::Add, V::I(a), V::I(b)) => V::I(a + b),
                (BinOp::Sub, V::I(a), V::I(b)) => V::I(a - b),
                (BinOp::Mul, V::I(a), V::I(b)) => V::I(a * b),
                (BinOp::Lt, V::I(a), V::I(b)) => V::B(a < b),
                (BinOp::Le, V::I(a), V::I(b)) => V::B(a <= b),
                (BinOp::Gt, V::I(a), V::I(b)) => V::B(a > b),
                (BinOp::Ge, V::I(a), V::I(b)) => V::B(a >= b),
                (BinOp::Eq, a, b) if std::mem::discriminant(&a) == std::mem::discriminant(&b) => V::B(a == b),
                (BinOp::Ne, a, b) if std::mem::discriminant(&a) == std::mem::discriminant(&b) => V::B(a != b),
                _ => return None,
            }
        }
        ExprKind::Quant {
            quantifier,
            var,
            domain: d,
            body,
        } => {
            let mut results = Vec::new();
            for id in domain(m, s, d)? {
                let mut inner = env.clone();
                inner.insert(var.clone(), V::O(id));
                match eval(m, s, body, &inner)? {
                    V::B(b) => results.push(b),
                    _ => return None,
                }
            }
            V::B(match quantifier {
                Quantifier::Forall => results.iter().all(|b| *b),
                Quantifier::Exists => results.iter().any(|b| *b),
            })
        }
        ExprKind::Size(x) => match eval(m, s, x, env)? {
            V::Set(set) => V::I(set.len() as i128),
            _ => return None,
        },
        ExprKind::IsEmpty(x) => match eval(m, s, x, env)? {
            V::Set(set) => V::B(set.is_empty()),
            _ => return None,
        },
        ExprKind::Includes(a, b) => match (eval(m, s, a, env)?, eval(m, s, b, env)?) {
            (V::Set(set), V::O(id)) => V::B(set.contains(&id)),
            _ => return None,
        },
        ExprKind::IncludesAll(a, b) => match (eval(m, s, a, env)?, eval(m, s, b, env)?) {
            (V::Set(x), V::Set(y)) => V::B(y.iter().all(|i| x.contains(i))),
            _ => return None,
        },
    })
}
