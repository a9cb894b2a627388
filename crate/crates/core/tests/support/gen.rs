//! Random well-typed predicates over a fixed model and system.

use odp_core::constraints::{BinOp, Expr, ExprKind, Quantifier, UnOp};
use odp_core::dsl::{parse_model, parse_system};
use odp_core::instance::System;
use odp_core::metamodel::Model;
use rand::{Rng, RngCore};

pub const MODEL: &str = r#"
model preds {
  template Srv {
    attrs { load: int; name: string; up: bool; }
    types: Hot;
  }
  template Cli {
    attrs { prio: int; }
  }
  template Vip {
    parents: Cli;
    attrs { level: int; }
  }
  type Hot {
    predicate: exists x: Srv . x = self and x.load > 1;
  }
  role serves { source: Srv; target: Cli; }
  role backup { source: Srv; target: Srv; }
}
"#;

pub const SYSTEM: &str = r#"
system world conforms preds {
  object k1 : Cli { prio = 1; }
  object k2 : Cli { prio = -1; }
  object s1 : Srv { load = 0; name = "a"; up = true; }
  object s2 : Srv { load = 2; name = "b"; up = false; }
  object s3 : Srv { load = 5; name = "a"; up = true; }
  object v1 : Cli, Vip { level = 2; prio = 3; }
  link l1 : serves (s1 -> k1);
  link l2 : serves (s1 -> k2);
  link l3 : serves (s2 -> v1);
  link l4 : serves (s3 -> k1);
  link l5 : backup (s1 -> s2);
  link l6 : backup (s2 -> s1);
  link l7 : backup (s3 -> s3);
}
"#;

pub fn world() -> (Model, System) {
    let model = parse_model(MODEL).unwrap();
    let system = parse_system(SYSTEM).unwrap();
    (model, system)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Srv,
    Cli,
    Vip,
}

impl Kind {
    fn constants(self) -> &'static [&'static str] {
        match self {
            Kind::Srv => &["s1", "s2", "s3"],
            Kind::Cli => &["k1", "k2", "v1"],
            Kind::Vip => &["v1"],
        }
    }

    fn fits(self, want: Kind) -> bool {
        self == want || (self == Kind::Vip && want == Kind::Cli)
    }
}

pub struct Gen<'r, R: RngCore> {
    rng: &'r mut R,
    scope: Vec<(String, Kind)>,
    fresh: usize,
}

fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
    Expr::binary(op, l, r)
}

fn wrap(kind: ExprKind) -> Expr {
    Expr::new(kind)
}

impl<'r, R: RngCore> Gen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        Gen {
            rng,
            scope: Vec::new(),
            fresh: 0,
        }
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.rng.random_range(0..xs.len())]
    }

    /// A closed boolean predicate with nesting depth at most `depth`.
    pub fn predicate(&mut self, depth: u32) -> Expr {
        self.scope.clear();
        self.boolean(depth)
    }

    fn object(&mut self, want: Kind) -> Expr {
        let vars: Vec<String> = self
            .scope
            .iter()
            .filter(|(_, k)| k.fits(want))
            .map(|(v, _)| v.clone())
            .collect();
        if !vars.is_empty() && self.rng.random_bool(0.7) {
            Expr::var(vars[self.rng.random_range(0..vars.len())].clone())
        } else {
            Expr::object(self.pick(want.constants()))
        }
    }

    fn set(&mut self, depth: u32) -> (Expr, Kind) {
        match self.rng.random_range(0..3) {
            0 => (Expr::member(self.object(Kind::Srv), "serves"), Kind::Cli),
            1 => (Expr::member(self.object(Kind::Srv), "backup"), Kind::Srv),
            _ => {
                let k = if depth > 0 && self.rng.random_bool(0.5) {
                    Kind::Vip
                } else {
                    Kind::Cli
                };
                (Expr::inverse_member(self.object(k), "serves"), Kind::Srv)
            }
        }
    }

    fn int(&mut self, depth: u32) -> Expr {
        let leaf = depth == 0 || self.rng.random_bool(0.3);
        if leaf {
            return match self.rng.random_range(0..5) {
                0 | 1 => Expr::int(self.rng.random_range(-3..=3)),
                2 => Expr::member(self.object(Kind::Srv), "load"),
                3 => Expr::member(self.object(Kind::Cli), "prio"),
                _ => Expr::member(self.object(Kind::Vip), "level"),
            };
        }
        match self.rng.random_range(0..5) {
            0 => bin(BinOp::Add, self.int(depth - 1), self.int(depth - 1)),
            1 => bin(BinOp::Sub, self.int(depth - 1), self.int(depth - 1)),
            2 => bin(BinOp::Mul, self.int(depth - 1), self.int(depth - 1)),
            3 => Expr::unary(UnOp::Neg, self.int(depth - 1)),
            _ => wrap(ExprKind::Size(Box::new(self.set(depth - 1).0))),
        }
    }

    fn boolean(&mut self, depth: u32) -> Expr {
        let leaf = depth == 0 || self.rng.random_bool(0.2);
        if leaf {
            return match self.rng.random_range(0..6) {
                0 => Expr::bool(self.rng.random_bool(0.5)),
                1 => Expr::member(self.object(Kind::Srv), "up"),
                2 => {
                    let k = self.pick(&[Kind::Srv, Kind::Cli]);
                    let op = self.pick(&[BinOp::Eq, BinOp::Ne]);
                    bin(op, self.object(k), self.object(k))
                }
                3 => {
                    let s = self.pick(&["a", "b", "c"]);
                    bin(BinOp::Eq, Expr::member(self.object(Kind::Srv), "name"), Expr::str(s))
                }
                4 => wrap(ExprKind::IsEmpty(Box::new(self.set(0).0))),
                _ => {
                    let (set, k) = self.set(0);
                    let item = self.object(k);
                    wrap(ExprKind::Includes(Box::new(set), Box::new(item)))
                }
            };
        }
        let d = depth - 1;
        match self.rng.random_range(0..9) {
            0 => Expr::not(self.boolean(d)),
            1 => bin(BinOp::And, self.boolean(d), self.boolean(d)),
            2 => bin(BinOp::Or, self.boolean(d), self.boolean(d)),
            3 => bin(BinOp::Implies, self.boolean(d), self.boolean(d)),
            4 | 5 => {
                let op = self.pick(&[BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge]);
                bin(op, self.int(d), self.int(d))
            }
            6 => {
                let (a, ka) = self.set(d);
                let (b, kb) = loop {
                    let (b, kb) = self.set(d);
                    if kb == ka {
                        break (b, kb);
                    }
                };
                debug_assert_eq!(ka, kb);
                wrap(ExprKind::IncludesAll(Box::new(a), Box::new(b)))
            }
            _ => {
                let q = self.pick(&[Quantifier::Forall, Quantifier::Exists]);
                let (domain, kind) = self.pick(&[
                    ("Srv", Kind::Srv),
                    ("Cli", Kind::Cli),
                    ("Vip", Kind::Vip),
                    ("Hot", Kind::Srv),
                ]);
                let var = format!("v{}", self.fresh);
                self.fresh += 1;
                self.scope.push((var.clone(), kind));
                let body = self.boolean(d);
                self.scope.pop();
                Expr::quant(q, var, domain, body)
            }
        }
    }
}

/// Nesting depth of connectives, quantifiers and operators.
pub fn depth(e: &Expr) -> u32 {
    match &e.kind {
        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Str(_) | ExprKind::Object(_) | ExprKind::Var(_) => 0,
        ExprKind::Member { base, .. } => depth(base),
        ExprKind::Unary(_, x) | ExprKind::Size(x) | ExprKind::IsEmpty(x) => 1 + depth(x),
        ExprKind::Binary(_, l, r) | ExprKind::Includes(l, r) | ExprKind::IncludesAll(l, r) => {
            1 + depth(l).max(depth(r))
        }
        ExprKind::Quant { body, .. } => 1 + depth(body),
    }
}

/// Every quantifier subterm of `e`, outermost first.
pub fn quantifiers(e: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
        match &e.kind {
            ExprKind::Quant { body, .. } => {
                out.push(e);
                walk(body, out);
            }
            ExprKind::Member { base, .. } => walk(base, out),
            ExprKind::Unary(_, x) | ExprKind::Size(x) | ExprKind::IsEmpty(x) => walk(x, out),
            ExprKind::Binary(_, l, r) | ExprKind::Includes(l, r) | ExprKind::IncludesAll(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            _ => {}
        }
    }
    walk(e, &mut out);
    out
}

/// `forall v: D . p` as `not exists v: D . not p`, and dually.
pub fn dual(e: &Expr) -> Option<Expr> {
    let ExprKind::Quant {
        quantifier,
        var,
        domain,
        body,
    } = &e.kind
    else {
        return None;
    };
    let flipped = match quantifier {
        Quantifier::Forall => Quantifier::Exists,
        Quantifier::Exists => Quantifier::Forall,
    };
    Some(Expr::not(Expr::quant(
        flipped,
        var.clone(),
        domain.clone(),
        Expr::not((**body).clone()),
    )))
}

/// Variables occurring free in `e`.
pub fn free_vars(e: &Expr) -> Vec<String> {
    let mut out = Vec::new();
    fn walk(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match &e.kind {
            ExprKind::Var(v) if !bound.contains(v) => out.push(v.clone()),
            ExprKind::Quant { var, body, .. } => {
                bound.push(var.clone());
                walk(body, bound, out);
                bound.pop();
            }
            ExprKind::Member { base, .. } => walk(base, bound, out),
            ExprKind::Unary(_, x) | ExprKind::Size(x) | ExprKind::IsEmpty(x) => walk(x, bound, out),
            ExprKind::Binary(_, l, r) | ExprKind::Includes(l, r) | ExprKind::IncludesAll(l, r) => {
                walk(l, bound, out);
                walk(r, bound, out);
            }
            _ => {}
        }
    }
    walk(e, &mut Vec::new(), &mut out);
    out
}
