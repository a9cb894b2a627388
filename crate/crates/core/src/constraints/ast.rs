//! Abstract syntax of predicates.

use num_bigint::BigInt;

use crate::span::{Loc, SourceSpan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "implies",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

/// A predicate or term. Schema bodies, type predicates, guards and effect
/// right-hand sides all share this tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    Int(BigInt),
    Bool(bool),
    Str(String),
    /// `@id`: a constant denoting the object with that id.
    Object(String),
    Var(String),
    /// `base.name`: an attribute read, or navigation along the role `name`
    /// (targets of links leaving `base`). With `inverse`, navigation runs
    /// backwards (sources of links entering `base`).
    Member {
        base: Box<Expr>,
        name: String,
        inverse: bool,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `forall var : Domain . body`; `Domain` names a template or a type.
    Quant {
        quantifier: Quantifier,
        var: String,
        domain: String,
        body: Box<Expr>,
    },
    Size(Box<Expr>),
    IsEmpty(Box<Expr>),
    Includes(Box<Expr>, Box<Expr>),
    IncludesAll(Box<Expr>, Box<Expr>),
}

/// Predicates are boolean-sorted expressions.
pub type Predicate = Expr;

impl Expr {
    pub fn new(kind: ExprKind) -> Expr {
        Expr { kind, loc: Loc::NONE }
    }

    pub fn with_span(kind: ExprKind, span: SourceSpan) -> Expr {
        Expr {
            kind,
            loc: Loc(Some(span)),
        }
    }

    pub fn span(&self) -> Option<&SourceSpan> {
        self.loc.span()
    }

    pub fn int(v: i64) -> Expr {
        Expr::new(ExprKind::Int(BigInt::from(v)))
    }

    pub fn bool(v: bool) -> Expr {
        Expr::new(ExprKind::Bool(v))
    }

    pub fn str(v: impl Into<String>) -> Expr {
        Expr::new(ExprKind::Str(v.into()))
    }

    pub fn object(id: impl Into<String>) -> Expr {
        Expr::new(ExprKind::Object(id.into()))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::new(ExprKind::Var(name.into()))
    }

    pub fn member(base: Expr, name: impl Into<String>) -> Expr {
        Expr::new(ExprKind::Member {
            base: Box::new(base),
            name: name.into(),
            inverse: false,
        })
    }

    pub fn inverse_member(base: Expr, name: impl Into<String>) -> Expr {
        Expr::new(ExprKind::Member {
            base: Box::new(base),
            name: name.into(),
            inverse: true,
        })
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::new(ExprKind::Unary(op, Box::new(e)))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::unary(UnOp::Not, e)
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)))
    }

    pub fn quant(q: Quantifier, var: impl Into<String>, domain: impl Into<String>, body: Expr) -> Expr {
        Expr::new(ExprKind::Quant {
            quantifier: q,
            var: var.into(),
            domain: domain.into(),
            body: Box::new(body),
        })
    }

    pub fn forall(var: impl Into<String>, domain: impl Into<String>, body: Expr) -> Expr {
        Expr::quant(Quantifier::Forall, var, domain, body)
    }

    pub fn exists(var: impl Into<String>, domain: impl Into<String>, body: Expr) -> Expr {
        Expr::quant(Quantifier::Exists, var, domain, body)
    }

    pub fn size(e: Expr) -> Expr {
        Expr::new(ExprKind::Size(Box::new(e)))
    }

    pub fn is_empty(e: Expr) -> Expr {
        Expr::new(ExprKind::IsEmpty(Box::new(e)))
    }

    pub fn includes(set: Expr, e: Expr) -> Expr {
        Expr::new(ExprKind::Includes(Box::new(set), Box::new(e)))
    }

    pub fn includes_all(set: Expr, other: Expr) -> Expr {
        Expr::new(ExprKind::IncludesAll(Box::new(set), Box::new(other)))
    }

    /// Rewrites every occurrence of free variable `var` with `replacement`.
    /// Bound occurrences (under a quantifier binding `var`) are left alone.
    pub fn substitute(&self, var: &str, replacement: &Expr) -> Expr {
        let kind = match &self.kind {
            ExprKind::Var(v) if v == var => return replacement.clone(),
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Str(_) | ExprKind::Object(_) | ExprKind::Var(_) => {
                self.kind.clone()
            }
            ExprKind::Member { base, name, inverse } => ExprKind::Member {
                base: Box::new(base.substitute(var, replacement)),
                name: name.clone(),
                inverse: *inverse,
            },
            ExprKind::Unary(op, e) => ExprKind::Unary(*op, Box::new(e.substitute(var, replacement))),
            ExprKind::Binary(op, l, r) => ExprKind::Binary(
                *op,
                Box::new(l.substitute(var, replacement)),
                Box::new(r.substitute(var, replacement)),
            ),
            ExprKind::Quant {
                quantifier,
                var: bound,
                domain,
                body,
            } => ExprKind::Quant {
                quantifier: *quantifier,
                var: bound.clone(),
                domain: domain.clone(),
                body: if bound == var {
                    body.clone()
                } else {
                    Box::new(body.substitute(var, replacement))
                },
            },
            ExprKind::Size(e) => ExprKind::Size(Box::new(e.substitute(var, replacement))),
            ExprKind::IsEmpty(e) => ExprKind::IsEmpty(Box::new(e.substitute(var, replacement))),
            ExprKind::Includes(a, b) => ExprKind::Includes(
                Box::new(a.substitute(var, replacement)),
                Box::new(b.substitute(var, replacement)),
            ),
            ExprKind::IncludesAll(a, b) => ExprKind::IncludesAll(
                Box::new(a.substitute(var, replacement)),
                Box::new(b.substitute(var, replacement)),
            ),
        };
        Expr {
            kind,
            loc: self.loc.clone(),
        }
    }
}
