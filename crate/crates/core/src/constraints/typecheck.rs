use std::fmt;

use super::ast::{BinOp, Expr, ExprKind, UnOp};
use crate::metamodel::Model;
use crate::span::SourceSpan;
use crate::value::Sort;

/// What a quantified or navigated object is known to be.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Any,
    Template(String),
    Type(String),
}

/// Static sort of an expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Int,
    Bool,
    Str,
    Obj(Domain),
    Set(Domain),
}

impl Ty {
    fn describe(&self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Bool => "bool",
            Ty::Str => "string",
            Ty::Obj(_) => "object",
            Ty::Set(_) => "set",
        }
    }

    fn same_kind(&self, other: &Ty) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl From<Sort> for Ty {
    fn from(s: Sort) -> Ty {
        match s {
            Sort::Int => Ty::Int,
            Sort::Bool => Ty::Bool,
            Sort::Str => Ty::Str,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.span {
            Some(span) => write!(f, "{span}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Variables in scope, innermost last.
pub type Scope = Vec<(String, Ty)>;

/// Checks a closed boolean predicate against `model`.
pub fn typecheck_predicate(p: &Expr, model: &Model) -> Result<(), Vec<TypeError>> {
    typecheck_expr(p, model, &[], Some(&Ty::Bool)).map(|_| ())
}

/// Checks `e` under the variables of `scope`; when `expected` is given, the
/// expression must have that sort. Collects every error found.
pub fn typecheck_expr(
    e: &Expr,
    model: &Model,
    scope: &[(String, Ty)],
    expected: Option<&Ty>,
) -> Result<Ty, Vec<TypeError>> {
    let mut checker = Checker {
        model,
        scope: scope.to_vec(),
        errors: Vec::new(),
    };
    let ty = checker.check(e);
    if let (Some(ty), Some(expected)) = (&ty, expected) {
        if !ty.same_kind(expected) {
            checker.error(e, format!("{} used as {}", ty, expected));
        }
    }
    if checker.errors.is_empty() {
        Ok(ty.expect("no errors implies a sort"))
    } else {
        Err(checker.errors)
    }
}

struct Checker<'m> {
    model: &'m Model,
    scope: Scope,
    errors: Vec<TypeError>,
}

impl Checker<'_> {
    fn error(&mut self, at: &Expr, message: String) {
        self.errors.push(TypeError {
            message,
            span: at.span().cloned(),
        });
    }

    fn expect(&mut self, e: &Expr, want: Ty) -> bool {
        match self.check(e) {
            Some(got) if got.same_kind(&want) => true,
            Some(got) => {
                self.error(e, format!("{got} used as {want}"));
                false
            }
            None => false,
        }
    }

    fn lookup(&self, name: &str) -> Option<&Ty> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn domain_of(&self, name: &str) -> Option<Domain> {
        if self.model.templates.contains_key(name) {
            Some(Domain::Template(name.to_string()))
        } else if self.model.types.contains_key(name) {
            Some(Domain::Type(name.to_string()))
        } else {
            None
        }
    }

    fn check(&mut self, e: &Expr) -> Option<Ty> {
        match &e.kind {
            ExprKind::Int(_) => Some(Ty::Int),
            ExprKind::Bool(_) => Some(Ty::Bool),
            ExprKind::Str(_) => Some(Ty::Str),
            ExprKind::Object(_) => Some(Ty::Obj(Domain::Any)),
            ExprKind::Var(name) => match self.lookup(name) {
                Some(ty) => Some(ty.clone()),
                None => {
                    self.error(e, format!("unbound variable `{name}`"));
                    None
                }
            },
            ExprKind::Member { base, name, inverse } => self.check_member(e, base, name, *inverse),
            ExprKind::Unary(UnOp::Neg, inner) => self.expect(inner, Ty::Int).then_some(Ty::Int),
            ExprKind::Unary(UnOp::Not, inner) => self.expect(inner, Ty::Bool).then_some(Ty::Bool),
            ExprKind::Binary(op, l, r) => self.check_binary(e, *op, l, r),
            ExprKind::Quant { var, domain, body, .. } => {
                let mut ok = true;
                if self.lookup(var).is_some() {
                    self.error(e, format!("variable `{var}` is already bound"));
                    ok = false;
                }
                let dom = match self.domain_of(domain) {
                    Some(d) => d,
                    None => {
                        self.error(e, format!("`{domain}` is neither a template nor a type"));
                        ok = false;
                        Domain::Any
                    }
                };
                self.scope.push((var.clone(), Ty::Obj(dom)));
                ok &= self.expect(body, Ty::Bool);
                self.scope.pop();
                ok.then_some(Ty::Bool)
            }
            ExprKind::Size(inner) => self.expect_set(inner).map(|_| Ty::Int),
            ExprKind::IsEmpty(inner) => self.expect_set(inner).map(|_| Ty::Bool),
            ExprKind::Includes(set, item) => {
                let a = self.expect_set(set).is_some();
                let b = self.expect(item, Ty::Obj(Domain::Any));
                (a && b).then_some(Ty::Bool)
            }
            ExprKind::IncludesAll(set, other) => {
                let a = self.expect_set(set).is_some();
                let b = self.expect_set(other).is_some();
                (a && b).then_some(Ty::Bool)
            }
        }
    }

    fn expect_set(&mut self, e: &Expr) -> Option<Domain> {
        match self.check(e)? {
            Ty::Set(d) => Some(d),
            other => {
                self.error(e, format!("{other} used as set"));
                None
            }
        }
    }

    fn check_member(&mut self, e: &Expr, base: &Expr, name: &str, inverse: bool) -> Option<Ty> {
        let domain = match self.check(base)? {
            Ty::Obj(d) => d,
            other => {
                self.error(base, format!("{other} used as object"));
                return None;
            }
        };
        if let Some(role) = self.model.roles.get(name) {
            let ends = if inverse {
                &role.source_templates
            } else {
                &role.target_templates
            };
            let dom = if ends.len() == 1 {
                Domain::Template(ends.iter().next().unwrap().clone())
            } else {
                Domain::Any
            };
            return Some(Ty::Set(dom));
        }
        if inverse {
            self.error(e, format!("`{name}` is not a role; `~` applies only to roles"));
            return None;
        }
        match &domain {
            Domain::Template(t) => match self.model.attributes_of(t) {
                Ok(attrs) => match attrs.get(name) {
                    Some(sort) => Some((*sort).into()),
                    None => {
                        self.error(e, format!("template `{t}` declares no attribute or role `{name}`"));
                        None
                    }
                },
                Err(err) => {
                    self.error(e, err.to_string());
                    None
                }
            },
            Domain::Any | Domain::Type(_) => {
                let sorts = self.model.attribute_sorts(name);
                match sorts.len() {
                    1 => Some((*sorts.iter().next().unwrap()).into()),
                    0 => {
                        self.error(e, format!("no template declares attribute or role `{name}`"));
                        None
                    }
                    _ => {
                        self.error(e, format!("attribute `{name}` is declared with different sorts"));
                        None
                    }
                }
            }
        }
    }

    fn check_binary(&mut self, e: &Expr, op: BinOp, l: &Expr, r: &Expr) -> Option<Ty> {
        match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul => {
                let a = self.expect(l, Ty::Int);
                let b = self.expect(r, Ty::Int);
                (a && b).then_some(Ty::Int)
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let a = self.expect(l, Ty::Int);
                let b = self.expect(r, Ty::Int);
                (a && b).then_some(Ty::Bool)
            }
            BinOp::And | BinOp::Or | BinOp::Implies => {
                let a = self.expect(l, Ty::Bool);
                let b = self.expect(r, Ty::Bool);
                (a && b).then_some(Ty::Bool)
            }
            BinOp::Eq | BinOp::Ne => {
                let a = self.check(l);
                let b = self.check(r);
                let (a, b) = (a?, b?);
                if a.same_kind(&b) {
                    Some(Ty::Bool)
                } else {
                    self.error(e, format!("cannot compare {a} with {b}"));
                    None
                }
            }
        }
    }
}
