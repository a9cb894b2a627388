use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;

use super::ast::{BinOp, Expr, ExprKind, Quantifier, UnOp};
use crate::instance::System;
use crate::metamodel::{Model, Type, SELF_VAR};
use crate::value::Value;

/// Runtime value of an expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datum {
    Int(BigInt),
    Bool(bool),
    Str(String),
    Obj(String),
    Set(BTreeSet<String>),
}

impl From<Value> for Datum {
    fn from(v: Value) -> Datum {
        match v {
            Value::Int(i) => Datum::Int(i),
            Value::Bool(b) => Datum::Bool(b),
            Value::Str(s) => Datum::Str(s),
        }
    }
}

impl Datum {
    pub fn obj(id: impl Into<String>) -> Datum {
        Datum::Obj(id.into())
    }

    /// The attribute value this datum denotes, if it is a scalar.
    pub fn into_value(self) -> Option<Value> {
        match self {
            Datum::Int(i) => Some(Value::Int(i)),
            Datum::Bool(b) => Some(Value::Bool(b)),
            Datum::Str(s) => Some(Value::Str(s)),
            Datum::Obj(_) | Datum::Set(_) => None,
        }
    }

    pub fn as_object(&self) -> Option<&str> {
        match self {
            Datum::Obj(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Datum::Int(i) => write!(f, "{i}"),
            Datum::Bool(b) => write!(f, "{b}"),
            Datum::Str(s) => write!(f, "{s:?}"),
            Datum::Obj(id) => write!(f, "@{id}"),
            Datum::Set(ids) => {
                let items: Vec<_> = ids.iter().map(String::as_str).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("variable `{0}` is already bound")]
pub struct BindingError(pub String);

/// Variable assignment. A name is bound at most once.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding(BTreeMap<String, Datum>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn bind(&mut self, var: impl Into<String>, value: Datum) -> Result<(), BindingError> {
        let var = var.into();
        if self.0.contains_key(&var) {
            return Err(BindingError(var));
        }
        self.0.insert(var, value);
        Ok(())
    }

    pub fn with(mut self, var: impl Into<String>, value: Datum) -> Result<Self, BindingError> {
        self.bind(var, value)?;
        Ok(self)
    }

    /// Binds `var` to the object `id`.
    pub fn object(var: impl Into<String>, id: impl Into<String>) -> Self {
        let mut b = Binding::new();
        b.0.insert(var.into(), Datum::Obj(id.into()));
        b
    }

    pub fn get(&self, var: &str) -> Option<&Datum> {
        self.0.get(var)
    }

    pub fn object_of(&self, var: &str) -> Option<&str> {
        self.get(var).and_then(Datum::as_object)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Datum)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("object `{object}` has no attribute `{attribute}`")]
    MissingAttribute { object: String, attribute: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("`{0}` is neither a template nor a type")]
    UnknownDomain(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("type `{0}` depends on its own extension")]
    CyclicType(String),
}

/// Evaluates predicates over one system. Connectives evaluate left to right
/// and short-circuit; quantifiers visit objects in id order and stop at the
/// first deciding witness.
pub struct Evaluator<'a> {
    model: &'a Model,
    system: &'a System,
    active_types: RefCell<Vec<String>>,
}

/// Evaluates a boolean predicate.
pub fn eval_predicate(p: &Expr, model: &Model, system: &System, binding: &Binding) -> Result<bool, EvalError> {
    Evaluator::new(model, system).predicate(p, binding)
}

pub fn eval_expr(e: &Expr, model: &Model, system: &System, binding: &Binding) -> Result<Datum, EvalError> {
    Evaluator::new(model, system).expr(e, binding)
}

/// The class of `ty` in `system`: ids of the objects satisfying its
/// predicate, in id order.
pub fn extension(ty: &Type, model: &Model, system: &System) -> Result<BTreeSet<String>, EvalError> {
    Evaluator::new(model, system).extension(ty)
}

struct Env<'b> {
    base: &'b Binding,
    locals: Vec<(String, Datum)>,
}

impl Env<'_> {
    fn lookup(&self, var: &str) -> Option<&Datum> {
        self.locals
            .iter()
            .rev()
            .find(|(n, _)| n == var)
            .map(|(_, d)| d)
            .or_else(|| self.base.get(var))
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a Model, system: &'a System) -> Self {
        Evaluator {
            model,
            system,
            active_types: RefCell::new(Vec::new()),
        }
    }

    pub fn predicate(&self, p: &Expr, binding: &Binding) -> Result<bool, EvalError> {
        let mut env = Env {
            base: binding,
            locals: Vec::new(),
        };
        self.boolean(p, &mut env)
    }

    pub fn expr(&self, e: &Expr, binding: &Binding) -> Result<Datum, EvalError> {
        let mut env = Env {
            base: binding,
            locals: Vec::new(),
        };
        self.eval(e, &mut env)
    }

    pub fn extension(&self, ty: &Type) -> Result<BTreeSet<String>, EvalError> {
        if self.active_types.borrow().contains(&ty.name) {
            return Err(EvalError::CyclicType(ty.name.clone()));
        }
        self.active_types.borrow_mut().push(ty.name.clone());
        let result = self.system.objects.keys().try_fold(BTreeSet::new(), |mut acc, id| {
            let binding = Binding::object(SELF_VAR, id.clone());
            if self.predicate(&ty.predicate, &binding)? {
                acc.insert(id.clone());
            }
            Ok(acc)
        });
        self.active_types.borrow_mut().pop();
        result
    }

    /// Objects a quantifier over `domain` ranges over.
    pub fn domain(&self, domain: &str) -> Result<Vec<String>, EvalError> {
        if self.model.templates.contains_key(domain) {
            Ok(self
                .system
                .objects
                .values()
                .filter(|o| in_template_closure(self.model, &o.of, domain))
                .map(|o| o.id.clone())
                .collect())
        } else if let Some(ty) = self.model.types.get(domain) {
            Ok(self.extension(ty)?.into_iter().collect())
        } else {
            Err(EvalError::UnknownDomain(domain.to_string()))
        }
    }

    fn boolean(&self, e: &Expr, env: &mut Env) -> Result<bool, EvalError> {
        match self.eval(e, env)? {
            Datum::Bool(b) => Ok(b),
            other => Err(EvalError::SortMismatch(format!("expected bool, found {other}"))),
        }
    }

    fn integer(&self, e: &Expr, env: &mut Env) -> Result<BigInt, EvalError> {
        match self.eval(e, env)? {
            Datum::Int(i) => Ok(i),
            other => Err(EvalError::SortMismatch(format!("expected int, found {other}"))),
        }
    }

    fn set(&self, e: &Expr, env: &mut Env) -> Result<BTreeSet<String>, EvalError> {
        match self.eval(e, env)? {
            Datum::Set(s) => Ok(s),
            other => Err(EvalError::SortMismatch(format!("expected set, found {other}"))),
        }
    }

    fn eval(&self, e: &Expr, env: &mut Env) -> Result<Datum, EvalError> {
        match &e.kind {
            ExprKind::Int(i) => Ok(Datum::Int(i.clone())),
            ExprKind::Bool(b) => Ok(Datum::Bool(*b)),
            ExprKind::Str(s) => Ok(Datum::Str(s.clone())),
            ExprKind::Object(id) => Ok(Datum::Obj(id.clone())),
            ExprKind::Var(v) => env
                .lookup(v)
                .cloned()
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            ExprKind::Member { base, name, inverse } => {
                let id = match self.eval(base, env)? {
                    Datum::Obj(id) => id,
                    other => {
                        return Err(EvalError::SortMismatch(format!(
                            "expected object before `.{name}`, found {other}"
                        )))
                    }
                };
                if self.model.roles.contains_key(name) {
                    Ok(Datum::Set(if *inverse {
                        self.system.sources(name, &id)
                    } else {
                        self.system.targets(name, &id)
                    }))
                } else {
                    let object = self
                        .system
                        .objects
                        .get(&id)
                        .ok_or_else(|| EvalError::UnknownObject(id.clone()))?;
                    object
                        .state
                        .get(name)
                        .cloned()
                        .map(Datum::from)
                        .ok_or_else(|| EvalError::MissingAttribute {
                            object: id.clone(),
                            attribute: name.clone(),
                        })
                }
            }
            ExprKind::Unary(UnOp::Neg, inner) => Ok(Datum::Int(-self.integer(inner, env)?)),
            ExprKind::Unary(UnOp::Not, inner) => Ok(Datum::Bool(!self.boolean(inner, env)?)),
            ExprKind::Binary(op, l, r) => self.binary(*op, l, r, env),
            ExprKind::Quant {
                quantifier,
                var,
                domain,
                body,
            } => {
                let members = self.domain(domain)?;
                let want = matches!(quantifier, Quantifier::Exists);
                for id in members {
                    env.locals.push((var.clone(), Datum::Obj(id)));
                    let r = self.boolean(body, env);
                    env.locals.pop();
                    if r? == want {
                        return Ok(Datum::Bool(want));
                    }
                }
                Ok(Datum::Bool(!want))
            }
            ExprKind::Size(inner) => Ok(Datum::Int(BigInt::from(self.set(inner, env)?.len()))),
            ExprKind::IsEmpty(inner) => Ok(Datum::Bool(self.set(inner, env)?.is_empty())),
            ExprKind::Includes(set, item) => {
                let set = self.set(set, env)?;
                match self.eval(item, env)? {
                    Datum::Obj(id) => Ok(Datum::Bool(set.contains(&id))),
                    other => Err(EvalError::SortMismatch(format!("expected object, found {other}"))),
                }
            }
            ExprKind::IncludesAll(set, other) => {
                let set = self.set(set, env)?;
                let other = self.set(other, env)?;
                Ok(Datum::Bool(other.is_subset(&set)))
            }
        }
    }

    fn binary(&self, op: BinOp, l: &Expr, r: &Expr, env: &mut Env) -> Result<Datum, EvalError> {
        match op {
            BinOp::And => Ok(Datum::Bool(self.boolean(l, env)? && self.boolean(r, env)?)),
            BinOp::Or => Ok(Datum::Bool(self.boolean(l, env)? || self.boolean(r, env)?)),
            BinOp::Implies => Ok(Datum::Bool(!self.boolean(l, env)? || self.boolean(r, env)?)),
            BinOp::Add | BinOp::Sub | BinOp::Mul => {
                let a = self.integer(l, env)?;
                let b = self.integer(r, env)?;
                Ok(Datum::Int(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    _ => a * b,
                }))
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let a = self.integer(l, env)?;
                let b = self.integer(r, env)?;
                Ok(Datum::Bool(match op {
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    _ => a >= b,
                }))
            }
            BinOp::Eq | BinOp::Ne => {
                let a = self.eval(l, env)?;
                let b = self.eval(r, env)?;
                if std::mem::discriminant(&a) != std::mem::discriminant(&b) {
                    return Err(EvalError::SortMismatch(format!("cannot compare {a} with {b}")));
                }
                Ok(Datum::Bool((a == b) == (op == BinOp::Eq)))
            }
        }
    }
}

/// Whether `template` is among `of` or the ancestors of any member of `of`.
/// Unknown names contribute nothing beyond themselves.
pub(crate) fn in_template_closure(model: &Model, of: &BTreeSet<String>, template: &str) -> bool {
    of.contains(template)
        || of
            .iter()
            .any(|t| model.ancestors(t).map(|a| a.contains(template)).unwrap_or(false))
}
