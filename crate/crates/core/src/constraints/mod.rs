//! The predicate language: syntax tree, typechecker and evaluator.

mod ast;
mod eval;
mod typecheck;

pub use ast::{BinOp, Expr, ExprKind, Predicate, Quantifier, UnOp};
pub(crate) use eval::in_template_closure;
pub use eval::{eval_expr, eval_predicate, extension, Binding, BindingError, Datum, EvalError, Evaluator};
pub use typecheck::{typecheck_expr, typecheck_predicate, Domain, Scope, Ty, TypeError};
