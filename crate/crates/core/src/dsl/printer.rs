use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::constraints::{BinOp, Datum, Expr, ExprKind, UnOp};
use crate::dynamics::{DynamicRule, Effect, Trace};
use crate::instance::{BoundState, Condition, System};
use crate::metamodel::{ActionKind, CountingScope, Model};
use crate::value::{write_string_literal, StateMap};

const QUANT: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const CMP: u8 = 5;
const ADD: u8 = 6;
const MUL: u8 = 7;
const NEG: u8 = 8;
const POSTFIX: u8 = 9;
const ATOM: u8 = 10;

/// Prints an expression in the concrete syntax with minimal parentheses.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e, QUANT);
    out
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Quant { .. } => QUANT,
        ExprKind::Binary(op, ..) => match op {
            BinOp::Implies => IMPLIES,
            BinOp::Or => OR,
            BinOp::And => AND,
            BinOp::Add | BinOp::Sub => ADD,
            BinOp::Mul => MUL,
            _ => CMP,
        },
        ExprKind::Unary(UnOp::Not, _) => NOT,
        ExprKind::Unary(UnOp::Neg, _) => NEG,
        ExprKind::Int(i) if i.sign() == num_bigint::Sign::Minus => NEG,
        ExprKind::Member { .. }
        | ExprKind::Size(_)
        | ExprKind::IsEmpty(_)
        | ExprKind::Includes(..)
        | ExprKind::IncludesAll(..) => POSTFIX,
        _ => ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr, ctx: u8) {
    let own = level(e);
    // A quantifier body extends as far right as possible, so it is only safe
    // unparenthesized at the outermost level.
    let paren = if own == QUANT { ctx != QUANT } else { own < ctx };
    if paren {
        out.push('(');
    }
    match &e.kind {
        ExprKind::Int(i) => write!(out, "{i}").unwrap(),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Str(s) => write_string_literal(out, s).unwrap(),
        ExprKind::Object(id) => write!(out, "@{id}").unwrap(),
        ExprKind::Var(v) => out.push_str(v),
        ExprKind::Member { base, name, inverse } => {
            write_expr(out, base, POSTFIX);
            out.push('.');
            out.push_str(name);
            if *inverse {
                out.push('~');
            }
        }
        ExprKind::Unary(UnOp::Not, inner) => {
            out.push_str("not ");
            write_expr(out, inner, NOT);
        }
        ExprKind::Unary(UnOp::Neg, inner) => {
            out.push('-');
            if matches!(inner.kind, ExprKind::Int(_)) {
                out.push('(');
                write_expr(out, inner, QUANT);
                out.push(')');
            } else {
                let mut s = String::new();
                write_expr(&mut s, inner, NEG);
                if s.starts_with('-') {
                    out.push(' ');
                }
                out.push_str(&s);
            }
        }
        ExprKind::Binary(op, l, r) => {
            let (lc, rc) = match op {
                BinOp::Implies => (OR, IMPLIES),
                BinOp::Or => (OR, AND),
                BinOp::And => (AND, NOT),
                BinOp::Add | BinOp::Sub => (ADD, MUL),
                BinOp::Mul => (MUL, NEG),
                _ => (ADD, ADD),
            };
            write_expr(out, l, lc);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r, rc);
        }
        ExprKind::Quant {
            quantifier,
            var,
            domain,
            body,
        } => {
            write!(out, "{} {var}: {domain} . ", quantifier.keyword()).unwrap();
            write_expr(out, body, QUANT);
        }
        ExprKind::Size(inner) => {
            write_expr(out, inner, POSTFIX);
            out.push_str(".size");
        }
        ExprKind::IsEmpty(inner) => {
            write_expr(out, inner, POSTFIX);
            out.push_str(".isEmpty");
        }
        ExprKind::Includes(set, item) => {
            write_expr(out, set, POSTFIX);
            out.push_str(".includes(");
            write_expr(out, item, QUANT);
            out.push(')');
        }
        ExprKind::IncludesAll(set, other) => {
            write_expr(out, set, POSTFIX);
            out.push_str(".includesAll(");
            write_expr(out, other, QUANT);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}

struct Out {
    buf: String,
    indent: usize,
}

impl Out {
    fn line(&mut self, text: impl AsRef<str>) {
        for _ in 0..self.indent {
            self.buf.push_str("  ");
        }
        self.buf.push_str(text.as_ref());
        self.buf.push('\n');
    }

    fn open(&mut self, text: impl AsRef<str>) {
        self.line(format!("{} {{", text.as_ref()));
        self.indent += 1;
    }

    fn close(&mut self) {
        self.indent -= 1;
        self.line("}");
    }

    fn list(&mut self, field: &str, items: &BTreeSet<String>) {
        if !items.is_empty() {
            self.line(format!("{field}: {};", join(items)));
        }
    }
}

fn join<'a>(items: impl IntoIterator<Item = &'a String>) -> String {
    items.into_iter().map(String::as_str).collect::<Vec<_>>().join(", ")
}

/// Canonical text of a model. Declarations are grouped by kind and sorted
/// by name; rules keep their order.
pub fn serialize_model(model: &Model) -> String {
    let mut o = Out {
        buf: String::new(),
        indent: 0,
    };
    o.open(format!("model {}", model.name));
    let mut first = true;
    let mut gap = |o: &mut Out| {
        if !first {
            o.buf.push('\n');
        }
        first = false;
    };
    for t in model.templates.values() {
        gap(&mut o);
        o.open(format!("template {}", t.name));
        o.list("parents", &t.parents);
        if !t.attributes.is_empty() {
            o.open("attrs");
            for (a, s) in &t.attributes {
                o.line(format!("{a}: {};", s.keyword()));
            }
            o.close();
        }
        o.list("types", &t.types);
        o.list("actions", &t.actions);
        o.list("dynamic", &t.dynamic_schemas);
        o.list("static", &t.static_schemas);
        o.list("invariant", &t.invariant_schemas);
        if !t.tags.is_empty() {
            let tags: Vec<String> = t.tags.iter().map(|t| t.to_string()).collect();
            o.line(format!("tags: {};", tags.join(", ")));
        }
        o.close();
    }
    for a in model.action_templates.values() {
        gap(&mut o);
        o.open(format!("action {}", a.name));
        o.line(format!("participants: {};", join(&a.participants)));
        o.line(format!("start: {};", a.start_label));
        o.line(format!("end: {};", a.end_label));
        o.list("types", &a.types);
        o.close();
    }
    for t in model.types.values() {
        gap(&mut o);
        o.open(format!("type {}", t.name));
        o.list("subtypes", &t.subtypes);
        o.list("supertypes", &t.supertypes);
        o.line(format!("predicate: {};", print_expr(&t.predicate)));
        o.close();
    }
    for r in model.roles.values() {
        gap(&mut o);
        o.open(format!("role {}", r.name));
        o.list("source", &r.source_templates);
        o.list("target", &r.target_templates);
        if r.lower != 0 || r.upper.is_some() {
            let upper = r.upper.map_or("*".to_string(), |u| u.to_string());
            o.line(format!("card: {}..{upper};", r.lower));
        }
        if let Some(inv) = &r.inverse {
            o.line(format!("inverse: {inv};"));
        }
        if r.scope == CountingScope::PerSource {
            o.line("scope: per-source;");
        }
        o.close();
    }
    for s in model.invariant_schemas.values() {
        gap(&mut o);
        o.line(format!("invariant {} {{ {} }}", s.name, print_expr(&s.predicate)));
    }
    for s in model.static_schemas.values() {
        gap(&mut o);
        o.line(format!(
            "static {} at {} {{ {} }}",
            s.name,
            s.at,
            print_expr(&s.predicate)
        ));
    }
    for d in model.dynamic_schemas.values() {
        gap(&mut o);
        o.open(format!("dynamic {}", d.name));
        for rule in &d.rules {
            write_rule(&mut o, rule);
        }
        o.close();
    }
    o.close();
    o.buf
}

fn is_true(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Bool(true))
}

fn init_text(init: &BTreeMap<String, Expr>) -> String {
    if init.is_empty() {
        return ";".into();
    }
    let parts: Vec<String> = init.iter().map(|(a, e)| format!("{a} = {};", print_expr(e))).collect();
    format!(" {{ {} }}", parts.join(" "))
}

fn write_rule(o: &mut Out, rule: &DynamicRule) {
    let params: Vec<String> = rule
        .participants
        .iter()
        .map(|p| format!("{}: {}", p.var, p.template))
        .collect();
    o.open(format!(
        "rule {} for {} ({})",
        rule.name,
        rule.action,
        params.join(", ")
    ));
    if !is_true(&rule.pre) {
        o.line(format!("pre: {};", print_expr(&rule.pre)));
    }
    if !rule.effects.is_empty() {
        o.open("effects");
        for effect in &rule.effects {
            let text = match effect {
                Effect::Assign { var, attr, value } => format!("{var}.{attr} := {};", print_expr(value)),
                Effect::Create { var, template, init } => {
                    format!("create {var} : {template}{}", init_text(init))
                }
                Effect::Delete { var } => format!("delete {var};"),
                Effect::Reclassify { var, template, init } => {
                    format!("reclassify {var} as {template}{}", init_text(init))
                }
                Effect::AddLink { role, source, target } => format!("link {role}({source}, {target});"),
                Effect::RemoveLink { role, source, target } => format!("unlink {role}({source}, {target});"),
            };
            o.line(text);
        }
        o.close();
    }
    if !is_true(&rule.post) {
        o.line(format!("post: {};", print_expr(&rule.post)));
    }
    o.close();
}

fn state_text(state: &StateMap) -> String {
    if state.is_empty() {
        return "{ }".into();
    }
    let parts: Vec<String> = state.iter().map(|(a, v)| format!("{a} = {v};")).collect();
    format!("{{ {} }}", parts.join(" "))
}

fn write_system(o: &mut Out, system: &System) {
    o.open(format!("system {} conforms {}", system.name, system.model_ref));
    for obj in system.objects.values() {
        o.line(format!(
            "object {} : {} {}",
            obj.id,
            join(&obj.of),
            state_text(&obj.state)
        ));
    }
    for l in system.links.values() {
        o.line(format!("link {} : {} ({} -> {});", l.id, l.role, l.source, l.target));
    }
    for tp in &system.time_points {
        match &tp.states {
            None => o.line(format!("time {};", tp.label)),
            Some(states) => {
                o.open(format!("time {}", tp.label));
                for (id, state) in states {
                    o.line(format!("{id} {}", state_text(state)));
                }
                o.close();
            }
        }
    }
    o.close();
}

/// Canonical text of a system: objects and links by id, time points in order.
pub fn serialize_system(system: &System) -> String {
    let mut o = Out {
        buf: String::new(),
        indent: 0,
    };
    write_system(&mut o, system);
    o.buf
}

pub fn serialize_trace(trace: &Trace) -> String {
    let mut o = Out {
        buf: String::new(),
        indent: 0,
    };
    o.open("trace");
    o.line(format!("model {};", trace.model_ref));
    if let Some(seed) = trace.seed {
        o.line(format!("seed {seed};"));
    }
    o.line(format!("steps {};", trace.steps.len()));
    for (i, snapshot) in trace.snapshots.iter().enumerate() {
        o.open("snapshot");
        write_system(&mut o, snapshot);
        o.close();
        let Some(step) = trace.steps.get(i) else {
            continue;
        };
        let kind = match step.kind {
            ActionKind::Internal => "internal",
            ActionKind::Interaction => "interaction",
        };
        o.open(format!("step {} ({kind})", step.rule));
        for (var, datum) in step.binding.iter() {
            if let Datum::Obj(id) = datum {
                o.line(format!("{var} = {id};"));
            }
        }
        for c in &step.conditions {
            let cond = match c.condition {
                Condition::Pre => "pre",
                Condition::Post => "post",
            };
            let bound = match c.bound {
                BoundState::Start => "start",
                BoundState::End => "end",
            };
            o.line(format!("{cond} {} at {bound};", c.object));
        }
        o.close();
    }
    o.close();
    o.buf
}
