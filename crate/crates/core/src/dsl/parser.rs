use std::collections::{BTreeMap, BTreeSet};

use num_traits::ToPrimitive;

use super::lexer::{is_keyword, Tok, Token};
use super::report::{Diagnostic, Severity};
use crate::constraints::{BinOp, Expr, ExprKind, Quantifier, UnOp};
use crate::constraints::{Binding, Datum};
use crate::dynamics::{DynamicRule, Effect, Participant, Step, Trace};
use crate::engineering::EngineeringTag;
use crate::instance::{BoundState, Condition, ConditionBinding, Link, ObjectInstance, System, TimePoint};
use crate::metamodel::{
    ActionKind, ActionTemplate, CountingScope, DynamicSchema, InvariantSchema, Model, ObjectTemplate, Role,
    StaticSchema, Type,
};
use crate::span::{Loc, SourceSpan};
use crate::value::{Sort, StateMap, Value};

type PResult<T> = Result<T, Diagnostic>;

const MODEL_DECLS: &[&str] = &["template", "action", "type", "role", "invariant", "static", "dynamic"];
const SYSTEM_DECLS: &[&str] = &["object", "link", "time"];
const TRACE_ITEMS: &[&str] = &["model", "seed", "steps", "snapshot", "step"];

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    pub(crate) diags: Vec<Diagnostic>,
}

impl Parser {
    pub(crate) fn new(toks: Vec<Token>, diags: Vec<Diagnostic>) -> Self {
        Parser { toks, pos: 0, diags }
    }

    // ---- token plumbing ----

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            span: self.span(),
            message: message.into(),
        }
    }

    fn error_at(&mut self, span: SourceSpan, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
        });
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        self.error_here(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.at_word(word) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<SourceSpan> {
        if self.at_word(word) {
            Ok(self.advance().span)
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    /// A non-keyword identifier.
    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(w) if !is_keyword(&w) => {
                let t = self.advance();
                Ok((w, t.span))
            }
            Tok::Ident(w) => Err(self.error_here(format!("`{w}` is a reserved keyword"))),
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// Any word, keywords included (field labels).
    fn word(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(w) => {
                let t = self.advance();
                Ok((w, t.span))
            }
            _ => Err(self.unexpected("field name")),
        }
    }

    fn id_list(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        if matches!(self.peek(), Tok::Semi) {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?.0);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    /// Skips to the end of the current declaration: past its closing brace,
    /// or up to the next declaration keyword or enclosing `}`.
    fn recover(&mut self, start: usize, decls: &[&str]) {
        self.pos = (start + 1).min(self.toks.len() - 1);
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                    if depth == 0 {
                        self.advance();
                        return;
                    }
                }
                Tok::Ident(w) if depth == 0 && decls.contains(&w.as_str()) => return,
                _ => {}
            }
            self.advance();
        }
    }

    pub(crate) fn expect_end(&mut self) {
        self.expect_eof();
    }

    fn expect_eof(&mut self) {
        if !matches!(self.peek(), Tok::Eof) {
            let d = self.unexpected("end of input");
            self.diags.push(d);
        }
    }

    // ---- models ----

    pub(crate) fn model(&mut self) -> Option<Model> {
        let r = self.model_inner();
        match r {
            Ok(m) => {
                self.expect_eof();
                Some(m)
            }
            Err(d) => {
                self.diags.push(d);
                None
            }
        }
    }

    fn model_inner(&mut self) -> PResult<Model> {
        let start = self.expect_word("model")?;
        let (name, _) = self.ident()?;
        let mut model = Model::new(name);
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let at = self.pos;
            if let Err(d) = self.model_decl(&mut model) {
                self.diags.push(d);
                self.recover(at, MODEL_DECLS);
            }
        }
        let end = self.expect(Tok::RBrace)?.span;
        model.loc = start.join(&end).into();
        Ok(model)
    }

    fn model_decl(&mut self, model: &mut Model) -> PResult<()> {
        let kw_span = self.span();
        let kw = match self.peek() {
            Tok::Ident(w) if MODEL_DECLS.contains(&w.as_str()) => w.clone(),
            _ => {
                return Err(self.unexpected("a declaration (template, action, type, role, invariant, static, dynamic)"))
            }
        };
        self.advance();
        let (name, name_span) = self.ident()?;
        match kw.as_str() {
            "template" => {
                let t = self.template_body(name.clone(), kw_span)?;
                self.insert_unique(&mut model.templates, name, name_span, t, "template");
            }
            "action" => {
                let a = self.action_body(name.clone(), kw_span)?;
                self.insert_unique(&mut model.action_templates, name, name_span, a, "action");
            }
            "type" => {
                let t = self.type_body(name.clone(), kw_span)?;
                self.insert_unique(&mut model.types, name, name_span, t, "type");
            }
            "role" => {
                let r = self.role_body(name.clone(), kw_span)?;
                self.insert_unique(&mut model.roles, name, name_span, r, "role");
            }
            "invariant" => {
                self.expect(Tok::LBrace)?;
                let predicate = self.expr()?;
                let end = self.expect(Tok::RBrace)?.span;
                let s = InvariantSchema {
                    name: name.clone(),
                    predicate,
                    loc: kw_span.join(&end).into(),
                };
                self.insert_unique(&mut model.invariant_schemas, name, name_span, s, "invariant schema");
            }
            "static" => {
                self.expect_word("at")?;
                let (at, _) = self.ident()?;
                self.expect(Tok::LBrace)?;
                let predicate = self.expr()?;
                let end = self.expect(Tok::RBrace)?.span;
                let s = StaticSchema {
                    name: name.clone(),
                    at,
                    predicate,
                    loc: kw_span.join(&end).into(),
                };
                self.insert_unique(&mut model.static_schemas, name, name_span, s, "static schema");
            }
            "dynamic" => {
                self.expect(Tok::LBrace)?;
                let mut rules = Vec::new();
                while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                    rules.push(self.rule()?);
                }
                let end = self.expect(Tok::RBrace)?.span;
                let s = DynamicSchema {
                    name: name.clone(),
                    rules,
                    loc: kw_span.join(&end).into(),
                };
                self.insert_unique(&mut model.dynamic_schemas, name, name_span, s, "dynamic schema");
            }
            _ => unreachable!(),
        }
        Ok(())
    }

    fn insert_unique<T>(
        &mut self,
        map: &mut BTreeMap<String, T>,
        name: String,
        span: SourceSpan,
        value: T,
        what: &str,
    ) {
        match map.entry(name) {
            std::collections::btree_map::Entry::Occupied(e) => {
                self.error_at(span, format!("duplicate {what} {}", e.key()));
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
        }
    }

    fn field_once(&mut self, seen: &mut BTreeSet<String>, field: &str, span: &SourceSpan) -> PResult<()> {
        if !seen.insert(field.to_string()) {
            return Err(Diagnostic {
                severity: Severity::Error,
                span: span.clone(),
                message: format!("duplicate field `{field}`"),
            });
        }
        Ok(())
    }

    fn template_body(&mut self, name: String, start: SourceSpan) -> PResult<ObjectTemplate> {
        let mut t = ObjectTemplate::new(name);
        let mut seen = BTreeSet::new();
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (field, fspan) = self.word()?;
            self.field_once(&mut seen, &field, &fspan)?;
            match field.as_str() {
                "attrs" => {
                    self.expect(Tok::LBrace)?;
                    while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                        let (attr, aspan) = self.ident()?;
                        self.expect(Tok::Colon)?;
                        let sort = self.sort()?;
                        self.expect(Tok::Semi)?;
                        if t.attributes.insert(attr.clone(), sort).is_some() {
                            self.error_at(aspan, format!("duplicate attribute {attr}"));
                        }
                    }
                    self.expect(Tok::RBrace)?;
                    continue;
                }
                "parents" | "types" | "actions" | "dynamic" | "static" | "invariant" => {
                    self.expect(Tok::Colon)?;
                    let ids: BTreeSet<String> = self.id_list()?.into_iter().collect();
                    match field.as_str() {
                        "parents" => t.parents = ids,
                        "types" => t.types = ids,
                        "actions" => t.actions = ids,
                        "dynamic" => t.dynamic_schemas = ids,
                        "static" => t.static_schemas = ids,
                        _ => t.invariant_schemas = ids,
                    }
                }
                "tags" => {
                    self.expect(Tok::Colon)?;
                    if !matches!(self.peek(), Tok::Semi) {
                        loop {
                            let (group, gspan) = self.word()?;
                            self.expect(Tok::Dot)?;
                            let (function, _) = self.word()?;
                            match format!("{group}.{function}").parse::<EngineeringTag>() {
                                Ok(tag) => {
                                    t.tags.insert(tag);
                                }
                                Err(e) => self.error_at(gspan, e.to_string()),
                            }
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                }
                other => {
                    return Err(Diagnostic {
                        severity: Severity::Error,
                        span: fspan,
                        message: format!("unknown template field `{other}`"),
                    })
                }
            }
            self.expect(Tok::Semi)?;
        }
        let end = self.expect(Tok::RBrace)?.span;
        t.loc = start.join(&end).into();
        Ok(t)
    }

    fn sort(&mut self) -> PResult<Sort> {
        let sort = match self.peek() {
            Tok::Ident(w) if w == "int" => Sort::Int,
            Tok::Ident(w) if w == "bool" => Sort::Bool,
            Tok::Ident(w) if w == "string" => Sort::Str,
            _ => return Err(self.unexpected("a sort (int, bool, string)")),
        };
        self.advance();
        Ok(sort)
    }

    fn action_body(&mut self, name: String, start: SourceSpan) -> PResult<ActionTemplate> {
        let mut seen = BTreeSet::new();
        let mut participants = Vec::new();
        let mut start_label = None;
        let mut end_label = None;
        let mut types = BTreeSet::new();
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (field, fspan) = self.word()?;
            self.field_once(&mut seen, &field, &fspan)?;
            self.expect(Tok::Colon)?;
            match field.as_str() {
                "participants" => participants = self.id_list()?,
                "start" => start_label = Some(self.ident()?.0),
                "end" => end_label = Some(self.ident()?.0),
                "types" => types = self.id_list()?.into_iter().collect(),
                other => {
                    return Err(Diagnostic {
                        severity: Severity::Error,
                        span: fspan,
                        message: format!("unknown action field `{other}`"),
                    })
                }
            }
            self.expect(Tok::Semi)?;
        }
        let end = self.expect(Tok::RBrace)?.span;
        let span = start.join(&end);
        if participants.is_empty() {
            self.error_at(span.clone(), format!("action {name} has no participants"));
        }
        let (Some(start_label), Some(end_label)) = (start_label, end_label) else {
            return Err(Diagnostic {
                severity: Severity::Error,
                span,
                message: format!("action {name} must declare both start and end"),
            });
        };
        Ok(ActionTemplate {
            name,
            participants,
            start_label,
            end_label,
            types,
            loc: span.into(),
        })
    }

    fn type_body(&mut self, name: String, start: SourceSpan) -> PResult<Type> {
        let mut seen = BTreeSet::new();
        let mut t = Type {
            name,
            predicate: Expr::bool(true),
            subtypes: BTreeSet::new(),
            supertypes: BTreeSet::new(),
            loc: Loc::NONE,
        };
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (field, fspan) = self.word()?;
            self.field_once(&mut seen, &field, &fspan)?;
            self.expect(Tok::Colon)?;
            match field.as_str() {
                "subtypes" => t.subtypes = self.id_list()?.into_iter().collect(),
                "supertypes" => t.supertypes = self.id_list()?.into_iter().collect(),
                "predicate" => t.predicate = self.expr()?,
                other => {
                    return Err(Diagnostic {
                        severity: Severity::Error,
                        span: fspan,
                        message: format!("unknown type field `{other}`"),
                    })
                }
            }
            self.expect(Tok::Semi)?;
        }
        let end = self.expect(Tok::RBrace)?.span;
        t.loc = start.join(&end).into();
        Ok(t)
    }

    fn role_body(&mut self, name: String, start: SourceSpan) -> PResult<Role> {
        let mut seen = BTreeSet::new();
        let mut role = Role {
            name,
            source_templates: BTreeSet::new(),
            target_templates: BTreeSet::new(),
            lower: 0,
            upper: None,
            inverse: None,
            scope: CountingScope::Global,
            loc: Loc::NONE,
        };
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (field, fspan) = self.word()?;
            self.field_once(&mut seen, &field, &fspan)?;
            self.expect(Tok::Colon)?;
            match field.as_str() {
                "source" => role.source_templates = self.id_list()?.into_iter().collect(),
                "target" => role.target_templates = self.id_list()?.into_iter().collect(),
                "card" => {
                    role.lower = self.count()?;
                    self.expect(Tok::DotDot)?;
                    role.upper = if self.eat(&Tok::Star) {
                        None
                    } else {
                        Some(self.count()?)
                    };
                }
                "inverse" => role.inverse = Some(self.ident()?.0),
                "scope" => {
                    if self.eat_word("global") {
                        role.scope = CountingScope::Global;
                    } else if self.eat_word("per") {
                        self.expect(Tok::Minus)?;
                        self.expect_word("source")?;
                        role.scope = CountingScope::PerSource;
                    } else {
                        return Err(self.unexpected("`global` or `per-source`"));
                    }
                }
                other => {
                    return Err(Diagnostic {
                        severity: Severity::Error,
                        span: fspan,
                        message: format!("unknown role field `{other}`"),
                    })
                }
            }
            self.expect(Tok::Semi)?;
        }
        let end = self.expect(Tok::RBrace)?.span;
        role.loc = start.join(&end).into();
        Ok(role)
    }

    fn count(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Int(i) => {
                let v = i.to_u64().ok_or_else(|| self.error_here("count out of range"))?;
                self.advance();
                Ok(v)
            }
            _ => Err(self.unexpected("a count")),
        }
    }

    fn rule(&mut self) -> PResult<DynamicRule> {
        let start = self.expect_word("rule")?;
        let (name, _) = self.ident()?;
        self.expect_word("for")?;
        let (action, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut participants = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            loop {
                let (var, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (template, _) = self.ident()?;
                participants.push(Participant { var, template });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut seen = BTreeSet::new();
        let mut pre = Expr::bool(true);
        let mut post = Expr::bool(true);
        let mut effects = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (field, fspan) = self.word()?;
            self.field_once(&mut seen, &field, &fspan)?;
            match field.as_str() {
                "pre" | "post" => {
                    self.expect(Tok::Colon)?;
                    let e = self.expr()?;
                    self.expect(Tok::Semi)?;
                    if field == "pre" {
                        pre = e;
                    } else {
                        post = e;
                    }
                }
                "effects" => {
                    self.expect(Tok::LBrace)?;
                    while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                        effects.push(self.effect()?);
                    }
                    self.expect(Tok::RBrace)?;
                }
                other => {
                    return Err(Diagnostic {
                        severity: Severity::Error,
                        span: fspan,
                        message: format!("unknown rule field `{other}`"),
                    })
                }
            }
        }
        let end = self.expect(Tok::RBrace)?.span;
        Ok(DynamicRule {
            name,
            action,
            participants,
            pre,
            effects,
            post,
            loc: start.join(&end).into(),
        })
    }

    fn init_map(&mut self) -> PResult<BTreeMap<String, Expr>> {
        let mut init = BTreeMap::new();
        if self.eat(&Tok::LBrace) {
            while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                let (attr, aspan) = self.ident()?;
                self.expect(Tok::Eq)?;
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                if init.insert(attr.clone(), e).is_some() {
                    self.error_at(aspan, format!("duplicate initial value for {attr}"));
                }
            }
            self.expect(Tok::RBrace)?;
            self.eat(&Tok::Semi);
        } else {
            self.expect(Tok::Semi)?;
        }
        Ok(init)
    }

    fn link_args(&mut self) -> PResult<(String, String, String)> {
        let (role, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let (source, _) = self.ident()?;
        self.expect(Tok::Comma)?;
        let (target, _) = self.ident()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        Ok((role, source, target))
    }

    fn effect(&mut self) -> PResult<Effect> {
        if self.eat_word("create") {
            let (var, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            let (template, _) = self.ident()?;
            let init = self.init_map()?;
            return Ok(Effect::Create { var, template, init });
        }
        if self.eat_word("delete") {
            let (var, _) = self.ident()?;
            self.expect(Tok::Semi)?;
            return Ok(Effect::Delete { var });
        }
        if self.eat_word("reclassify") {
            let (var, _) = self.ident()?;
            self.expect_word("as")?;
            let (template, _) = self.ident()?;
            let init = self.init_map()?;
            return Ok(Effect::Reclassify { var, template, init });
        }
        if self.eat_word("link") {
            let (role, source, target) = self.link_args()?;
            return Ok(Effect::AddLink { role, source, target });
        }
        if self.eat_word("unlink") {
            let (role, source, target) = self.link_args()?;
            return Ok(Effect::RemoveLink { role, source, target });
        }
        let (var, _) = self.ident()?;
        self.expect(Tok::Dot)?;
        let (attr, _) = self.ident()?;
        self.expect(Tok::Assign)?;
        let value = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(Effect::Assign { var, attr, value })
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.implies()
    }

    fn mk(kind: ExprKind, start: &SourceSpan, end: &SourceSpan) -> Expr {
        Expr::with_span(kind, start.join(end))
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if self.eat_word("implies") {
            let rhs = self.implies()?;
            return Ok(Self::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        let span = match (l.span(), r.span()) {
            (Some(a), Some(b)) => Some(a.join(b)),
            _ => None,
        };
        Expr {
            kind: ExprKind::Binary(op, Box::new(l), Box::new(r)),
            loc: Loc(span),
        }
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while self.eat_word("or") {
            let rhs = self.and()?;
            lhs = Self::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.not()?;
        while self.eat_word("and") {
            let rhs = self.not()?;
            lhs = Self::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.at_word("not") {
            let start = self.advance().span;
            let inner = self.not()?;
            let end = inner.span().cloned().unwrap_or_else(|| start.clone());
            return Ok(Self::mk(ExprKind::Unary(UnOp::Not, Box::new(inner)), &start, &end));
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        if let Some(op) = self.cmp_op() {
            self.advance();
            let rhs = self.additive()?;
            if self.cmp_op().is_some() {
                return Err(self.error_here("comparison operators do not chain; add parentheses"));
            }
            return Ok(Self::binary(op, lhs, rhs));
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.multiplicative()?;
            lhs = Self::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary()?;
            lhs = Self::binary(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if matches!(self.peek(), Tok::Minus) {
            let start = self.advance().span;
            if let Tok::Int(i) = self.peek().clone() {
                let end = self.advance().span;
                let lit = Self::mk(ExprKind::Int(-i), &start, &end);
                return self.postfix(lit);
            }
            let inner = self.unary()?;
            let end = inner.span().cloned().unwrap_or_else(|| start.clone());
            return Ok(Self::mk(ExprKind::Unary(UnOp::Neg, Box::new(inner)), &start, &end));
        }
        let primary = self.primary()?;
        self.postfix(primary)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.eat(&Tok::Dot) {
            let start = e.span().cloned().unwrap_or_else(|| self.prev_span());
            let (name, nspan) = self.word()?;
            let kind = match name.as_str() {
                "size" => ExprKind::Size(Box::new(e)),
                "isEmpty" => ExprKind::IsEmpty(Box::new(e)),
                "includes" | "includesAll" => {
                    self.expect(Tok::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    if name == "includes" {
                        ExprKind::Includes(Box::new(e), Box::new(arg))
                    } else {
                        ExprKind::IncludesAll(Box::new(e), Box::new(arg))
                    }
                }
                w if is_keyword(w) => {
                    return Err(Diagnostic {
                        severity: Severity::Error,
                        span: nspan,
                        message: format!("`{w}` is a reserved keyword"),
                    })
                }
                _ => {
                    let inverse = self.eat(&Tok::Tilde);
                    ExprKind::Member {
                        base: Box::new(e),
                        name,
                        inverse,
                    }
                }
            };
            let end = self.prev_span();
            e = Self::mk(kind, &start, &end);
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.advance();
                Ok(Self::mk(ExprKind::Int(i), &start, &start))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Self::mk(ExprKind::Str(s), &start, &start))
            }
            Tok::At => {
                self.advance();
                let (id, end) = self.ident()?;
                Ok(Self::mk(ExprKind::Object(id), &start, &end))
            }
            Tok::LParen => {
                self.advance();
                let mut e = self.expr()?;
                let end = self.expect(Tok::RParen)?.span;
                e.loc = start.join(&end).into();
                Ok(e)
            }
            Tok::Ident(w) => match w.as_str() {
                "true" | "false" => {
                    self.advance();
                    Ok(Self::mk(ExprKind::Bool(w == "true"), &start, &start))
                }
                "forall" | "exists" => {
                    self.advance();
                    let quantifier = if w == "forall" {
                        Quantifier::Forall
                    } else {
                        Quantifier::Exists
                    };
                    let (var, _) = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let (domain, _) = self.ident()?;
                    self.expect(Tok::Dot)?;
                    let body = self.expr()?;
                    let end = body.span().cloned().unwrap_or_else(|| self.prev_span());
                    Ok(Self::mk(
                        ExprKind::Quant {
                            quantifier,
                            var,
                            domain,
                            body: Box::new(body),
                        },
                        &start,
                        &end,
                    ))
                }
                _ => {
                    let (name, _) = self.ident()?;
                    Ok(Self::mk(ExprKind::Var(name), &start, &start))
                }
            },
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ---- systems ----

    pub(crate) fn system(&mut self) -> Option<System> {
        match self.system_inner() {
            Ok(s) => Some(s),
            Err(d) => {
                self.diags.push(d);
                None
            }
        }
    }

    pub(crate) fn system_file(&mut self) -> Option<System> {
        let s = self.system();
        if s.is_some() {
            self.expect_eof();
        }
        s
    }

    fn system_inner(&mut self) -> PResult<System> {
        let start = self.expect_word("system")?;
        let (name, _) = self.ident()?;
        self.expect_word("conforms")?;
        let (model_ref, _) = self.ident()?;
        let mut system = System::new(name, model_ref);
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let at = self.pos;
            if let Err(d) = self.system_decl(&mut system) {
                self.diags.push(d);
                self.recover(at, SYSTEM_DECLS);
            }
        }
        let end = self.expect(Tok::RBrace)?.span;
        system.loc = start.join(&end).into();
        Ok(system)
    }

    fn system_decl(&mut self, system: &mut System) -> PResult<()> {
        let start = self.span();
        if self.eat_word("object") {
            let (id, id_span) = self.ident()?;
            self.expect(Tok::Colon)?;
            let of: BTreeSet<String> = self.id_list()?.into_iter().collect();
            if of.is_empty() {
                return Err(self.error_here(format!("object {id} must name at least one template")));
            }
            let state = self.state_block()?;
            let end = self.prev_span();
            let object = ObjectInstance {
                id: id.clone(),
                of,
                state,
                loc: start.join(&end).into(),
            };
            self.insert_unique(&mut system.objects, id, id_span, object, "object");
        } else if self.eat_word("link") {
            let (id, id_span) = self.ident()?;
            self.expect(Tok::Colon)?;
            let (role, _) = self.ident()?;
            self.expect(Tok::LParen)?;
            let (source, _) = self.ident()?;
            self.expect(Tok::Arrow)?;
            let (target, _) = self.ident()?;
            self.expect(Tok::RParen)?;
            let end = self.expect(Tok::Semi)?.span;
            let link = Link {
                id: id.clone(),
                role,
                source,
                target,
                loc: start.join(&end).into(),
            };
            self.insert_unique(&mut system.links, id, id_span, link, "link");
        } else if self.eat_word("time") {
            let (label, label_span) = self.ident()?;
            let states = if self.eat(&Tok::Semi) {
                None
            } else {
                self.expect(Tok::LBrace)?;
                let mut states = BTreeMap::new();
                while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                    let (id, id_span) = self.ident()?;
                    let state = self.state_block()?;
                    if states.insert(id.clone(), state).is_some() {
                        self.error_at(id_span, format!("duplicate state for {id} at {label}"));
                    }
                }
                self.expect(Tok::RBrace)?;
                Some(states)
            };
            let end = self.prev_span();
            if system.time_points.iter().any(|t| t.label == label) {
                self.error_at(label_span, format!("duplicate time point {label}"));
            } else {
                system.time_points.push(TimePoint {
                    label,
                    states,
                    loc: start.join(&end).into(),
                });
            }
        } else {
            return Err(self.unexpected("`object`, `link` or `time`"));
        }
        Ok(())
    }

    fn state_block(&mut self) -> PResult<StateMap> {
        let mut state = StateMap::new();
        self.expect(Tok::LBrace)?;
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (attr, aspan) = self.ident()?;
            self.expect(Tok::Eq)?;
            let value = self.value()?;
            self.expect(Tok::Semi)?;
            if state.insert(attr.clone(), value).is_some() {
                self.error_at(aspan, format!("duplicate attribute {attr}"));
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(state)
    }

    fn value(&mut self) -> PResult<Value> {
        let negative = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(i) => {
                self.advance();
                Ok(Value::Int(if negative { -i } else { i }))
            }
            _ if negative => Err(self.unexpected("an integer")),
            Tok::Str(s) => {
                self.advance();
                Ok(Value::Str(s))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.advance();
                Ok(Value::Bool(w == "true"))
            }
            _ => Err(self.unexpected("a value")),
        }
    }

    // ---- traces ----

    pub(crate) fn trace(&mut self) -> Option<(Trace, Option<u64>)> {
        match self.trace_inner() {
            Ok(t) => {
                self.expect_eof();
                Some(t)
            }
            Err(d) => {
                self.diags.push(d);
                None
            }
        }
    }

    /// Returns the trace and the declared step count.
    fn trace_inner(&mut self) -> PResult<(Trace, Option<u64>)> {
        let start = self.expect_word("trace")?;
        self.expect(Tok::LBrace)?;
        let mut model_ref = None;
        let mut seed = None;
        let mut declared_steps = None;
        let mut snapshots = Vec::new();
        let mut steps = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let at = self.pos;
            let item = (|| -> PResult<()> {
                if self.eat_word("model") {
                    model_ref = Some(self.ident()?.0);
                    self.expect(Tok::Semi)?;
                } else if self.eat_word("seed") {
                    seed = Some(self.count()?);
                    self.expect(Tok::Semi)?;
                } else if self.eat_word("steps") {
                    declared_steps = Some(self.count()?);
                    self.expect(Tok::Semi)?;
                } else if self.eat_word("snapshot") {
                    self.expect(Tok::LBrace)?;
                    let s = self.system_inner()?;
                    self.expect(Tok::RBrace)?;
                    snapshots.push(s);
                } else if self.eat_word("step") {
                    steps.push(self.step()?);
                } else {
                    return Err(self.unexpected("`model`, `seed`, `steps`, `snapshot` or `step`"));
                }
                Ok(())
            })();
            if let Err(d) = item {
                self.diags.push(d);
                self.recover(at, TRACE_ITEMS);
            }
        }
        let end = self.expect(Tok::RBrace)?.span;
        let span = start.join(&end);
        let Some(model_ref) = model_ref else {
            return Err(Diagnostic {
                severity: Severity::Error,
                span,
                message: "trace header lacks `model`".into(),
            });
        };
        if snapshots.len() != steps.len() + 1 {
            self.error_at(
                span.clone(),
                format!(
                    "trace has {} snapshots for {} steps; expected one more snapshot than steps",
                    snapshots.len(),
                    steps.len()
                ),
            );
        }
        if let Some(n) = declared_steps {
            if n != steps.len() as u64 {
                self.error_at(
                    span,
                    format!("header declares {n} steps but {} are recorded", steps.len()),
                );
            }
        }
        Ok((
            Trace {
                model_ref,
                seed,
                snapshots,
                steps,
            },
            declared_steps,
        ))
    }

    fn step(&mut self) -> PResult<Step> {
        let (rule, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let kind = if self.eat_word("internal") {
            ActionKind::Internal
        } else if self.eat_word("interaction") {
            ActionKind::Interaction
        } else {
            return Err(self.unexpected("`internal` or `interaction`"));
        };
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut binding = Binding::new();
        let mut conditions = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let is_condition = (self.at_word("pre") || self.at_word("post"))
                && matches!(self.peek_at(1), Tok::Ident(_))
                && matches!(self.peek_at(2), Tok::Ident(w) if w == "at");
            if is_condition {
                let condition = if self.eat_word("pre") {
                    Condition::Pre
                } else {
                    self.advance();
                    Condition::Post
                };
                let (object, _) = self.ident()?;
                self.expect_word("at")?;
                let bound = if self.eat_word("start") {
                    BoundState::Start
                } else if self.eat_word("end") {
                    BoundState::End
                } else {
                    return Err(self.unexpected("`start` or `end`"));
                };
                self.expect(Tok::Semi)?;
                conditions.push(ConditionBinding {
                    condition,
                    rule: rule.clone(),
                    object,
                    bound,
                });
            } else {
                let (var, vspan) = self.ident()?;
                self.expect(Tok::Eq)?;
                let (object, _) = self.ident()?;
                self.expect(Tok::Semi)?;
                if let Err(e) = binding.bind(var, Datum::Obj(object)) {
                    self.error_at(vspan, e.to_string());
                }
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(Step {
            rule,
            kind,
            binding,
            conditions,
        })
    }
}
