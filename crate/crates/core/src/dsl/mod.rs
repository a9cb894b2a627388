//! Concrete syntax: parsers and canonical printers for models (`.odpm`),
//! systems (`.odps`) and traces (`.odpt`).

mod lexer;
mod parser;
mod printer;
mod report;
mod resolve;

use crate::constraints::Expr;
use crate::dynamics::Trace;
use crate::instance::System;
use crate::metamodel::Model;
use crate::span::SourceSpan;

pub use lexer::{is_keyword, KEYWORDS};
pub use printer::{print_expr, serialize_model, serialize_system, serialize_trace};
pub use report::{Diagnostic, ParseReport, Severity};

/// Options for [`parse_system_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SystemParseOptions {
    /// Reject links whose endpoints are not declared objects.
    pub resolve_links: bool,
}

impl Default for SystemParseOptions {
    fn default() -> Self {
        SystemParseOptions { resolve_links: true }
    }
}

fn eof_span(text: &str, file: &str) -> SourceSpan {
    let mut line = 1u32;
    let mut col = 1u32;
    let mut last = (1u32, 1u32);
    for c in text.chars() {
        last = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    SourceSpan::new(file, last, last)
}

fn finish<T>(value: Option<T>, diags: Vec<Diagnostic>) -> Result<T, ParseReport> {
    match value {
        Some(v) if !diags.iter().any(|d| d.severity == Severity::Error) => Ok(v),
        _ => {
            let mut diagnostics = diags;
            diagnostics.sort_by_key(|d| (d.span.start_line, d.span.start_col));
            Err(ParseReport { diagnostics })
        }
    }
}

fn parser(text: &str, file: &str) -> parser::Parser {
    let mut diags = Vec::new();
    let toks = lexer::lex(text, file, &mut diags);
    parser::Parser::new(toks, diags)
}

pub fn parse_model(text: &str) -> Result<Model, ParseReport> {
    parse_model_named(text, "<input>")
}

/// Parses a model; `file` names the source in spans.
pub fn parse_model_named(text: &str, file: &str) -> Result<Model, ParseReport> {
    let mut p = parser(text, file);
    let model = p.model();
    let mut diags = std::mem::take(&mut p.diags);
    if let Some(m) = &model {
        if diags.is_empty() {
            resolve::resolve_model(m, eof_span(text, file), &mut diags);
        }
    }
    finish(model, diags)
}

pub fn parse_system(text: &str) -> Result<System, ParseReport> {
    parse_system_with(text, "<input>", SystemParseOptions::default())
}

pub fn parse_system_named(text: &str, file: &str) -> Result<System, ParseReport> {
    parse_system_with(text, file, SystemParseOptions::default())
}

pub fn parse_system_with(text: &str, file: &str, options: SystemParseOptions) -> Result<System, ParseReport> {
    let mut p = parser(text, file);
    let system = p.system_file();
    let mut diags = std::mem::take(&mut p.diags);
    if let Some(s) = &system {
        resolve::resolve_system(s, options.resolve_links, eof_span(text, file), &mut diags);
    }
    finish(system, diags)
}

pub fn parse_trace(text: &str) -> Result<Trace, ParseReport> {
    parse_trace_named(text, "<input>")
}

/// Parses a trace. Snapshot links are resolved against their snapshot.
pub fn parse_trace_named(text: &str, file: &str) -> Result<Trace, ParseReport> {
    let mut p = parser(text, file);
    let trace = p.trace();
    let mut diags = std::mem::take(&mut p.diags);
    if let Some((t, _)) = &trace {
        for s in &t.snapshots {
            resolve::resolve_system(s, true, eof_span(text, file), &mut diags);
        }
    }
    finish(trace.map(|(t, _)| t), diags)
}

/// Parses a standalone expression (no typechecking).
pub fn parse_expr(text: &str) -> Result<Expr, ParseReport> {
    let mut p = parser(text, "<expr>");
    let e = match p.expr() {
        Ok(e) => {
            p.expect_end();
            Some(e)
        }
        Err(d) => {
            p.diags.push(d);
            None
        }
    };
    let diags = std::mem::take(&mut p.diags);
    finish(e, diags)
}
