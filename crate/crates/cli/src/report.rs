use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use serde_json::{json, Value};

use odp_core::{RuleId, Violation};

/// What checking one input produced.
#[derive(Debug, Default)]
pub struct Checked {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl From<Vec<Violation>> for Checked {
    fn from(violations: Vec<Violation>) -> Self {
        Checked {
            violations,
            warnings: Vec::new(),
        }
    }
}

/// `Err` carries a parse, resolution or I/O failure.
pub type Outcome = Result<Checked, String>;

pub struct Report {
    command: &'static str,
    inputs: Vec<String>,
    /// Per input: its path and the violations kept by the rule filter.
    violations: Vec<(String, Vec<Violation>)>,
    warnings: Vec<String>,
    errors: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &'static str, inputs: &[PathBuf], outcomes: Vec<Outcome>, filter: &[RuleId]) -> Report {
        let filter: BTreeSet<RuleId> = filter.iter().copied().collect();
        let mut report = Report {
            command,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            violations: Vec::new(),
            warnings: Vec::new(),
            errors: Vec::new(),
        };
        for (input, outcome) in report.inputs.clone().into_iter().zip(outcomes) {
            match outcome {
                Ok(checked) => {
                    let kept = checked
                        .violations
                        .into_iter()
                        .filter(|v| filter.is_empty() || filter.contains(&v.rule))
                        .collect();
                    report.violations.push((input, kept));
                    report.warnings.extend(checked.warnings);
                }
                Err(message) => report.errors.push((input, message)),
            }
        }
        report
    }

    fn violation_count(&self) -> usize {
        self.violations.iter().map(|(_, v)| v.len()).sum()
    }

    /// 0 clean, 1 violations, 2 errors.
    pub fn exit_code(&self) -> u8 {
        if !self.errors.is_empty() {
            2
        } else if self.violation_count() > 0 {
            1
        } else {
            0
        }
    }

    fn verdict(&self) -> &'static str {
        match (self.exit_code(), self.command) {
            (2, _) => "ERROR",
            (1, "conform") => "VIOLATES",
            (0, "conform") => "CONFORMS",
            (1, _) => "VIOLATIONS",
            _ => "OK",
        }
    }

    pub fn to_json(&self) -> Value {
        let violations: Vec<Value> = self
            .violations
            .iter()
            .flat_map(|(input, vs)| {
                vs.iter().map(move |v| {
                    let span = v.span.as_ref().map(|s| {
                        json!({
                            "file": s.file,
                            "line": s.start_line,
                            "column": s.start_col,
                            "end_line": s.end_line,
                            "end_column": s.end_col,
                        })
                    });
                    json!({
                        "rule": v.rule.as_str(),
                        "subjects": v.subjects,
                        "span": span,
                        "message": v.message,
                        "input": input,
                    })
                })
            })
            .collect();
        let errors: Vec<Value> = self
            .errors
            .iter()
            .map(|(input, message)| json!({ "input": input, "message": message }))
            .collect();
        json!({
            "tool": "odp-check",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "inputs": self.inputs,
            "violations": violations,
            "warnings": self.warnings,
            "errors": errors,
            "verdict": self.verdict(),
        })
    }

    /// Writes the report and returns the exit code. In text mode errors and
    /// warnings go to standard error.
    pub fn emit(&self, json: bool, out: &mut dyn Write) -> u8 {
        if json {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&self.to_json()).expect("json"));
        } else {
            for (input, vs) in &self.violations {
                for v in vs {
                    let at = v.span.as_ref().map_or_else(|| input.clone(), |s| s.to_string());
                    let _ = writeln!(out, "{} {at} {} — {}", v.rule, v.subjects.join(","), v.message);
                }
            }
            let mut err = std::io::stderr();
            for w in &self.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            for (input, message) in &self.errors {
                let _ = writeln!(err, "error: {input}:\n{message}");
            }
        }
        self.exit_code()
    }
}
