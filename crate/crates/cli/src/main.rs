mod report;
mod resolve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use odp_core::conformance::{conform, ConformOptions};
use odp_core::dsl::{
    parse_model_named, parse_system_with, parse_trace_named, serialize_model, serialize_system, serialize_trace,
    SystemParseOptions,
};
use odp_core::dynamics::{simulate, step_warnings, verify_trace, SimulateError};
use odp_core::engineering::check_engineering;
use odp_core::wf::{check_model, check_system_wf, check_trace_wf};
use odp_core::RuleId;

use report::{Outcome, Report};
use resolve::ModelResolver;

#[derive(Parser, Debug)]
#[command(
    name = "odp-check",
    version,
    about = "Check engineering-viewpoint models, systems and traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Only report these rule ids (comma separated).
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_rule)]
    rules: Vec<RuleId>,

    /// Directories searched for `<model>.odpm` (colon separated), after the
    /// input file's own directory.
    #[arg(
        long = "model-path",
        global = true,
        env = "ODPCHECK_MODEL_PATH",
        value_delimiter = ':'
    )]
    model_path: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Well-formedness of model files (W1-W9).
    CheckModel {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Well-formedness of system (.odps) or trace (.odpt) files (I1-I5).
    CheckSystem {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Conformance of systems to their models (C1-C8 and schema checks).
    Conform {
        /// Model to check against; found by name when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Read the cardinality lower clause against the upper bound.
        #[arg(long)]
        paper_literal_c6: bool,
        /// Also run the engineering structure checks (E1-E5).
        #[arg(long)]
        engineering: bool,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Run a seeded simulation from a system and write the trace.
    Simulate {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        input: PathBuf,
    },
    /// Check traces against the dynamic schemas of their model (D1-D5).
    VerifyTrace {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Rewrite files in canonical form.
    Fmt {
        /// Report files that are not canonical instead of rewriting them.
        #[arg(long)]
        check: bool,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn parse_rule(s: &str) -> Result<RuleId, String> {
    s.parse::<RuleId>().map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn is_trace(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "odpt")
}

const LENIENT: SystemParseOptions = SystemParseOptions { resolve_links: false };

fn run_check_model(path: &Path) -> Outcome {
    let text = read(path)?;
    let model = parse_model_named(&text, &display(path)).map_err(|r| r.to_string())?;
    Ok(check_model(&model).into())
}

fn run_check_system(path: &Path) -> Outcome {
    let text = read(path)?;
    if is_trace(path) {
        let trace = parse_trace_named(&text, &display(path)).map_err(|r| r.to_string())?;
        Ok(check_trace_wf(&trace).into())
    } else {
        let system = parse_system_with(&text, &display(path), LENIENT).map_err(|r| r.to_string())?;
        Ok(check_system_wf(&system).into())
    }
}

fn run_conform(path: &Path, models: &ModelResolver, options: ConformOptions, engineering: bool) -> Outcome {
    let text = read(path)?;
    let system = parse_system_with(&text, &display(path), LENIENT).map_err(|r| r.to_string())?;
    let model = models.resolve(&system.model_ref, path)?;
    let mut violations = check_system_wf(&system);
    let report = conform(&system, &model, options).map_err(|e| e.to_string())?;
    violations.extend(report.violations);
    if engineering {
        violations.extend(check_engineering(&system, &model));
    }
    Ok(violations.into())
}

fn run_verify(path: &Path, models: &ModelResolver) -> Outcome {
    let text = read(path)?;
    let trace = parse_trace_named(&text, &display(path)).map_err(|r| r.to_string())?;
    let model = models.resolve(&trace.model_ref, path)?;
    let mut violations = check_trace_wf(&trace);
    violations.extend(verify_trace(&model, &trace));
    let warnings = step_warnings(&model, &trace)
        .into_iter()
        .map(|w| format!("{}: step {} ({}): {}", display(path), w.step, w.rule, w.message))
        .collect();
    Ok(report::Checked { violations, warnings })
}

fn run_fmt(path: &Path, check: bool) -> Outcome {
    let text = read(path)?;
    let name = display(path);
    let canonical = match path.extension().and_then(|e| e.to_str()) {
        Some("odpm") => serialize_model(&parse_model_named(&text, &name).map_err(|r| r.to_string())?),
        Some("odps") => serialize_system(&parse_system_with(&text, &name, LENIENT).map_err(|r| r.to_string())?),
        Some("odpt") => serialize_trace(&parse_trace_named(&text, &name).map_err(|r| r.to_string())?),
        _ => return Err(format!("{name}: unknown file kind; expected .odpm, .odps or .odpt")),
    };
    let mut warnings = Vec::new();
    if canonical != text {
        if check {
            warnings.push(format!("{name}: not in canonical form"));
        } else {
            std::fs::write(path, &canonical).map_err(|e| format!("cannot write {name}: {e}"))?;
        }
    }
    Ok(report::Checked {
        violations: Vec::new(),
        warnings,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let models = ModelResolver::new(cli.model_path.clone());
    let (command, inputs, outcomes): (&str, Vec<PathBuf>, Vec<Outcome>) = match &cli.command {
        Command::CheckModel { inputs } => (
            "check-model",
            inputs.clone(),
            inputs.par_iter().map(|p| run_check_model(p)).collect(),
        ),
        Command::CheckSystem { inputs } => (
            "check-system",
            inputs.clone(),
            inputs.par_iter().map(|p| run_check_system(p)).collect(),
        ),
        Command::Conform {
            model,
            paper_literal_c6,
            engineering,
            inputs,
        } => {
            let models = models.with_explicit(model.clone());
            let options = ConformOptions {
                paper_literal_c6: *paper_literal_c6,
            };
            let outcomes = inputs
                .par_iter()
                .map(|p| run_conform(p, &models, options, *engineering))
                .collect();
            ("conform", inputs.clone(), outcomes)
        }
        Command::VerifyTrace { model, inputs } => {
            let models = models.with_explicit(model.clone());
            (
                "verify-trace",
                inputs.clone(),
                inputs.par_iter().map(|p| run_verify(p, &models)).collect(),
            )
        }
        Command::Fmt { check, inputs } => {
            let outcomes: Vec<Outcome> = inputs.par_iter().map(|p| run_fmt(p, *check)).collect();
            let unformatted = outcomes.iter().any(|o| matches!(o, Ok(c) if !c.warnings.is_empty()));
            let report = Report::new("fmt", &inputs.clone(), outcomes, &cli.rules);
            let code = report.emit(cli.format == Format::Json, &mut std::io::stdout());
            return if code == 0 && unformatted {
                ExitCode::from(1)
            } else {
                ExitCode::from(code)
            };
        }
        Command::Simulate {
            model,
            steps,
            seed,
            out,
            input,
        } => {
            let models = models.with_explicit(model.clone());
            return run_simulate(&cli, &models, input, *steps, *seed, out.as_deref());
        }
    };
    let report = Report::new(command, &inputs, outcomes, &cli.rules);
    ExitCode::from(report.emit(cli.format == Format::Json, &mut std::io::stdout()))
}

fn run_simulate(
    cli: &Cli,
    models: &ModelResolver,
    input: &Path,
    steps: usize,
    seed: u64,
    out: Option<&Path>,
) -> ExitCode {
    let outcome = (|| -> Result<Result<String, Vec<odp_core::Violation>>, String> {
        let text = read(input)?;
        let system =
            parse_system_with(&text, &display(input), SystemParseOptions::default()).map_err(|r| r.to_string())?;
        let model = models.resolve(&system.model_ref, input)?;
        match simulate(&model, &system, steps, seed) {
            Ok(trace) => Ok(Ok(serialize_trace(&trace))),
            Err(SimulateError::InitialNonConforming(v)) => Ok(Err(v)),
            Err(e) => Err(e.to_string()),
        }
    })();
    let inputs = [input.to_path_buf()];
    let (trace, outcome): (Option<String>, Outcome) = match outcome {
        Ok(Ok(trace)) => (Some(trace), Ok(Vec::new().into())),
        Ok(Err(violations)) => (None, Ok(violations.into())),
        Err(e) => (None, Err(e)),
    };
    if let Some(trace) = &trace {
        match out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, trace) {
                    let report = Report::new(
                        "simulate",
                        &inputs,
                        vec![Err(format!("cannot write {}: {e}", path.display()))],
                        &cli.rules,
                    );
                    return ExitCode::from(report.emit(cli.format == Format::Json, &mut std::io::stdout()));
                }
            }
            None => print!("{trace}"),
        }
    }
    let report = Report::new("simulate", &inputs, vec![outcome], &cli.rules);
    let code = if out.is_some() || trace.is_none() {
        report.emit(cli.format == Format::Json, &mut std::io::stdout())
    } else {
        report.emit(cli.format == Format::Json, &mut std::io::stderr())
    };
    ExitCode::from(code)
}
