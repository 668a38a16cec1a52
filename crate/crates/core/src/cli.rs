//! The `locc-areas` command line.
//!
//! Exit codes: 0 for success or a true answer, 1 for a false answer, a
//! non-convertible pair or a failed verification, 2 for unreadable input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::convert::{choose_q, colour_transform_nielsen};
use crate::diagram::{canonical_diagram, render, ColouredDiagram, RenderFormat};
use crate::distill::{colour_transform, max_prob, optimal_distribution};
use crate::error::{Error, Result};
use crate::io::{
    parse_state, rational_text, verify_protocol_file, DiagramFile, ProtocolFile, ProtocolKind,
    StateFile,
};
use crate::protocol::{kraus_convert, kraus_distill, simulate_float, verify_completeness};
use crate::state::{average_yield, nielsen_condition, OutcomeDistribution, SchmidtVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "locc-areas",
    version,
    about = "Exact single-copy entanglement manipulation with area diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Svg,
    Ascii,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance of the floating-point cross-check.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Can `--state` be turned into `--target` with certainty?
    Check {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Optimal m-state distribution and average yield.
    Distill {
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Maximum probability of an m-state.
    Maxprob {
        #[arg(long)]
        state: PathBuf,
        #[arg(short = 'm')]
        m: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Build the deterministic conversion protocol as a protocol file.
    Convert {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Draw a diagram: the start diagram of `--state`, the one realising
    /// `-m` or `--target`, or the one stored in `--protocol`.
    Render {
        #[arg(long, required_unless_present = "protocol")]
        state: Option<PathBuf>,
        #[arg(long, conflicts_with = "m")]
        target: Option<PathBuf>,
        #[arg(short = 'm')]
        m: Option<usize>,
        #[arg(long, conflicts_with_all = ["state", "target", "m"])]
        protocol: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-check every invariant of a stored protocol file.
    Verify {
        /// Protocol file written by `convert`, `distill --out` or
        /// `maxprob --out`.
        #[arg(value_name = "FILE", required_unless_present = "protocol")]
        file: Option<PathBuf>,
        #[arg(long, conflicts_with = "file")]
        protocol: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(out) => {
            let code = out.code;
            let emitted = match out.file {
                Some(path) => fs::write(&path, &out.body)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
                None => stdout
                    .write_all(out.body.as_bytes())
                    .map_err(|e| Error::Io(e.to_string())),
            };
            if let Some(note) = out.note {
                let _ = stdout.write_all(note.as_bytes());
            }
            match emitted {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Input problems exit with 2, everything else that goes wrong with 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::EmptyState
        | Error::NegativeCoefficient { .. }
        | Error::CoefficientAboveOne { .. }
        | Error::SumNotOne { .. }
        | Error::InvalidProfile(_)
        | Error::InvalidDistribution(_)
        | Error::InvalidDiagram(_)
        | Error::Io(_)
        | Error::Domain(_)
        | Error::ResolutionTooFine { .. } => EXIT_INPUT,
        _ => EXIT_FALSE,
    }
}

struct Output {
    body: String,
    file: Option<PathBuf>,
    /// Printed on stdout even when the body goes to a file.
    note: Option<String>,
    code: i32,
}

impl Output {
    fn new(body: String, common: &Common, code: i32) -> Output {
        Output {
            body,
            file: common.out.clone(),
            note: None,
            code,
        }
    }
}

fn read_state(path: &Path) -> Result<SchmidtVector> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_state(&text)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialise");
    s.push('\n');
    s
}

fn rationals(v: &[crate::Rational]) -> Value {
    Value::Array(v.iter().map(|r| Value::String(rational_text(r))).collect())
}

fn distribution_json(d: &OutcomeDistribution) -> Value {
    let map: serde_json::Map<String, Value> = d
        .entries()
        .iter()
        .map(|(k, p)| (k.to_string(), Value::String(rational_text(p))))
        .collect();
    Value::Object(map)
}

fn dispatch(command: Command) -> Result<Output> {
    match command {
        Command::Check {
            state,
            target,
            common,
        } => {
            let a = read_state(&state)?;
            let b = read_state(&target)?;
            let ok = nielsen_condition(&a, &b);
            let body = match common.format {
                Format::Text => format!("{}\n", if ok { "convertible" } else { "not convertible" }),
                _ => pretty(&json!({ "convertible": ok })),
            };
            Ok(Output::new(
                body,
                &common,
                if ok { EXIT_OK } else { EXIT_FALSE },
            ))
        }
        Command::Distill { state, common } => {
            let s = read_state(&state)?;
            let dist = optimal_distribution(&s);
            let e = average_yield(&dist)?;
            if let Some(path) = &common.out {
                let d = canonical_diagram(&s);
                let file = distill_file(&s, &d, s.lambdas(), &common)?;
                let note = pretty(&json!({
                    "distribution": distribution_json(&dist),
                    "average_yield": e,
                    "protocol": path.display().to_string(),
                }));
                return Ok(Output {
                    body: file.to_json() + "\n",
                    file: Some(path.clone()),
                    note: Some(note),
                    code: EXIT_OK,
                });
            }
            let body = match common.format {
                Format::Text => {
                    let mut s = String::new();
                    for (m, p) in dist.entries() {
                        s += &format!("m = {m}: p = {p}\n");
                    }
                    s + &format!("average yield = {e:.10} ebits\n")
                }
                _ => pretty(&json!({
                    "distribution": distribution_json(&dist),
                    "average_yield": e,
                })),
            };
            Ok(Output::new(body, &common, EXIT_OK))
        }
        Command::Maxprob { state, m, common } => {
            let s = read_state(&state)?;
            let res = max_prob(&s, m)?;
            let value = json!({
                "p_max": rational_text(&res.p_max),
                "r0": res.r0,
                "h_max": rational_text(&res.h_max),
                "target": rationals(res.target.heights()),
                "p_max_float": res.p_max.to_f64(),
            });
            if let Some(path) = &common.out {
                let d = colour_transform(&s, &res.target)?;
                let file = distill_file(&s, &d, res.target.heights(), &common)?;
                let mut note = value.clone();
                note["protocol"] = Value::String(path.display().to_string());
                return Ok(Output {
                    body: file.to_json() + "\n",
                    file: Some(path.clone()),
                    note: Some(pretty(&note)),
                    code: EXIT_OK,
                });
            }
            let body = match common.format {
                Format::Text => format!(
                    "p_max = {} (r0 = {}, h_max = {})\ntarget = {}\n",
                    res.p_max, res.r0, res.h_max, res.target
                ),
                _ => pretty(&value),
            };
            Ok(Output::new(body, &common, EXIT_OK))
        }
        Command::Convert {
            state,
            target,
            common,
        } => {
            let a = read_state(&state)?;
            let b = read_state(&target)?;
            let (d, records) = colour_transform_nielsen(&a, &b)?;
            let q = choose_q(&d);
            let p = kraus_convert(&d, &a, &b, &q)?;
            if !verify_completeness(&p) {
                return Err(Error::Verification(
                    "synthesised protocol is not complete".into(),
                ));
            }
            simulate_float(&p, &a, common.tol)?;
            let file = ProtocolFile {
                kind: ProtocolKind::Convert,
                start: StateFile::from_state(&a, None),
                target: StateFile::from_state(&b, None),
                operators: p,
                diagram: DiagramFile::from_diagram(&d),
                corrections: records,
                q: Some(q.to_string()),
            };
            let mut out = Output::new(file.to_json() + "\n", &common, EXIT_OK);
            if let Some(path) = &common.out {
                out.note = Some(pretty(&json!({
                    "convertible": true,
                    "Q": q.to_string(),
                    "operators": file.operators.operators.len(),
                    "corrections": file.corrections.len(),
                    "protocol": path.display().to_string(),
                })));
            }
            Ok(out)
        }
        Command::Render {
            state,
            target,
            m,
            protocol,
            common,
        } => {
            let d = match (protocol, state) {
                (Some(path), _) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                    ProtocolFile::from_json(&text)?.diagram.to_diagram()?
                }
                (None, Some(state)) => {
                    let s = read_state(&state)?;
                    match (target, m) {
                        (Some(t), _) => colour_transform_nielsen(&s, &read_state(&t)?)?.0,
                        (None, Some(m)) => colour_transform(&s, &max_prob(&s, m)?.target)?,
                        (None, None) => canonical_diagram(&s),
                    }
                }
                (None, None) => {
                    return Err(Error::Parse("render needs --state or --protocol".into()))
                }
            };
            let body = match common.format {
                Format::Svg => render(&d, RenderFormat::Svg)?,
                Format::Ascii | Format::Text => render(&d, RenderFormat::Ascii)?,
                Format::Json => {
                    pretty(&serde_json::to_value(DiagramFile::from_diagram(&d)).expect("diagram"))
                }
            };
            Ok(Output::new(body, &common, EXIT_OK))
        }
        Command::Verify {
            file,
            protocol,
            common,
        } => {
            let path = file.or(protocol).expect("clap enforces one of the two");
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let pf = ProtocolFile::from_json(&text)?;
            let report = verify_protocol_file(&pf, common.tol)?;
            let code = if report.passed() { EXIT_OK } else { EXIT_FALSE };
            let body = match common.format {
                Format::Text => {
                    let mut s = String::new();
                    for c in &report.checks {
                        s += &format!(
                            "{} {}{}\n",
                            if c.passed { "ok  " } else { "FAIL" },
                            c.name,
                            if c.detail.is_empty() {
                                String::new()
                            } else {
                                format!(": {}", c.detail)
                            }
                        );
                    }
                    s
                }
                _ => {
                    let mut v = serde_json::to_value(&report).expect("report");
                    v["passed"] = Value::Bool(report.passed());
                    pretty(&v)
                }
            };
            Ok(Output::new(body, &common, code))
        }
    }
}

fn distill_file(
    s: &SchmidtVector,
    d: &ColouredDiagram,
    target: &[crate::Rational],
    common: &Common,
) -> Result<ProtocolFile> {
    let p = kraus_distill(d, s)?;
    simulate_float(&p, s, common.tol)?;
    Ok(ProtocolFile {
        kind: ProtocolKind::Distill,
        start: StateFile::from_state(s, None),
        target: StateFile::from_heights(target, None),
        operators: p,
        diagram: DiagramFile::from_diagram(d),
        corrections: Vec::new(),
        q: None,
    })
}
