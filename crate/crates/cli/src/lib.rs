//! `pdext` command line: argument parsing, configuration, reports.
//!
//! Exit codes: 0 when the analysis passes, 1 when the mathematics says no
//! (a definiteness check fails, a witness is found, a measure is not an
//! extension), 2 for usage, configuration and input errors.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use pdext::spectral::LambdaPattern;
use serde::Serialize;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "pdext", version, about = "Positive definite functions on difference sets")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the command's numerical tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Data file (extend: candidate CSV, gp: paths CSV); other commands
    /// write their JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long, global = true, visible_alias = "f")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// Positive definite.
    Pd,
    /// Conditionally negative definite.
    Cnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Polya,
    Measure,
    ZeroPad,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Definiteness of F on sample points of Ω.
    Check {
        #[arg(long, value_enum, default_value = "pd")]
        property: Property,
    },
    /// Gram matrix of F on sample points of Ω.
    Gram,
    /// Builds an extension of F to the whole line.
    Extend {
        #[arg(long, value_enum)]
        method: Method,
        /// Measure CSV for `--method measure` (overrides the config).
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Writes the backing measure, if any, as CSV.
        #[arg(long)]
        measure_out: Option<PathBuf>,
    },
    /// Dimension of Def(F) and the uniqueness verdict.
    Unique {
        #[arg(long, value_enum)]
        precision: Option<config::Precision>,
    },
    /// Checks that a measure represents F on Ω − Ω.
    Bochner {
        #[arg(long)]
        measure: Option<PathBuf>,
    },
    /// Samples Gaussian process paths.
    Gp {
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Compares the spectral representations of two extensions.
    Scatter {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[arg(long)]
        anchors: usize,
    },
    /// Orthogonality and Parseval defects of exponentials on a union of
    /// intervals.
    Spectral {
        /// Intervals as `a,b;c,d`.
        #[arg(long)]
        omega: String,
        #[arg(long, value_parser = parse_pattern)]
        lambda_pattern: LambdaPattern,
        #[arg(long)]
        range: f64,
        /// Trapezoid panels per interval for the Parseval probes.
        #[arg(long, default_value_t = 4096)]
        panels: usize,
    },
}

fn parse_pattern(s: &str) -> Result<LambdaPattern, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Why a command did not pass.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Math(String),
}

impl From<pdext::Error> for Failure {
    fn from(e: pdext::Error) -> Self {
        use pdext::Error::*;
        match e {
            NegativeDensity { .. }
            | NotConvex { .. }
            | NotDecreasing { .. }
            | NotEvenReal { .. }
            | TangentHorizontal { .. }
            | NotAnExtension { .. }
            | NotPsd { .. }
            | NotCnd(_)
            | ComplexKernel(_) => Failure::Math(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// What a command produced.
pub(crate) struct Outcome {
    pub report: Vec<u8>,
    pub pass: bool,
    /// The command already used `--out` for its data file.
    pub out_used: bool,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a str,
    error: &'a str,
}

/// Runs `pdext` with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let name = commands::name(&cli.command);
    match commands::dispatch(&cli) {
        Ok(outcome) => {
            let written = match (&cli.out, outcome.out_used) {
                (Some(path), false) => std::fs::write(path, &outcome.report)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                _ => stdout.write_all(&outcome.report).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                let _ = writeln!(stderr, "error: {msg}");
                return EXIT_USAGE;
            }
            if outcome.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(Failure::Math(msg)) => {
            let _ = writeln!(stderr, "{name}: {msg}");
            let _ = stdout.write_all(&to_json(&ErrorReport {
                command: name,
                error: &msg,
            }));
            EXIT_FAIL
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Pretty JSON with a trailing newline. Field order follows the structs,
/// so equal inputs give equal bytes.
pub(crate) fn to_json<R: Serialize>(value: &R) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports serialize");
    out.push(b'\n');
    out
}
