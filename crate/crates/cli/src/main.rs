use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

mod commands;
mod predicate;

use predicate::PredicateArgs;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "ltfsketch",
    version,
    about = "Monarchy dichotomy checks and bias sketching for Max-CSP"
)]
pub struct Cli {
    /// Output style; `text` prints a summary followed by the JSON run record
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for sweeps and brute force (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Largest arity accepted by decide, witness and named predicates
    #[arg(long, global = true, default_value_t = 40)]
    pub max_k: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Density, Chow parameters, ε0, ε* and Chow self-definition of a predicate
    Chow {
        #[command(flatten)]
        predicate: PredicateArgs,
    },
    /// Decide approximability of MON_k by exact LP and replay the certificate
    Decide {
        #[arg(required = true)]
        k: Vec<usize>,
        /// Also sweep every k up to this value
        #[arg(long)]
        to: Option<usize>,
        /// Write the certificate as JSON (single k only)
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Build the explicit witness distribution for MON_k and check it
    Witness {
        #[arg(required = true)]
        k: Vec<usize>,
        #[arg(long)]
        to: Option<usize>,
        /// Write the witness in `rdist` text form (single k only)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a certificate (JSON) or a distribution (`rdist` text); `-` reads stdin
    VerifyCert { file: String },
    /// Run the bias sketching algorithm on an instance
    Sketch {
        #[command(flatten)]
        predicate: PredicateArgs,
        /// Accuracy ε in (0, 1), as a decimal or p/q
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Independent runs with seeds seed, seed+1, ..; reports the median v
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Use the exact bias norm instead of the sketch estimate
        #[arg(long)]
        exact_b: bool,
        /// Instance file, `-` for stdin
        #[arg(long, short, default_value = "-")]
        input: String,
    },
    /// Brute-force optimum, exact bias norm and the bracketing bounds
    Bounds {
        /// Instance file, `-` for stdin
        #[arg(default_value = "-")]
        input: String,
        /// ε for the exact-bias algorithm check
        #[arg(long, default_value = "1/648")]
        eps: String,
    },
    /// Check the binomial comb identity for degree m as a polynomial in δ
    Identity {
        #[arg(required = true)]
        m: Vec<usize>,
        #[arg(long)]
        to: Option<usize>,
    },
    /// Classify a balanced LTF on at most four variables
    Classify4 {
        #[arg(required = true, num_args = 1..=4, allow_hyphen_values = true)]
        weights: Vec<String>,
    },
    /// Generate a seeded random or planted instance
    Gen {
        #[command(flatten)]
        predicate: PredicateArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plant an assignment: a `+`/`-` string of length n, or `random`
        #[arg(long, allow_hyphen_values = true)]
        planted: Option<String>,
        /// Instance destination; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Chow { .. } => "chow",
            Command::Decide { .. } => "decide",
            Command::Witness { .. } => "witness",
            Command::VerifyCert { .. } => "verify-cert",
            Command::Sketch { .. } => "sketch",
            Command::Bounds { .. } => "bounds",
            Command::Identity { .. } => "identity",
            Command::Classify4 { .. } => "classify4",
            Command::Gen { .. } => "gen",
        }
    }
}

/// What a command hands back to be printed and recorded.
pub struct Report {
    pub text: Vec<String>,
    pub outputs: Value,
    pub seeds: Vec<u64>,
    pub passed: bool,
    /// Whether the run record goes to stderr (stdout carries data).
    pub record_to_stderr: bool,
}

impl Report {
    pub fn new(text: Vec<String>, outputs: Value, passed: bool) -> Self {
        Self {
            text,
            outputs,
            seeds: Vec::new(),
            passed,
            record_to_stderr: false,
        }
    }
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    config: &'a Cli,
    seeds: &'a [u64],
    outputs: &'a Value,
    passed: bool,
    wall_clock_ms: f64,
    version: &'a str,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            let record = json!({ "command": cli.command.name(), "config": &cli, "error": e });
            eprintln!("{record}");
            return ExitCode::from(2);
        }
    };
    let record = RunRecord {
        command: cli.command.name(),
        config: &cli,
        seeds: &report.seeds,
        outputs: &report.outputs,
        passed: report.passed,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
        version: env!("CARGO_PKG_VERSION"),
    };
    let line = serde_json::to_string(&record).expect("run record serializes");
    let mut lines: Vec<&str> = Vec::new();
    if cli.format == Format::Text {
        lines.extend(report.text.iter().map(String::as_str));
    }
    lines.push(&line);
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = if report.record_to_stderr {
        emit(io::stderr().lock(), &lines)
    } else {
        emit(io::stdout().lock(), &lines)
    };
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn emit(mut out: impl Write, lines: &[&str]) -> io::Result<()> {
    for l in lines {
        writeln!(out, "{l}")?;
    }
    out.flush()
}
