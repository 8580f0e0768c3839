//! The `ruc` command-line tool.
//!
//! Exit codes: 0 on success, 2 for input errors, 3 for numerical failures.

pub mod commands;
pub mod render;
pub mod strategy;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ruc_core::report::{Document, ErrorReport};
use ruc_core::simulator::CollisionRule;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
}

/// `fixed:W` or `geometric:P`; a bare `fixed` means `fixed:1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleArg(pub CollisionRule);

impl FromStr for RuleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, value) = s.split_once(':').unwrap_or((s, ""));
        let rule = match (kind, value) {
            ("fixed", "") => CollisionRule::Fixed { w: 1 },
            ("fixed", w) => CollisionRule::Fixed {
                w: w.parse().map_err(|e| format!("bad w {w:?}: {e}"))?,
            },
            ("geometric", p) => CollisionRule::Geometric {
                p: p.parse().map_err(|e| format!("bad p {p:?}: {e}"))?,
            },
            _ => return Err(format!("expected fixed:W or geometric:P, got {s:?}")),
        };
        rule.validate().map_err(|e| e.to_string())?;
        Ok(RuleArg(rule))
    }
}

#[derive(Debug, Parser)]
#[command(name = "ruc", version, about = "Solve, certify and simulate repeated-until-collision games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Relative tolerance for Perron brackets.
    #[arg(long, global = true, default_value_t = ruc_core::linalg::DEFAULT_TOL)]
    pub tol: f64,

    /// Master seed for simulations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Number of simulated games.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub trials: u64,

    /// When a game ends: fixed:W (W-th collision) or geometric:P.
    #[arg(long, global = true, default_value = "fixed:1")]
    pub rule: RuleArg,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an equilibrium of the game (A, B); B defaults to A.
    Solve { a: PathBuf, b: Option<PathBuf> },
    /// Certify a candidate strategy pair and list the best pure deviations.
    Verify {
        a: PathBuf,
        b: PathBuf,
        x: PathBuf,
        y: PathBuf,
    },
    /// Monte-Carlo play of two agents, compared with the analytic values when both are stationary.
    Simulate {
        a: PathBuf,
        b: Option<PathBuf>,
        /// Max-player agent: perron, uniform, pure:I, file:PATH, copy-last, cycle or anti.
        #[arg(long = "max", default_value = "perron")]
        max_agent: String,
        /// Min-player agent, same forms as --max.
        #[arg(long = "min", default_value = "perron")]
        min_agent: String,
    },
    /// Closed-form hand-cricket equilibrium.
    Handcricket {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        variant: u8,
        /// Run values, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        scores: Vec<f64>,
    },
    /// Run the HTTP play service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Idle seconds before a session is dropped.
        #[arg(long, default_value_t = 3600)]
        ttl_secs: u64,
        #[arg(long, default_value_t = 10_000)]
        max_sessions: usize,
        /// Append a transcript per session to this directory.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Leave the bot's mixed strategy out of responses.
        #[arg(long)]
        hide_strategy: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Core(ruc_core::Error),
    Io { path: PathBuf, source: io::Error },
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<ruc_core::Error> for CliError {
    fn from(e: ruc_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Adds the file name to parse errors so the location is unambiguous.
fn in_file(path: &Path, e: ruc_core::Error) -> CliError {
    match e {
        ruc_core::Error::Parse {
            line,
            column,
            message,
        } => CliError::Core(ruc_core::Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        }),
        other => CliError::Core(other),
    }
}

pub fn load_matrix(path: &Path) -> CliResult<ruc_core::linalg::PayoffMatrix> {
    ruc_core::linalg::PayoffMatrix::parse(&read_file(path)?).map_err(|e| in_file(path, e))
}

pub fn load_vector(path: &Path) -> CliResult<Vec<f64>> {
    ruc_core::linalg::parse_vector(&read_file(path)?).map_err(|e| in_file(path, e))
}

/// A finished command: the structured document and its human rendering.
pub struct Output {
    pub json: String,
    pub human: String,
}

impl Output {
    pub fn new<T: Serialize>(command: &str, body: T, human: String) -> Self {
        Self {
            json: Document::new(command, body).to_json(),
            human,
        }
    }
}

fn check_config(cli: &Cli) -> CliResult<()> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(ruc_core::Error::OutOfRange {
            name: "tol",
            value: cli.tol,
        }
        .into());
    }
    if cli.trials == 0 {
        return Err(ruc_core::Error::OutOfRange {
            name: "trials",
            value: 0.0,
        }
        .into());
    }
    Ok(())
}

/// Runs a parsed command and returns its report, or `None` for `serve`.
pub fn execute(cli: &Cli) -> CliResult<Option<Output>> {
    check_config(cli)?;
    let out = match &cli.command {
        Command::Solve { a, b } => commands::cmd_solve(a, b.as_deref(), cli.tol)?,
        Command::Verify { a, b, x, y } => commands::cmd_verify(a, b, x, y)?,
        Command::Simulate {
            a,
            b,
            max_agent,
            min_agent,
        } => commands::cmd_simulate(
            a,
            b.as_deref(),
            max_agent,
            min_agent,
            &commands::SimulateOptions {
                tol: cli.tol,
                seed: cli.seed,
                trials: cli.trials,
                rule: cli.rule.0,
                max_rounds: max_rounds_override()?,
            },
        )?,
        Command::Handcricket { variant, scores } => {
            commands::cmd_handcricket(*variant, scores, cli.tol)?
        }
        Command::Serve {
            bind,
            port,
            ttl_secs,
            max_sessions,
            transcripts,
            hide_strategy,
        } => {
            let addr = format!("{bind}:{port}")
                .parse()
                .map_err(|e| CliError::Usage(format!("bad bind address {bind}:{port}: {e}")))?;
            let config = ruc_service::StoreConfig {
                ttl: std::time::Duration::from_secs(*ttl_secs),
                max_sessions: *max_sessions,
                transcript_dir: transcripts.clone(),
                reveal_strategy: !hide_strategy,
            };
            let rt = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
                path: PathBuf::from("<runtime>"),
                source,
            })?;
            rt.block_on(ruc_service::serve(addr, config))
                .map_err(|source| CliError::Io {
                    path: PathBuf::from(addr.to_string()),
                    source,
                })?;
            return Ok(None);
        }
    };
    Ok(Some(out))
}

/// `RUC_MAX_ROUNDS`, when set, replaces the simulator's round cap.
fn max_rounds_override() -> CliResult<Option<u64>> {
    match std::env::var("RUC_MAX_ROUNDS") {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("RUC_MAX_ROUNDS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Entry point shared by the binary: returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = execute(&cli).and_then(|out| match out {
        Some(out) => {
            let mut text = match cli.format {
                Format::Human => out.human,
                Format::Structured => out.json,
            };
            if !text.ends_with('\n') {
                text.push('\n');
            }
            emit(&cli, &text)
        }
        None => Ok(()),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            match cli.format {
                Format::Human => eprintln!("error[{}]: {e}", e.code()),
                Format::Structured => {
                    let doc = Document::new(
                        "error",
                        ErrorReport {
                            code: e.code().into(),
                            message: e.to_string(),
                        },
                    );
                    eprintln!("{}", doc.to_json());
                }
            }
            e.exit_code()
        }
    }
}
