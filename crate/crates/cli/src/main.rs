//! `branching-kms` command-line front end.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation failure, 4 numeric-mode
//! conflict, 5 I/O error. Failures print one JSON object on stderr.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use branching_kms::BigRational;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "branching-kms",
    version,
    about = "Thermodynamics on graded branching graphs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Input document (graph, flow or link spec); stdin when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Float)]
    mode: Mode,
    /// Tolerance for checks; defaults to 0 in exact mode and 1e-10 in float mode.
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Inverse temperature, overriding the document's value.
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Exact,
    Float,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Down,
    Up,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CatalogName {
    Pascal,
    #[value(name = "q_pascal", alias = "q-pascal")]
    QPascal,
    Young,
    Bernoulli,
    Plancherel,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the graph axioms and the thermal data.
    Validate,
    /// Edge and vertex partition functions with the finite/infinite split.
    Partition,
    /// The link matrix from level `upper` down to level `lower`.
    Link {
        #[arg(long)]
        upper: usize,
        /// Defaults to `upper - 1`.
        #[arg(long)]
        lower: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Coherent systems: harmonicity check or extension of a level measure.
    Harmonic {
        #[command(subcommand)]
        action: HarmonicAction,
    },
    /// Paths from the central measure of a coherent system, as JSON lines.
    Sample {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Direction::Down)]
        direction: Direction,
    },
    /// Link rows along a growing path (the ergodic method) as CSV.
    Converge {
        /// Path file: an array of vertex keys or a `sample` line.
        #[arg(long)]
        path: Option<PathBuf>,
        /// Coherent system: reference for the deviation column, and the
        /// measure to sample a path from when `--path` is absent.
        #[arg(long)]
        system: Option<PathBuf>,
        /// Depth of the sampled path.
        #[arg(long)]
        depth: Option<usize>,
        /// Target vertex key such as `[1,1]`; repeatable. Defaults to level 1.
        #[arg(long = "target")]
        targets: Vec<String>,
    },
    /// Edge spectra realizing the link spec read from `--input`.
    Realize {
        /// `uniform` or `geometric:R`.
        #[arg(long, default_value = "uniform")]
        style: String,
        /// Link spec file; same as `--input`.
        linkspec: Option<PathBuf>,
    },
    /// Built-in graphs, flows and coherent systems.
    Catalog {
        #[arg(value_enum)]
        name: CatalogName,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        p: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum HarmonicAction {
    /// Residuals of `nu(z') = sum_z nu(z) kappa(z, z')`.
    Check {
        #[arg(long)]
        system: PathBuf,
    },
    /// Push a level measure down to every lower level.
    Extend {
        #[arg(long)]
        measure: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Parse,
    Validation,
    NumericMode,
    Io,
}

impl Kind {
    fn code(self) -> u8 {
        match self {
            Kind::Parse => 2,
            Kind::Validation => 3,
            Kind::NumericMode => 4,
            Kind::Io => 5,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Parse => "parse-error",
            Kind::Validation => "validation-failure",
            Kind::NumericMode => "numeric-mode-conflict",
            Kind::Io => "io-error",
        }
    }
}

#[derive(Debug)]
struct CliError {
    kind: Kind,
    message: String,
}

impl CliError {
    fn new(kind: Kind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Self::new(Kind::Parse, message)
    }

    fn validation(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.name(), self.message)
    }
}

impl From<branching_kms::Error> for CliError {
    fn from(e: branching_kms::Error) -> Self {
        use branching_kms::Error as E;
        let kind = match &e {
            E::Parse(_) | E::VertexNotFound(_) | E::EdgeNotFound(_) => Kind::Parse,
            E::NumericModeConflict(_) => Kind::NumericMode,
            _ => Kind::Validation,
        };
        CliError::new(kind, e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_text(path: Option<&Path>) -> CliResult<String> {
    let mut text = String::new();
    match path {
        Some(p) => {
            text = std::fs::read_to_string(p)
                .map_err(|e| CliError::new(Kind::Io, format!("{}: {e}", p.display())))?;
        }
        None => {
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| CliError::new(Kind::Io, format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn read_json(path: Option<&Path>) -> CliResult<serde_json::Value> {
    Ok(branching_kms::io::parse_json(&read_text(path)?)?)
}

/// Everything a command produces, written in one piece at the end.
struct Output {
    text: String,
    /// A failed check still writes its report, then exits with this error.
    failure: Option<CliError>,
}

impl Output {
    fn ok(text: String) -> Self {
        Output {
            text,
            failure: None,
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::new(Kind::Io, format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::new(Kind::Io, format!("stdout: {e}")))
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let out = match cli.global.mode {
        Mode::Exact => commands::execute::<BigRational>(&cli.global, &cli.command)?,
        Mode::Float => commands::execute::<f64>(&cli.global, &cli.command)?,
    };
    write_output(cli.global.output.as_deref(), &out.text)?;
    match out.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({
                "error": e.kind.name(),
                "code": e.kind.code(),
                "message": e.message,
            });
            eprintln!("{report}");
            ExitCode::from(e.kind.code())
        }
    }
}
