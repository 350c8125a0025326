//! Command-line front end for `gaussmap`: reads a JSON run configuration,
//! runs one experiment and writes a JSON (or CSV) report.

pub mod commands;
pub mod config;
pub mod error;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussmap::rigidity::RadiusConvention;

pub use commands::CommandOutput;
pub use config::{Overrides, RunConfig};
pub use error::{CliError, EXIT_CHECK_FAILED, EXIT_GEOMETRY, EXIT_INVALID, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "gaussmap", version, about = "Gauss maps of hypersurfaces in spheres")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-node curvature table with a min/max summary.
    Report(ConfigArgs),
    /// Integral of the translational curvature against its topological value.
    GaussBonnet(ConfigArgs),
    /// Cap-radius curvature certificate.
    Certify(ConfigArgs),
    /// Clifford torus family satisfying the ε-inequality.
    Counterexample(CounterexampleArgs),
    /// Shrink-and-certify pipeline for convex hypersurfaces.
    Xia(ConfigArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Enclosing,
    Lemma,
}

impl From<Convention> for RadiusConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Enclosing => RadiusConvention::EnclosingCap,
            Convention::Lemma => RadiusConvention::LemmaEmptyBall,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Nodes per chart axis (overrides grid.nodes).
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    /// Output file (overrides output.path).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Cap radius convention (overrides numerics.radius_convention).
    #[arg(long, value_enum)]
    pub convention: Option<Convention>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long, value_name = "N")]
    pub grid: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn resolve(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let overrides = Overrides {
        grid: args.grid,
        convention: args.convention.map(Into::into),
        out: args.out.as_ref().map(|p| p.display().to_string()),
    };
    config::load(&args.config)?.resolve(&overrides)
}

/// Runs a command and returns its report with the output path it asks for.
pub fn execute(command: &Command) -> Result<(CommandOutput, Option<PathBuf>), CliError> {
    match command {
        Command::Counterexample(a) => Ok((commands::counterexample(a.epsilon, a.grid)?, a.out.clone())),
        Command::Report(a) | Command::GaussBonnet(a) | Command::Certify(a) | Command::Xia(a) => {
            let cfg = resolve(a)?;
            let out = match command {
                Command::Report(_) => commands::report(&cfg)?,
                Command::GaussBonnet(_) => commands::gauss_bonnet(&cfg)?,
                Command::Certify(_) => commands::certify(&cfg)?,
                _ => commands::xia(&cfg)?,
            };
            Ok((out, cfg.output.path.map(PathBuf::from)))
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn write_stream(mut w: impl Write, text: &str) -> Result<(), CliError> {
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::Output(e.to_string()))
}

/// Writes the report: a CSV table goes to the output path (or stdout) with
/// the JSON summary on stdout (or stderr when the table took stdout); a
/// JSON-only report goes to the output path or stdout.
pub fn emit(output: &CommandOutput, path: Option<&Path>) -> Result<(), CliError> {
    match (&output.table, path) {
        (Some(table), Some(p)) => {
            write_file(p, table)?;
            write_stream(std::io::stdout().lock(), &output.json)
        }
        (Some(table), None) => {
            write_stream(std::io::stdout().lock(), table)?;
            write_stream(std::io::stderr().lock(), &output.json)
        }
        (None, Some(p)) => write_file(p, &output.json),
        (None, None) => write_stream(std::io::stdout().lock(), &output.json),
    }
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(&cli.command).and_then(|(out, path)| {
        emit(&out, path.as_deref())?;
        Ok(out.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
