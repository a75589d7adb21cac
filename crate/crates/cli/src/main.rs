//! `shearframe` command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad flags or
//! parameters, 3 I/O failure, 4 any other library error.

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shearframe::frame::Variant;
use shearframe::windows::WindowParams;

use commands::Direction;
use config::{Exponent, ReportFormat, RunConfig};

/// Environment variable holding the worker-thread count.
const WORKERS_ENV: &str = "SHEARFRAME_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] shearframe::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use shearframe::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Input(_) => 4,
            CliError::Core(E::InvalidParameter(_) | E::UnknownVariant(_) | E::Hypothesis(_)) => 2,
            CliError::Core(_) => 4,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "shearframe",
    version,
    about = "Band-limited shearlet frames, anisotropic function-space norms and numerical checks"
)]
struct Cli {
    /// JSON run configuration; its fields override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One-dimensional window profiles.
    Windows {
        #[command(subcommand)]
        action: WindowsAction,
    },
    /// Band index set.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Frame construction.
    Frame {
        #[command(subcommand)]
        action: FrameAction,
    },
    /// Analysis and synthesis with a stored frame.
    Transform {
        #[arg(value_enum)]
        direction: Direction,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Norm of a signal in one of the function or sequence spaces.
    Norm(NormArgs),
    /// Numerical checks; writes a report and exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum WindowsAction {
    /// CSV of sampled windows on [-2, 2].
    Dump {
        #[arg(long)]
        grid: Option<usize>,
        /// JSON file with window parameters.
        #[arg(long)]
        windows: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum LatticeAction {
    /// CSV of (cone, scale, shear) bands.
    Enumerate {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
        #[arg(long)]
        period: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum FrameAction {
    /// Builds the masks and stores them.
    Build {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        #[arg(long)]
        period: Option<usize>,
        #[arg(long)]
        windows: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct NormArgs {
    /// bAB, fAB, BAB, FAB (shear) or b, f, B, F (dyadic); lower case are sequence spaces.
    #[arg(long)]
    space: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<Exponent>,
    #[arg(long)]
    q: Option<Exponent>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Stored frame for the shear spaces; built with default scales if absent.
    #[arg(long)]
    frame: Option<PathBuf>,
    #[arg(long = "jmax")]
    j_max: Option<u32>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,
    /// Torus side length for CSV input.
    #[arg(long)]
    period: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<ReportFormat>,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: shearframe::Error| e.to_string())
}

fn load_windows(path: &Option<PathBuf>) -> Result<Option<WindowParams>, CliError> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Usage(format!("windows {}: {e}", path.display())))
}

enum Job {
    WindowsDump,
    LatticeEnumerate,
    FrameBuild,
    Transform(Direction),
    Norm,
    Verify,
}

fn flags(command: Command) -> Result<(Job, RunConfig), CliError> {
    Ok(match command {
        Command::Windows {
            action: WindowsAction::Dump { grid, windows, out },
        } => (
            Job::WindowsDump,
            RunConfig {
                grid,
                windows: load_windows(&windows)?,
                out,
                ..Default::default()
            },
        ),
        Command::Lattice {
            action:
                LatticeAction::Enumerate {
                    d,
                    j_max,
                    period,
                    out,
                },
        } => (
            Job::LatticeEnumerate,
            RunConfig {
                d,
                j_max,
                period,
                out,
                ..Default::default()
            },
        ),
        Command::Frame {
            action:
                FrameAction::Build {
                    d,
                    n,
                    j_max,
                    variant,
                    period,
                    windows,
                    out,
                },
        } => (
            Job::FrameBuild,
            RunConfig {
                d,
                n,
                j_max,
                variant,
                period,
                windows: load_windows(&windows)?,
                out,
                ..Default::default()
            },
        ),
        Command::Transform {
            direction,
            input,
            frame,
            out,
        } => (
            Job::Transform(direction),
            RunConfig {
                input,
                frame,
                out,
                ..Default::default()
            },
        ),
        Command::Norm(a) => (
            Job::Norm,
            RunConfig {
                space: a.space,
                alpha: a.alpha,
                p: a.p,
                q: a.q,
                input: a.input,
                frame: a.frame,
                j_max: a.j_max,
                variant: a.variant,
                period: a.period,
                ..Default::default()
            },
        ),
        Command::Verify(a) => (
            Job::Verify,
            RunConfig {
                suite: a.suite,
                d: a.d,
                n: a.n,
                seed: a.seed,
                out: a.out,
                format: a.format,
                ..Default::default()
            },
        ),
    })
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{WORKERS_ENV}={value} is not a count")))?;
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    configure_workers()?;
    let (job, mut cfg) = flags(cli.command)?;
    if let Some(path) = &cli.config {
        cfg = cfg.overridden_by(RunConfig::load(path)?);
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match job {
        Job::WindowsDump => commands::windows_dump(&cfg, &mut out)?,
        Job::LatticeEnumerate => commands::lattice_enumerate(&cfg, &mut out)?,
        Job::FrameBuild => commands::frame_build(&cfg, &mut out)?,
        Job::Transform(dir) => commands::transform(&cfg, dir, &mut out)?,
        Job::Norm => commands::norm(&cfg, &mut out)?,
        Job::Verify => return commands::verify(&cfg, &mut out),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
