mod commands;
mod input;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thetanull::gauss::GaussTolerances;
use thetanull::strata::StrataTolerances;
use thetanull::theta::EvalConfig;
use thetanull::verify::SuiteContext;
use thetanull::Error;

#[derive(Parser)]
#[command(name = "thetanull", version, about = "Theta functions, theta-null strata and Gauss-map diagnostics")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Target absolute truncation error of every theta evaluation.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Relative singular-value threshold for numerical ranks.
    #[arg(long, global = true, default_value_t = thetanull::strata::DEFAULT_RANK_REL_TOL)]
    rank_tol: f64,
    /// Theta constants below this fraction of the largest one vanish.
    #[arg(long, global = true, default_value_t = thetanull::strata::DEFAULT_VANISH_TOL)]
    vanish_tol: f64,
    /// Largest admissible lattice-ellipsoid radius.
    #[arg(long, global = true, default_value_t = 15.0)]
    max_radius: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    samples: usize,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

impl RunArgs {
    pub fn context(&self) -> Result<SuiteContext, Error> {
        let cfg = EvalConfig { target_abs_error: self.tol, max_radius: self.max_radius, ..EvalConfig::default() };
        cfg.validate()?;
        let strata = StrataTolerances { vanish_tol: self.vanish_tol, rank_rel_tol: self.rank_tol };
        strata.validate()?;
        let gauss = GaussTolerances { rel_tol: self.rank_tol, ..GaussTolerances::default() };
        Ok(SuiteContext { cfg, strata, gauss, samples: self.samples, seed: self.seed })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Theta jet at one point.
    Eval {
        /// Period matrix JSON, inline or a file path.
        #[arg(long)]
        period: String,
        /// Characteristic as `eps:delta` bits or JSON.
        #[arg(long = "char")]
        characteristic: Option<String>,
        /// Point as a JSON array of `[re, im]` pairs; defaults to the origin.
        #[arg(long)]
        z: Option<String>,
        #[arg(long, default_value_t = 0)]
        order: usize,
    },
    /// Theta-null membership and the rank stratum of a period matrix.
    Classify {
        #[arg(long)]
        period: String,
    },
    /// Run a named verification suite.
    Verify { suite: String },
    /// Sample period matrices along a line or a grid.
    Scan {
        #[arg(value_enum)]
        mode: ScanMode,
        #[arg(long)]
        period: String,
        /// Symmetric direction matrix JSON, inline or a file path.
        #[arg(long)]
        direction: String,
        /// Second direction for grid scans.
        #[arg(long)]
        direction2: Option<String>,
        #[arg(long, default_value_t = -0.2, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        to: f64,
        /// Samples per axis.
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Random theta-divisor points per sample at which to evaluate η.
        #[arg(long, default_value_t = 0)]
        eta_points: usize,
    },
    /// Jacobians of the singularity schemes.
    Sing {
        #[arg(long)]
        period: String,
        /// Even characteristic whose half-period is the base point.
        #[arg(long = "char")]
        characteristic: Option<String>,
        /// Explicit point for the scheme S.
        #[arg(long)]
        z: Option<String>,
        /// Restrict to one scheme.
        #[arg(long, value_enum)]
        which: Option<WhichArg>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    Line,
    Grid,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhichArg {
    S,
    Snull,
}

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Library(Error),
    Io(io::Error),
    /// Engine failure at one sample of a scan; the record is already written.
    Sample(Error),
    /// A verification suite ran and reported failures.
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Usage(_) => 2,
            Failure::Library(e) if e.is_input_error() => 2,
            Failure::Library(_) | Failure::Io(_) | Failure::Sample(_) => 3,
        }
    }

    fn record(&self) -> Option<ErrorRecord<'_>> {
        let exit_code = self.exit_code();
        match self {
            Failure::Verification => None,
            Failure::Usage(m) => Some(ErrorRecord { error: "Usage", message: m.clone(), exit_code }),
            Failure::Library(e) | Failure::Sample(e) => Some(ErrorRecord { error: e.kind(), message: e.to_string(), exit_code }),
            Failure::Io(e) => Some(ErrorRecord { error: "Io", message: e.to_string(), exit_code }),
        }
    }
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = cli.run.context()?;
    let mut out = open_output(&cli.run.output)?;
    let result = match cli.command {
        Command::Eval { period, characteristic, z, order } => {
            commands::eval(&ctx, &period, characteristic.as_deref(), z.as_deref(), order, &mut out)
        }
        Command::Classify { period } => commands::classify(&ctx, &period, &mut out),
        Command::Verify { suite } => commands::verify(&ctx, &suite, &mut out),
        Command::Scan { mode, period, direction, direction2, from, to, steps, eta_points } => {
            let spec = commands::ScanSpec { mode, from, to, steps, eta_points };
            commands::scan(&ctx, &spec, &period, &direction, direction2.as_deref(), &mut out)
        }
        Command::Sing { period, characteristic, z, which } => {
            commands::sing(&ctx, &period, characteristic.as_deref(), z.as_deref(), which, &mut out)
        }
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = Failure::Usage(e.to_string().trim().to_string());
            eprintln!("{}", thetanull::json::to_string(&failure.record()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(r) = f.record() {
                eprintln!("{}", thetanull::json::to_string(&r));
            }
            ExitCode::from(f.exit_code())
        }
    }
}
