#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ringmatch::Error;

mod commands;
mod config;

/// Localised dihedral ring patterns near a Turing instability.
#[derive(Parser, Debug)]
#[command(name = "ringmatch", version)]
struct Cli {
    /// TOML file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SystemArgs {
    /// Swift–Hohenberg system (the default when no system file is given).
    #[arg(long)]
    pub sh: bool,
    /// Quadratic coefficient of the Swift–Hohenberg system.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Plain-text system file.
    #[arg(long, conflicts_with_all = ["sh", "gamma"])]
    pub system: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RootArgs {
    #[arg(short = 'm')]
    pub m: Option<u32>,
    #[arg(short = 'N')]
    pub n: Option<usize>,
    /// Explicit matching vector a_0,...,a_N.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a: Vec<f64>,
    /// Index into the listed matching roots for (m, N).
    #[arg(long, conflicts_with = "a")]
    pub root: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turing data and bifurcation coefficients.
    Coeffs {
        #[command(flatten)]
        sys: SystemArgs,
    },
    /// Roots of the cubic matching equation.
    Match {
        #[arg(short = 'm')]
        m: Option<u32>,
        #[arg(short = 'N')]
        n: Option<usize>,
        /// Random Newton starts (default 500 (N+1)²).
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Diff the listed roots against the published tables.
        #[arg(long)]
        compare_paper: bool,
    },
    /// Homoclinic of the radial Ginzburg–Landau equation.
    Gl {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        c3: Option<f64>,
        #[arg(long)]
        s_max: Option<f64>,
    },
    /// Planar field from the leading-order profile.
    Synthesize {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        root: RootArgs,
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        /// +1 or -1.
        #[arg(long, allow_negative_numbers = true)]
        sign: Option<f64>,
        /// Sample the disc of this radius.
        #[arg(long, conflicts_with = "square")]
        disc: Option<f64>,
        /// Sample the square of this half-width.
        #[arg(long)]
        square: Option<f64>,
        /// Lattice points per side.
        #[arg(long)]
        points: Option<usize>,
        /// two-region, strict, blend or composite.
        #[arg(long)]
        regions: Option<String>,
        #[arg(long)]
        r0: Option<f64>,
        /// Also export the second adjoint projection.
        #[arg(long)]
        both: bool,
    },
    /// Galerkin residuals, Newton refinement and μ continuation.
    Verify {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        root: RootArgs,
        /// Values of μ at which to evaluate the seed residual.
        #[arg(long, value_delimiter = ',')]
        mus: Vec<f64>,
        #[arg(long)]
        regions: Option<String>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        /// Refine the seed with Newton at this μ.
        #[arg(long)]
        refine: Option<f64>,
        /// Continuation `start:end:steps` in μ.
        #[arg(long)]
        branch: Option<String>,
        /// Branch CSV path (inline in the report when absent).
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Continuum matching equation and large-N convergence.
    Continuum {
        /// Grid points on [0, 1].
        #[arg(short = 'M', long)]
        grid: Option<usize>,
        /// Discrete sizes to compare.
        #[arg(long, value_delimiter = ',')]
        family: Vec<usize>,
        /// Convergence table path (stderr when absent).
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotTuring(_) | Error::NotDoubleEigenvalue(_) | Error::Parse(_) | Error::DomainError(_) | Error::DimensionMismatch { .. } => 2,
        Error::Supercritical(_) => 3,
        Error::NoConvergence(_) | Error::SingularJacobian | Error::ClassificationAmbiguous(_) | Error::StepFailure(_) => 4,
        Error::Io(_) => 1,
    }
}

fn run(cli: Cli) -> ringmatch::Result<u8> {
    let file = match &cli.config {
        Some(p) => config::FileConfig::load(p)?,
        None => config::FileConfig::default(),
    };
    if let Some(t) = cli.threads.or(file.threads) {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Error::DomainError(e.to_string()))?;
    }
    let mut ctx = commands::Ctx::new(file, cli.out, cli.seed);
    match cli.cmd {
        Command::Coeffs { sys } => commands::coeffs(&mut ctx, &sys),
        Command::Match { m, n, starts, tol, compare_paper } => commands::matching(&mut ctx, m, n, starts, tol, compare_paper),
        Command::Gl { sys, c0, c3, s_max } => commands::gl(&mut ctx, &sys, c0, c3, s_max),
        Command::Synthesize { sys, root, mu, sign, disc, square, points, regions, r0, both } => {
            commands::synthesize(&mut ctx, &sys, &root, commands::SynthOpts { mu, sign, disc, square, points, regions, r0, both })
        }
        Command::Verify { sys, root, mus, regions, h, r_max, tol, refine, branch, table } => {
            commands::verify(&mut ctx, &sys, &root, commands::VerifyOpts { mus, regions, h, r_max, tol, refine, branch, table })
        }
        Command::Continuum { grid, family, table } => commands::continuum(&mut ctx, grid, family, table),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
