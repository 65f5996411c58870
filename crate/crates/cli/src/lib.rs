//! Command-line front end: figure data, dual-path verification and
//! spectrum tables as CSV/JSON.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use peridyn_core::{Material, NonlocalParams, QuadratureSpec, TorusSpec};
use thiserror::Error;

pub mod figure;
pub mod output;
pub mod spectrum;
pub mod verify;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Eval(#[from] peridyn_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("failed to serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 1,
        }
    }
}

/// Exit status for errors: usage and evaluation failures alike.
pub const ERROR_EXIT_CODE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "peridyn", version, about = "Fourier multipliers and spectra of linear peridynamic operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue curves over |ν|, one CSV per (δ, β) panel.
    ///
    /// Without --delta/--beta the full grid is written: β ∈ {n+2−1e−3,
    /// n+1, n, n−1} (near-local, linear, logarithmic and bounded growth of
    /// λ₂) against δ ∈ {1e−3, 1, 2}. Either flag restricts the grid to
    /// that value.
    Figure(FigureArgs),
    /// Compare closed-form multipliers with direct quadrature on a seeded
    /// quasi-random sweep; writes a JSON report.
    Verify(VerifyArgs),
    /// Eigenvalues at every lattice frequency of a periodic box.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = figure::DEFAULT_MU)]
    pub mu: f64,
    /// Repeatable; defaults to −1.9, −1, 0, 1, 2.
    #[arg(long = "lambda-star", allow_negative_numbers = true)]
    pub lambda_star: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Upper end of the |ν| range; the range starts at 0.
    #[arg(long, default_value_t = 15.0)]
    pub nu_max: f64,
    /// Output directory.
    #[arg(long, default_value = "figure")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Number of tuples.
    #[arg(long, visible_alias = "count", default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Pin the dimension of every tuple.
    #[arg(long)]
    pub n: Option<usize>,
    /// Pin the kernel exponent of every tuple.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long = "lambda-star", default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda_star: f64,
    /// Box side lengths; defaults to 2π in every direction.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    pub k_max: i64,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(out: Option<&PathBuf>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => output::write_atomic(path, contents),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

pub fn run_figure(args: &FigureArgs) -> Result<Outcome, CliError> {
    let lambda_stars = if args.lambda_star.is_empty() {
        figure::DEFAULT_LAMBDA_STARS.to_vec()
    } else {
        args.lambda_star.clone()
    };
    let deltas: Vec<f64> = match args.delta {
        Some(d) => vec![d],
        None => figure::DEFAULT_DELTAS.to_vec(),
    };
    let betas: Vec<f64> = match args.beta {
        Some(b) => vec![b],
        None => figure::default_betas(args.n).to_vec(),
    };
    let mut jobs = Vec::new();
    for &beta in &betas {
        for &delta in &deltas {
            jobs.push(figure::FigureJob {
                n: args.n,
                mu: args.mu,
                lambda_stars: lambda_stars.clone(),
                delta,
                beta,
                nu_norm_min: 0.0,
                nu_norm_max: args.nu_max,
                samples: args.samples,
            });
        }
    }
    for path in figure::run(&jobs, &args.out)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(Outcome::Success)
}

pub fn run_verify(args: &VerifyArgs) -> Result<Outcome, CliError> {
    let overrides = verify::Overrides {
        n: args.n,
        beta: args.beta,
    };
    let report = verify::run(args.seed, args.samples, args.tol, overrides, &QuadratureSpec::default())?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    emit(args.out.as_ref(), &json)?;
    eprintln!(
        "{}/{} tuples passed, max relative error {:.3e}",
        report.count - report.failures,
        report.count,
        report.max_rel_error
    );
    Ok(report.outcome())
}

pub fn run_spectrum(args: &SpectrumArgs) -> Result<Outcome, CliError> {
    let params = NonlocalParams::new(args.n, args.delta, args.beta)?;
    let material = Material::new(args.mu, args.lambda_star)?;
    let lengths = if args.lengths.is_empty() {
        vec![2.0 * PI; args.n]
    } else {
        args.lengths.clone()
    };
    let torus = TorusSpec::new(lengths)?;
    let csv = spectrum::run(&params, &material, &torus, args.k_max)?;
    emit(args.out.as_ref(), &csv)?;
    Ok(Outcome::Success)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Figure(a) => run_figure(a),
        Command::Verify(a) => run_verify(a),
        Command::Spectrum(a) => run_spectrum(a),
    }
}
