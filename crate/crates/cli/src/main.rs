//! `ruin`: command-line driver for the two-strata persistent gambler's ruin.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime
//! guard (step cap, enumeration budget, undecayed characteristic function).

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use ruin_core::ring::{parse_rational, Rational};
use ruin_core::{Error, ModelParams};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ruin", version, about = "Exact and Monte Carlo tools for the two-strata persistent gambler's ruin")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact conditional law of (runs, short runs, steps) of one excursion given H ≤ N.
    ExactDist {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 16)]
        lmax: u32,
        /// Compare every coefficient with the path enumeration.
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Series coefficients of the one-sided first-passage generating function g_{m,n}.
    FirstPassage {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "from")]
        from_level: u32,
        #[arg(long = "to")]
        to_level: u32,
        #[arg(long, default_value_t = 16)]
        lmax: u32,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// K_N at a complex point.
    Kn {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// K = lim K_N for the single-stratum walk at a complex point.
    KInfinity {
        #[arg(long, value_parser = rational)]
        a: Rational,
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo trajectories and the empirical characteristic function of a scaled statistic.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// X, Xcal, Y1Y2, Xzeta:<zeta> or Z1Z2.
        #[arg(long, default_value = "X", value_parser = stat_kind)]
        stat: ruin_core::sim::StatKind,
        /// Comma-separated arguments; pair statistics take `s:t`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        t: Vec<String>,
        /// Also write one CSV row per trajectory here.
        #[arg(long)]
        rows: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Density of a limit law by Fourier inversion.
    Density {
        #[arg(long, value_parser = real)]
        a: f64,
        /// Defaults to 1 − a (with eta = a), the closed special case.
        #[arg(long, value_parser = real)]
        b: Option<f64>,
        #[arg(long, value_parser = real)]
        eta: Option<f64>,
        #[arg(long, value_enum, default_value_t = Law::Meander)]
        law: Law,
        #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = 1601)]
        points: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Truncation of the t integral; chosen from the decay rate if omitted.
        #[arg(long)]
        t_max: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run an identity suite and print a JSON report.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, value_parser = rational)]
        a: Option<Rational>,
        #[arg(long, value_parser = rational)]
        b: Option<Rational>,
        #[arg(long)]
        f: Option<u32>,
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long, default_value_t = 5)]
        nmax: u32,
        #[arg(long, default_value_t = 14)]
        lmax: u32,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_parser = rational)]
    a: Rational,
    #[arg(long, value_parser = rational)]
    b: Rational,
    /// Threshold level; defaults to round(eta N).
    #[arg(long)]
    f: Option<u32>,
    #[arg(long = "N")]
    n: u32,
    #[arg(long, value_parser = real)]
    eta: Option<f64>,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams, Failure> {
        let f = match (self.f, self.eta) {
            (Some(f), _) => f,
            (None, Some(eta)) => ((eta * f64::from(self.n)).round() as u32).max(1),
            (None, None) => return Err(Failure::Usage("one of --f or --eta is required".into())),
        };
        let mut p = ModelParams::new(self.a.clone(), self.b.clone(), f, self.n)?;
        if let Some(eta) = self.eta {
            p = p.with_eta(eta);
            p.validate()?;
        }
        Ok(p)
    }
}

#[derive(Args)]
struct PointArgs {
    /// Complex values such as `0.8`, `0.8+0.1i`.
    #[arg(long, default_value = "1", value_parser = complex, allow_hyphen_values = true)]
    r: Complex64,
    #[arg(long, default_value = "1", value_parser = complex, allow_hyphen_values = true)]
    y: Complex64,
    #[arg(long, default_value = "1", value_parser = complex, allow_hyphen_values = true)]
    z: Complex64,
}

#[derive(Args)]
struct OutArgs {
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl OutArgs {
    fn writer(&self) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Law {
    /// φ̂, the meander statistic X_N.
    Meander,
    /// ψ̂/φ̂, the last-visit statistic.
    LastVisit,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Symmetry,
    Rho,
    Oracle,
    Limits,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Decimal or `p/q`.
fn real(s: &str) -> Result<f64, String> {
    if let Ok(q) = parse_rational(s) {
        return num_traits::ToPrimitive::to_f64(&q).ok_or_else(|| format!("{s} is out of range"));
    }
    s.trim().parse::<f64>().map_err(|e| format!("{s}: {e}"))
}

fn complex(s: &str) -> Result<Complex64, String> {
    s.trim().parse::<Complex64>().map_err(|e| format!("{s}: {e}"))
}

fn stat_kind(s: &str) -> Result<ruin_core::sim::StatKind, String> {
    use ruin_core::sim::StatKind;
    Ok(match s {
        "X" => StatKind::X,
        "Xcal" => StatKind::Xcal,
        "Y1Y2" => StatKind::Y1Y2,
        "Z1Z2" => StatKind::Z1Z2,
        _ => match s.strip_prefix("Xzeta:") {
            Some(z) => StatKind::Xzeta(real(z)?),
            None => return Err(format!("unknown statistic {s}")),
        },
    })
}

/// Failure classes, one per nonzero exit code.
#[derive(Debug)]
enum Failure {
    Verification(String),
    Usage(String),
    Guard(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::StepCapExceeded { .. }
            | Error::BudgetExceeded(_)
            | Error::TailNotDecayed(_)
            | Error::BranchAmbiguity
            | Error::SingularSystem
            | Error::SingularQ
            | Error::DegenerateAlpha => Failure::Guard(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Guard(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Guard(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Guard(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("RUIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| Failure::Usage(format!("RUIN_THREADS={raw} is not a count")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Guard(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::ExactDist { model, lmax, verify, out } => commands::exact_dist(&model.params()?, lmax, verify, &out),
        Command::FirstPassage { model, from_level, to_level, lmax, verify, out } => {
            commands::first_passage(&model.params()?, from_level, to_level, lmax, verify, &out)
        }
        Command::Kn { model, point, out } => commands::kn(&model.params()?, &point, &out),
        Command::KInfinity { a, point, out } => commands::k_infinity(&a, &point, &out),
        Command::Simulate { model, samples, seed, stat, t, rows, out } => {
            commands::simulate(&model.params()?, samples, seed, stat, &t, rows.as_deref(), &out)
        }
        Command::Density { a, b, eta, law, xmin, xmax, points, dt, t_max, out } => {
            commands::density(commands::DensityArgs { a, b, eta, law, xmin, xmax, points, dt, t_max }, &out)
        }
        Command::Verify { suite, a, b, f, n, nmax, lmax, out } => {
            commands::verify(suite, commands::VerifyArgs { a, b, f, n, nmax, lmax }, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Verification(m) => (1, m),
                Failure::Usage(m) => (2, m),
                Failure::Guard(m) => (3, m),
            };
            eprintln!("ruin: {msg}");
            ExitCode::from(code)
        }
    }
}
