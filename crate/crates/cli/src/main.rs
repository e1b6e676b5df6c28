mod checks;
mod input;
mod localize;
mod oned;
mod output;
mod suites;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::{Failure, Out, Run};

#[derive(Parser)]
#[command(name = "needlekit", version, about = "Isoperimetry, needle decomposition and displacement convexity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct SpaceArgs {
    /// Space definition file (JSON).
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// Model spec, inline JSON or a file, e.g. '{"kind":"log_linear","h":1}'.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Args, Clone)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG charts where available.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Args, Clone)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Tolerance of the asserted inequality.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Clone)]
pub struct LocalizeArgs {
    /// Discrete space (JSON with coords or dist, and weights).
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// A product_strip model spec, inline JSON or a file.
    #[arg(long)]
    pub model: Option<String>,
    /// The set: JSON array of booleans or of point indices.
    #[arg(long)]
    pub omega: Option<PathBuf>,
    /// Ball center (point index).
    #[arg(long)]
    pub center: Option<usize>,
    /// Ball radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Replace the model's half-strip by a tilted half-plane with this slope.
    #[arg(long)]
    pub wedge: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Split,
    NoSplit,
}

#[derive(Subcommand)]
enum Command {
    /// Volume entropy and the ball-growth slope estimate.
    Entropy {
        #[command(flatten)]
        input: SpaceArgs,
        /// Center of the balls; defaults to the first breakpoint.
        #[arg(long)]
        x0: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cheeger constant of an infinite-mass space and the half-line ratio curve.
    Cheeger {
        #[command(flatten)]
        input: SpaceArgs,
        /// Number of cut points b on the curve.
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Isoperimetric profile sweep over the volume, or the Milman lower profile.
    Profile {
        #[command(flatten)]
        input: SpaceArgs,
        /// Sweep the Milman profile for diameter D instead of a space.
        #[arg(long, value_name = "D")]
        milman: Option<f64>,
        /// Number of volumes in the sweep.
        #[arg(long, default_value_t = 99)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// m+(set) >= h m(set) on random spaces and sets, or on one given pair.
    VerifyIso {
        /// Check a single space instead of random trials.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Interval set for --space (JSON list of [a, b]).
        #[arg(long)]
        set: Option<PathBuf>,
        #[command(flatten)]
        suite: SuiteArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Entropy convexity along quantile geodesics and the Brunn-Minkowski inequality.
    VerifyConvexity {
        /// Check a single space instead of random trials.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Initial density (JSON with edges and rho).
        #[arg(long)]
        mu0: Option<PathBuf>,
        /// Final density.
        #[arg(long)]
        mu1: Option<PathBuf>,
        /// First set for the Brunn-Minkowski check.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Second set for the Brunn-Minkowski check.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Quantile cells per coupling.
        #[arg(long, default_value_t = needlekit_core::interpolate1d::DEFAULT_QUANTILES)]
        quantiles: usize,
        #[command(flatten)]
        suite: SuiteArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Boundary lower bound for small sets on a long interval.
    VerifyLemma41 {
        /// Check a single instance instead of random trials.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Interval set for --space.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Entropy bound h.
        #[arg(long)]
        h: Option<f64>,
        /// Distance R.
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        suite: SuiteArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Slope band of the log-density next to a nearly optimal set.
    VerifyLemma42 {
        /// Check a single instance instead of random trials.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Interval set for --space.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Entropy bound h.
        #[arg(long)]
        h: Option<f64>,
        /// Near-equality slack, in (0, 1/128).
        #[arg(long)]
        eps: Option<f64>,
        /// Length L of the initial segment.
        #[arg(long)]
        l: Option<f64>,
        /// Distance R.
        #[arg(long)]
        r: Option<f64>,
        #[command(flatten)]
        suite: SuiteArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Whether a whole-line space attains its Cheeger constant.
    Rigidity1d {
        #[command(flatten)]
        input: SpaceArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// L1 transport, Kantorovich potential and needle decomposition.
    Needles {
        #[command(flatten)]
        input: LocalizeArgs,
        /// Tolerance on Lipschitz excess, slackness, conservation and needle balance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Product-splitting signature of the needle family.
    SplitDetect {
        #[command(flatten)]
        input: LocalizeArgs,
        /// Allowed deviation of each needle's fitted slope from their mean.
        #[arg(long, default_value_t = 0.05)]
        h_tol: f64,
        /// Allowed 1 - <u_i, u_j> between needle directions.
        #[arg(long, default_value_t = 1e-9)]
        dir_tol: f64,
        /// Allowed spread of the boundary positions; defaults to the largest spacing along the needles.
        #[arg(long)]
        boundary_tol: Option<f64>,
        /// Fail with a counterexample unless the verdict matches.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-run the check stored in a counterexample file.
    Replay {
        /// Counterexample file written by a failing check.
        file: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn configure_threads() -> Run {
    let Ok(v) = std::env::var("NEEDLEKIT_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("NEEDLEKIT_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Input(e.to_string()))
}

fn run(cli: Cli) -> Run {
    configure_threads()?;
    match cli.command {
        Command::Entropy { input, x0, out } => oned::entropy(&input, x0, &Out::new(&out.out)?),
        Command::Cheeger { input, points, out } => oned::cheeger(&input, points, &Out::new(&out.out)?, out.svg),
        Command::Profile { input, milman, points, out } => {
            oned::profile(&input, milman, points, &Out::new(&out.out)?, out.svg)
        }
        Command::Rigidity1d { input, out } => oned::rigidity(&input, &Out::new(&out.out)?),
        Command::VerifyIso { space, set, suite, out } => {
            suites::verify_iso(space.as_deref(), set.as_deref(), &suite, &Out::new(&out.out)?)
        }
        Command::VerifyConvexity { space, mu0, mu1, set, target, quantiles, suite, out } => {
            let files = suites::ConvexityFiles { space, mu0, mu1, set, target };
            suites::verify_convexity(&files, quantiles, &suite, &Out::new(&out.out)?)
        }
        Command::VerifyLemma41 { space, set, h, r, suite, out } => {
            suites::verify_lemma41(space.as_deref(), set.as_deref(), h, r, &suite, &Out::new(&out.out)?)
        }
        Command::VerifyLemma42 { space, set, h, eps, l, r, suite, out } => {
            let single = suites::SlopeArgs { h, eps, l, r };
            suites::verify_lemma42(space.as_deref(), set.as_deref(), single, &suite, &Out::new(&out.out)?)
        }
        Command::Needles { input, tol, out } => localize::needles(&input, tol, &Out::new(&out.out)?),
        Command::SplitDetect { input, h_tol, dir_tol, boundary_tol, expect, out } => {
            let opts = needlekit_core::localize::SplitOptions { h_tol, dir_tol, boundary_tol };
            localize::split_detect(&input, opts, expect, &Out::new(&out.out)?)
        }
        Command::Replay { file, out } => checks::replay(&file, &Out::new(&out)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
