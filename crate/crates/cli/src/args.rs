use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmonic_besov::verify::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "hbb", version, about = "Harmonic Bergman-Besov kernels, Carleson measures and Toeplitz operators")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Truncation radius for lattices and horizon-truncated integrals.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Relative tolerance of kernel series.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Quadrature level; each command has its own default.
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// Seed of every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "HBB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproducing kernels and their boundary scans.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Generate or audit a separated lattice.
    Lattice(LatticeArgs),
    /// Carleson statistics and transforms of a measure file.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Truncated Toeplitz operators of a measure file.
    #[command(subcommand)]
    Toeplitz(ToeplitzCmd),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum KernelCmd {
    /// One kernel value with its truncation bound.
    Eval {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x: List,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        y: List,
    },
    /// `int |R_alpha(x, y)|^p (1 - |y|^2)^beta dnu(y)` along a radius.
    NormScan {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[command(flatten)]
        radii: Radii,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// `int (1 - |y|^2)^beta / [x, y]^(n + beta + s) dnu(y)` along a radius.
    BracketScan {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[command(flatten)]
        radii: Radii,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Scan radii: explicit, or `count` values with `1 - r^2` log-spaced.
#[derive(Debug, Args)]
pub struct Radii {
    #[arg(long, value_parser = parse_point, conflicts_with_all = ["w_min", "w_max", "count"])]
    pub radii: Option<List>,
    #[arg(long, default_value_t = 5e-3)]
    pub w_min: f64,
    #[arg(long, default_value_t = 0.1)]
    pub w_max: f64,
    #[arg(long, default_value_t = 7)]
    pub count: usize,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    #[arg(long, required_unless_present = "check")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "check")]
    pub delta: Option<f64>,
    /// Audit an existing lattice file instead of generating one.
    #[arg(long, conflicts_with_all = ["n", "delta"])]
    pub check: Option<PathBuf>,
    /// Uniform points used by the coverage and multiplicity audits.
    #[arg(long, default_value_t = harmonic_besov::geometry::AUDIT_SAMPLES)]
    pub samples: usize,
}

/// Evaluation points: repeated `--x a,b,..` or radii along the first axis.
#[derive(Debug, Args)]
pub struct Points {
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub x: Vec<List>,
    #[arg(long, value_parser = parse_point)]
    pub radii: Option<List>,
}

#[derive(Debug, Args)]
pub struct LatticeSource {
    /// Lattice file; generated from `--delta` and `--horizon` when absent.
    #[arg(long)]
    pub lattice: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
}

#[derive(Debug, Subcommand)]
pub enum MeasureCmd {
    /// Lattice Carleson statistic.
    Carleson {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        lattice: LatticeSource,
    },
    /// Shell profile of the vanishing-Carleson quantity.
    Vanishing {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        lattice: LatticeSource,
    },
    /// Berezin transform `mu~_{Phi, alpha}` at the given points.
    Berezin {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "phi", alias = "Phi", allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        points: Points,
    },
    /// Averaging function `mu(E_delta(x)) / nu_alpha(E_delta(x))`.
    Averaging {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[command(flatten)]
        points: Points,
    },
}

/// Truncation: harmonics of degree at most `max_degree` on `b^2_alpha`.
#[derive(Debug, Args)]
pub struct Truncation {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long = "max-degree", short = 'K', default_value_t = 10)]
    pub max_degree: usize,
}

#[derive(Debug, Subcommand)]
pub enum ToeplitzCmd {
    /// Operator matrix in the sphere-orthonormal solid harmonics.
    Matrix {
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Eigenvalues, trace and Schatten norms.
    Spectrum {
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long, value_parser = parse_point, default_value = "1,2")]
        p: List,
    },
    /// Ladder, Berezin and lattice readings of `T_mu in S_p`.
    Schatten {
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Truncation degrees; the largest replaces `--max-degree`.
        #[arg(long, value_parser = parse_degrees, default_value = "4,8,12,16")]
        ladder: Degrees,
        #[command(flatten)]
        lattice: LatticeSource,
    },
    /// Residual of `D^t_s T_mu = T_kappa D^t_s`.
    Intertwine {
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Norm estimate of `T_mu` between two Besov spaces.
    Bounded {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        p1: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha2: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        /// Also report the lattice statistic of `kappa`.
        #[arg(long)]
        carleson: bool,
        #[command(flatten)]
        lattice: LatticeSource,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Kernels,
    Geometry,
    Calculus,
    Carleson,
    Toeplitz,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    /// Run against a deliberately broken build.
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

/// Comma-separated reals, such as a point or a list of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Degrees(pub Vec<usize>);

pub fn parse_point(s: &str) -> Result<List, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(List)
}

pub fn parse_degrees(s: &str) -> Result<Degrees, String> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Degrees)
}
