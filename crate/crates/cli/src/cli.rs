use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Ho–Lee bond pricing with reflecting barriers.
///
/// Yields in CSV input and output are percent; rates given as flags are
/// decimals (0.01 = 1%). Times are in years.
#[derive(Debug, Parser)]
#[command(name = "holee", version)]
pub struct Cli {
    /// Write CSV output here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Airy functions at the given points, or zeros of Ai and Ai'.
    Airy(AiryArgs),
    /// Lowest levels of a spectrum and the short-rate levels χ_n.
    Spectrum(SpectrumArgs),
    /// Zero-coupon prices and yields.
    Price(PriceArgs),
    /// Fit (z, β, r0) to a yield curve under zero drift.
    Calibrate(CalibrateArgs),
    /// Residual yields and reconstructed drift for given parameters.
    Residual(ResidualArgs),
    /// Compare a spectral price with the PDE or Monte Carlo oracle.
    Oracle(OracleArgs),
    /// Least-squares cubic fit of yield against maturity.
    Baseline(InputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Semi,
    Interval,
    Robin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplineChoice {
    Cubic,
    Pchip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMethod {
    Pde,
    Mc,
}

#[derive(Debug, Args)]
pub struct AiryArgs {
    /// Points at which to evaluate Ai, Ai', Bi, Bi'.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Vec<f64>,
    /// Instead list the first N zeros of Ai' and Ai.
    #[arg(long)]
    pub zeros: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct LevelArgs {
    /// Number of spectral levels (series cap).
    #[arg(long, env = "HOLEE_N_LEVELS", default_value_t = 300)]
    pub n_levels: usize,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelChoice::Semi)]
    pub model: ModelChoice,
    /// Level spacing scale β = (σ²/2)^{1/3}.
    #[arg(long, conflicts_with = "sigma", allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Volatility σ; alternative to --beta.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Lower barrier r0 = χ(0), decimal.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub r0: f64,
    /// Constant drift ν of χ (per year), decimal.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub nu: f64,
    /// Box width L for the interval model, in units of the Brownian state x.
    #[arg(long = "L", conflicts_with = "alpha_l")]
    pub l: Option<f64>,
    /// Dimensionless box width αL; alternative to --L.
    #[arg(long)]
    pub alpha_l: Option<f64>,
    /// Barrier on the short rate for the Robin model (defaults to r0).
    #[arg(long, allow_hyphen_values = true)]
    pub r_star: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of levels to list.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Current short rate, decimal.
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    /// Times to maturity in years: a comma list, or a CSV file with a
    /// maturity_years (or maturity_date) column.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub maturities: String,
    #[command(flatten)]
    pub levels: LevelArgs,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV with maturity_years or maturity_date, and yield_pct.
    #[arg(long)]
    pub input: PathBuf,
    /// Valuation date (YYYY-MM-DD) for maturity_date input.
    #[arg(long)]
    pub valuation_date: Option<String>,
    /// Drop maturities shorter than this many years.
    #[arg(long, default_value_t = 0.0)]
    pub min_maturity: f64,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Lower bound on the lowest level r0 + β|ξ1|, decimal.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub rmin: f64,
    #[command(flatten)]
    pub levels: LevelArgs,
    /// Also write the reconstructed drift (s, chi, nu) here.
    #[arg(long)]
    pub drift_output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplineChoice::Cubic)]
    pub spline: SplineChoice,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub r0: f64,
    #[command(flatten)]
    pub levels: LevelArgs,
    /// Write the reconstructed drift (s, chi, nu) here.
    #[arg(long)]
    pub drift_output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplineChoice::Cubic)]
    pub spline: SplineChoice,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub method: OracleMethod,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    /// Times to maturity: comma list or CSV file, as for `price`.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub maturities: String,
    #[command(flatten)]
    pub levels: LevelArgs,
    /// Spatial grid points (pde).
    #[arg(long, default_value_t = 2000)]
    pub n_x: usize,
    /// Time steps (pde).
    #[arg(long, default_value_t = 2000)]
    pub n_t: usize,
    /// Paths (mc).
    #[arg(long, default_value_t = 100_000)]
    pub n_paths: usize,
    /// Time steps per year (mc).
    #[arg(long, default_value_t = 250)]
    pub steps_per_year: usize,
    /// Random seed (mc).
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Antithetic path pairs (mc).
    #[arg(long)]
    pub antithetic: bool,
}
