use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "volswap",
    version,
    about = "Volatility swap fair values under lognormal stochastic volatility",
    long_about = "Prices volatility swaps from the hypergeometric series and cross-checks the \
                  result against Monte Carlo and PDE oracles. Machine-readable output embeds a \
                  run manifest that `volswap replay` re-executes. VOLSWAP_THREADS caps Monte \
                  Carlo parallelism (0 = one worker per core)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Series price of a seasoned volatility swap.
    #[command(args_override_self = true)]
    Price(PriceArgs),
    /// Independent reference values.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Series against the oracles over an (alpha, tau, zeta) grid, as CSV.
    #[command(args_override_self = true)]
    Compare(CompareArgs),
    /// Mechanized identity checks.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Monte Carlo estimate.
    #[command(args_override_self = true)]
    Mc(McArgs),
    /// Crank–Nicolson solve plus square-root quadrature.
    #[command(args_override_self = true)]
    Pde(PdeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Annualization {
    /// (1/T)·√(∫σ²), the default.
    Paper,
    /// √((1/T)·∫σ²), i.e. the default value times √T.
    Market,
}

impl Annualization {
    pub fn as_str(self) -> &'static str {
        match self {
            Annualization::Paper => "paper",
            Annualization::Market => "market",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Sum to convergence or to the smallest term.
    Adaptive,
    /// Sum exactly --max-terms terms.
    Fixed,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MarketArgs {
    /// Volatility of volatility.
    #[arg(long)]
    pub alpha: f64,
    /// Instantaneous volatility at the valuation time.
    #[arg(long)]
    pub sigma: f64,
    /// Variance accrued since the start of the accrual period.
    #[arg(long)]
    pub nu: f64,
    /// Start of the accrual period.
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    /// Length of the accrual period.
    #[arg(long)]
    pub tenor: f64,
    /// Valuation time, within [t0, t0 + tenor].
    #[arg(long)]
    pub t: f64,
    /// SABR beta; only 1 is supported.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Correlation; recorded, never used by the volatility leg.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ContractArgs {
    #[arg(long, default_value_t = 0.0)]
    pub strike: f64,
    #[arg(long, default_value_t = 1.0)]
    pub notional: f64,
    /// Flat continuously compounded rate.
    #[arg(long, conflicts_with = "discount_factor")]
    pub rate: Option<f64>,
    /// Discount factor to the payment date.
    #[arg(long)]
    pub discount_factor: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value_t = Annualization::Paper)]
    pub annualization: Annualization,
    /// Write the result here instead of standard output.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SeriesArgs {
    #[arg(long, default_value_t = 64)]
    pub max_terms: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, value_enum, default_value_t = Mode::Adaptive)]
    pub mode: Mode,
    /// Truncation error above this fraction of κ makes the sum diverging.
    #[arg(long, default_value_t = 5e-3)]
    pub asymptotic_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PriceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub contract: ContractArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Payoff {
    /// (1/T)·√(ν + ∫σ²)
    Volatility,
    /// ν + ∫σ², checked against its closed form.
    Variance,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct McFlags {
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Pair every normal draw with its negative.
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub market: MarketArgs,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub mc: McFlags,
    #[arg(long, value_enum, default_value_t = Payoff::Volatility)]
    pub payoff: Payoff,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PdeFlags {
    /// Intervals in ln y.
    #[arg(long, default_value_t = 400)]
    pub ny: usize,
    /// Time steps.
    #[arg(long, default_value_t = 400)]
    pub nt: usize,
    /// Upper end of the y grid (chosen from α²τ when absent).
    #[arg(long)]
    pub y_max: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PdeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub pde: PdeFlags,
    /// Additional solves, each halving both steps, with convergence ratios.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CompareArgs {
    /// Comma-separated vol-of-vol values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    /// Comma-separated times to maturity, each in [0, tenor].
    #[arg(long, value_delimiter = ',', required = true)]
    pub taus: Vec<f64>,
    /// Comma-separated ζ = σ²/(2α²ν) values; ν is derived from them.
    #[arg(long, value_delimiter = ',', required = true)]
    pub zetas: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tenor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub mc: McFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub pde: PdeFlags,
    #[command(flatten)]
    #[serde(flatten)]
    pub series: SeriesArgs,
    /// Skip the PDE column.
    #[arg(long)]
    pub no_pde: bool,
    /// Relative agreement accepted when 3 standard errors are tighter.
    #[arg(long, default_value_t = 1e-3)]
    pub rel_floor: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    All,
    Identity,
    Bessel,
    Psi,
    Functional,
    Kummer,
    J0,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Check::All)]
    pub check: Check,
    /// Terms for the psi and functional checks (the Bessel check always uses 60).
    #[arg(long, default_value_t = 10)]
    pub n_terms: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// JSON output (or bare manifest) of an earlier run.
    pub manifest: PathBuf,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
