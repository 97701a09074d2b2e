//! Closed-form expansion of κ_t in confluent hypergeometric functions:
//!
//! ```text
//! κ_t = (√ν_t / T) Σ_{n≥0} b_n e^{E_n τ} ζ^n ₁F₁(n − ½; 2n + ½; ζ)
//! b_n = (−1)^{n+1} Γ(n−½)² / (2√π n! Γ(2n−½)),   E_n = α² n (2n−1)
//! ζ   = σ² / (2 α² ν_t),                          τ = t0 + T − t
//! ```
//!
//! For τ > 0 the factors e^{E_n τ} grow like e^{2α²τn²}, so the series is
//! asymptotic rather than convergent. In adaptive mode it is summed up to its
//! smallest term, half of which is added (the usual refinement for series
//! whose terms alternate in sign); the smallest term is reported as the
//! truncation error estimate.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{domain, Error, Result};
use crate::model::{discount_factor, DiscountCurve, MarketState, PricingResult, SabrParams, SwapContract};
use crate::specfun::{erfi, gamma_half_integer, kummer_1f1};

/// Tolerance used for every ₁F₁ evaluation inside a series term.
const TERM_TOL: f64 = 1e-16;
/// Multiplier on ε·Σ|terms| for the floating-point cancellation estimate.
const ROUNDING_FACTOR: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    /// Stop at convergence, or at the smallest term once terms grow.
    AdaptiveAsymptotic,
    /// Sum exactly `max_terms` terms.
    FixedN,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub max_terms: usize,
    pub rel_tol: f64,
    pub mode: SeriesMode,
    /// A truncated sum whose error estimate exceeds `asymptotic_tol · |κ|`
    /// is reported as diverging.
    pub asymptotic_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            max_terms: 64,
            rel_tol: 1e-10,
            mode: SeriesMode::AdaptiveAsymptotic,
            asymptotic_tol: 5e-3,
        }
    }
}

impl SeriesConfig {
    pub fn fixed(n_terms: usize) -> Self {
        Self {
            max_terms: n_terms,
            mode: SeriesMode::FixedN,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_terms == 0 {
            return Err(domain("max_terms must be at least 1"));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("asymptotic_tol", self.asymptotic_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesRegime {
    ConvergentLike,
    AsymptoticTruncated,
    Diverging,
}

impl SeriesRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesRegime::ConvergentLike => "convergent_like",
            SeriesRegime::AsymptoticTruncated => "asymptotic_truncated",
            SeriesRegime::Diverging => "diverging",
        }
    }
}

/// How the κ series was summed. Term magnitudes are in κ units (scaled by
/// √ν/T).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesDiagnostics {
    /// Terms contributing to the value (the half-weighted term included).
    pub terms_used: usize,
    pub terms_evaluated: usize,
    pub min_term_index: usize,
    pub min_term_abs: f64,
    /// Truncation error estimate.
    pub error_estimate: f64,
    /// Bound on floating-point cancellation in the partial sum.
    pub rounding_error: f64,
    pub converged: bool,
    pub regime: SeriesRegime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesVariables {
    pub tau: f64,
    pub zeta: f64,
    pub z: f64,
}

/// b_n as an exact rational. The √π factors of the half-integer gammas
/// cancel: Γ(n−½)² = r₁²π and Γ(2n−½) = r₂√π, so b_n = (−1)^{n+1} r₁² / (2 n! r₂).
pub fn coeff_b_exact(n: u32) -> BigRational {
    let n_i = i64::from(n);
    let r1 = gamma_half_integer(2 * n_i - 1).expect("odd argument").rational();
    let r2 = gamma_half_integer(4 * n_i - 1).expect("odd argument").rational();
    let mut fact = BigInt::one();
    for j in 2..=n {
        fact *= BigInt::from(j);
    }
    let sign = if n % 2 == 0 { -1 } else { 1 };
    let denom = r2 * BigRational::from_integer(fact * BigInt::from(2));
    (&r1 * &r1) / denom * BigRational::from_integer(BigInt::from(sign))
}

pub fn coeff_b(n: u32) -> f64 {
    coeff_b_exact(n).to_f64().unwrap_or(0.0)
}

/// Rational part of a_n = (−1)^n (2n − ½) Γ(n − ½) / n!, i.e. a_n / √π.
/// These are the coefficients of the expansion y^{−1/2} = 2^{−1/2} Σ a_n I_{2n−½}(y).
pub fn coeff_a_exact(n: u32) -> BigRational {
    let n_i = i64::from(n);
    let r1 = gamma_half_integer(2 * n_i - 1).expect("odd argument").rational();
    let mut fact = BigInt::one();
    for j in 2..=n {
        fact *= BigInt::from(j);
    }
    let sign = if n % 2 == 0 { 1 } else { -1 };
    let lead = BigRational::new(BigInt::from(sign * (4 * n_i - 1)), BigInt::from(2));
    lead * r1 / BigRational::from_integer(fact)
}

pub fn coeff_a(n: u32) -> f64 {
    coeff_a_exact(n).to_f64().unwrap_or(0.0) * PI.sqrt()
}

/// E_n = α² n (2n − 1); equals (α²/2)((2n − ½)² − ¼).
pub fn energy_e(n: u32, alpha: f64) -> f64 {
    let nf = f64::from(n);
    alpha * alpha * nf * (2.0 * nf - 1.0)
}

pub fn series_variables(state: &MarketState, params: &SabrParams, contract: &SwapContract) -> Result<SeriesVariables> {
    if state.nu == 0.0 {
        return Err(Error::SeriesSingular);
    }
    if !(state.nu > 0.0 && state.nu.is_finite()) {
        return Err(domain(format!("accrued variance must be positive, got {}", state.nu)));
    }
    if !(state.sigma > 0.0 && state.sigma.is_finite()) {
        return Err(domain(format!("volatility must be positive, got {}", state.sigma)));
    }
    let tau = contract.time_to_maturity(state.t);
    if !(tau >= 0.0 && tau <= contract.tenor()) {
        return Err(domain(format!(
            "valuation time {} outside the accrual window [{}, {}]",
            state.t,
            contract.t0(),
            contract.maturity()
        )));
    }
    let alpha = params.alpha();
    let zeta = state.sigma * state.sigma / (2.0 * alpha * alpha * state.nu);
    Ok(SeriesVariables {
        tau,
        zeta,
        z: 4.0 * zeta,
    })
}

/// n-th summand b_n e^{E_n τ} ζ^n ₁F₁(n−½; 2n+½; ζ), without the √ν/T factor.
pub fn series_term(n: u32, zeta: f64, tau: f64, alpha: f64) -> Result<f64> {
    let nf = f64::from(n);
    let f = kummer_1f1(nf - 0.5, 2.0 * nf + 0.5, zeta, TERM_TOL)?;
    Ok(coeff_b(n) * (energy_e(n, alpha) * tau).exp() * zeta.powi(n as i32) * f.value)
}

/// κ_t from the hypergeometric series, with truncation diagnostics.
///
/// A negative or non-finite sum is never clamped; it yields a diverging
/// verdict instead.
pub fn kappa_series(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    config: &SeriesConfig,
) -> Result<(f64, SeriesDiagnostics)> {
    config.validate()?;
    let vars = series_variables(state, params, contract)?;
    let scale = state.nu.sqrt() / contract.tenor();
    let alpha = params.alpha();

    let mut terms: Vec<f64> = Vec::with_capacity(config.max_terms);
    let mut partial = 0.0;
    let mut small_run = 0u8;
    let mut converged = false;
    let mut overflow = false;
    for n in 0..config.max_terms as u32 {
        let t = series_term(n, vars.zeta, vars.tau, alpha)?;
        if !t.is_finite() {
            overflow = true;
            break;
        }
        terms.push(t);
        partial += t;
        if n >= 1 && t.abs() <= config.rel_tol * partial.abs() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if config.mode == SeriesMode::AdaptiveAsymptotic {
            if small_run >= 2 {
                converged = true;
                break;
            }
            // Past the minimum the growth is super-exponential; stop early.
            if n >= 3 {
                let (k, m) = min_term(&terms);
                if (n as usize) >= k + 2 && t.abs() > 1e8 * m {
                    break;
                }
            }
        } else if small_run >= 2 {
            converged = true;
        }
    }
    if terms.is_empty() {
        return Err(Error::Accuracy(String::from("first series term overflowed")));
    }

    let (min_idx, min_abs) = min_term(&terms);
    let last = terms.len() - 1;
    let (sum, used, err) = match config.mode {
        SeriesMode::FixedN => (terms.iter().sum::<f64>(), terms.len(), terms[last].abs()),
        SeriesMode::AdaptiveAsymptotic if converged => (terms.iter().sum::<f64>(), terms.len(), terms[last].abs()),
        SeriesMode::AdaptiveAsymptotic if min_idx == last && !overflow => {
            // still decreasing when max_terms ran out
            (terms.iter().sum::<f64>(), terms.len(), terms[last].abs())
        }
        SeriesMode::AdaptiveAsymptotic => {
            let head: f64 = terms[..min_idx].iter().sum();
            (head + 0.5 * terms[min_idx], min_idx + 1, min_abs)
        }
    };
    let abs_total: f64 = terms[..used].iter().map(|t| t.abs()).sum();
    let rounding = ROUNDING_FACTOR * f64::EPSILON * abs_total;

    let kappa = scale * sum;
    let positive = sum.is_finite() && sum > 0.0;
    let regime = if !positive || (overflow && !converged) || err + rounding > config.asymptotic_tol * sum.abs() {
        SeriesRegime::Diverging
    } else if converged {
        SeriesRegime::ConvergentLike
    } else {
        SeriesRegime::AsymptoticTruncated
    };
    let diagnostics = SeriesDiagnostics {
        terms_used: used,
        terms_evaluated: terms.len(),
        min_term_index: min_idx,
        min_term_abs: scale * min_abs,
        error_estimate: scale * err,
        rounding_error: scale * rounding,
        converged: regime == SeriesRegime::ConvergentLike,
        regime,
    };
    Ok((kappa, diagnostics))
}

/// ψ(τ, y) from its Bessel-mode expansion, summed like [`kappa_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSeries {
    pub value: f64,
    pub error_estimate: f64,
    pub terms_used: usize,
    pub min_term_index: usize,
    /// Terms were still shrinking by `rel_tol` when the sum stopped.
    pub converged: bool,
}

/// n-th mode a_n (y/2)^{1/2} I_{2n−½}(y) e^{E_n τ} of ψ.
pub fn psi_term(n: u32, y: f64, tau: f64, alpha: f64) -> Result<f64> {
    let order = 2.0 * f64::from(n) - 0.5;
    let i = crate::specfun::bessel_i(order, y, TERM_TOL)?;
    Ok(coeff_a(n) * (0.5 * y).sqrt() * i.value * (energy_e(n, alpha) * tau).exp())
}

/// ψ(τ, y) = Σ a_n (y/2)^{1/2} I_{2n−½}(y) e^{E_n τ}, truncated at the
/// smallest term (half of which is added) unless the terms converge first.
pub fn psi_series(y: f64, tau: f64, alpha: f64, max_terms: usize, rel_tol: f64) -> Result<PsiSeries> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(domain(format!("y must be positive, got {y}")));
    }
    if !(tau >= 0.0 && alpha > 0.0) {
        return Err(domain("need tau >= 0 and alpha > 0"));
    }
    let mut terms: Vec<f64> = Vec::new();
    let mut partial = 0.0;
    let mut small_run = 0u8;
    let mut converged = false;
    for n in 0..max_terms.max(1) as u32 {
        let t = psi_term(n, y, tau, alpha)?;
        if !t.is_finite() {
            break;
        }
        terms.push(t);
        partial += t;
        if n >= 1 && t.abs() <= rel_tol * partial.abs() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 2 {
            converged = true;
            break;
        }
        if n >= 3 {
            let (k, m) = min_term(&terms);
            if (n as usize) >= k + 2 && t.abs() > 1e8 * m {
                break;
            }
        }
    }
    if terms.is_empty() {
        return Err(Error::Accuracy(String::from("first psi mode overflowed")));
    }
    let (min_idx, min_abs) = min_term(&terms);
    let last = terms.len() - 1;
    if converged || min_idx == last {
        return Ok(PsiSeries {
            value: terms.iter().sum(),
            error_estimate: terms[last].abs(),
            terms_used: terms.len(),
            min_term_index: min_idx,
            converged,
        });
    }
    let head: f64 = terms[..min_idx].iter().sum();
    Ok(PsiSeries {
        value: head + 0.5 * terms[min_idx],
        error_estimate: min_abs,
        terms_used: min_idx + 1,
        min_term_index: min_idx,
        converged: false,
    })
}

// Smallest |term| over n ≥ 1 (index 0 is the leading term, never a
// truncation point; its ₁F₁ factor can vanish by accident).
fn min_term(terms: &[f64]) -> (usize, f64) {
    if terms.len() == 1 {
        return (0, terms[0].abs());
    }
    let mut best = (1, terms[1].abs());
    for (i, t) in terms.iter().enumerate().skip(2) {
        if t.abs() < best.1 {
            best = (i, t.abs());
        }
    }
    best
}

/// Assembles a [`PricingResult`]: `notional · df · (κ − K)`.
pub fn fair_value(kappa: f64, contract: &SwapContract, df: f64, diagnostics: SeriesDiagnostics) -> PricingResult {
    let mut warnings = Vec::new();
    match diagnostics.regime {
        SeriesRegime::ConvergentLike => {}
        SeriesRegime::AsymptoticTruncated => warnings.push(String::from("SERIES_ASYMPTOTIC_TRUNCATED")),
        SeriesRegime::Diverging => warnings.push(String::from("SERIES_DIVERGING")),
    }
    if kappa < 0.0 {
        warnings.push(String::from("NEGATIVE_KAPPA"));
    }
    PricingResult {
        kappa,
        fair_value: contract.notional() * df * (kappa - contract.strike()),
        discount_factor: df,
        strike: contract.strike(),
        notional: contract.notional(),
        diagnostics,
        warnings,
    }
}

/// Series κ, discounting to the payment date, and fair value in one call.
pub fn price_swap(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    curve: &DiscountCurve,
    config: &SeriesConfig,
) -> Result<PricingResult> {
    let (kappa, diag) = kappa_series(state, params, contract, config)?;
    let df = discount_factor(curve, state.t, contract)?;
    Ok(fair_value(kappa, contract, df, diag))
}

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() && z > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("z must be positive and finite, got {z}")))
    }
}

/// J₀ = ∫₀^∞ e^{−y²/z} (1 − √π F₀(y)) / y² dy in terms of erfi:
/// `−(π/2) { erfi(√z/2) + (2/√(πz)) (1 − e^{z/4}) }`.
pub fn j0_closed_form(z: f64) -> Result<f64> {
    check_z(z)?;
    let root = z.sqrt();
    let bracket = erfi(0.5 * root)? - 2.0 / (PI * z).sqrt() * (0.25 * z).exp_m1();
    Ok(-0.5 * PI * bracket)
}

/// The same J₀ as `(√π/2) (z/4)^{−1/2} (₁F₁(−½; ½; z/4) − 1)`.
pub fn j0_hypergeometric_form(z: f64) -> Result<f64> {
    check_z(z)?;
    let zeta = 0.25 * z;
    // ₁F₁(−½; ½; ζ) − 1 summed without the leading 1 to avoid cancellation
    // at small ζ: Σ_{m≥1} −ζ^m / (m! (2m−1)).
    let f_minus_one = if zeta < 1.0 {
        let mut power = 1.0;
        let mut acc = 0.0;
        let mut m = 1.0;
        loop {
            power *= zeta / m;
            let t = -power / (2.0 * m - 1.0);
            acc += t;
            if t.abs() <= 1e-17 * acc.abs() {
                break;
            }
            m += 1.0;
        }
        acc
    } else {
        kummer_1f1(-0.5, 0.5, zeta, TERM_TOL)?.value - 1.0
    };
    Ok(0.5 * PI.sqrt() / zeta.sqrt() * f_minus_one)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JInfinity {
    pub value: f64,
    /// A term overflowed; `value` holds the sum before it.
    pub diverged: bool,
}

/// J∞ = Σ_{n=1}^{n_max} (−1)^{n+1} Γ(n−½)² / (4 n! Γ(2n−½)) e^{E_n τ}
/// (z/4)^{n−½} ₁F₁(n−½; 2n+½; z/4).
///
/// The gamma factors are taken in floating point here, independently of
/// the exact b_n used by [`kappa_series`].
pub fn j_infinity(z: f64, tau: f64, alpha: f64, n_max: u32) -> Result<JInfinity> {
    check_z(z)?;
    if !(tau >= 0.0) || !(alpha > 0.0) {
        return Err(domain("j_infinity needs tau >= 0 and alpha > 0"));
    }
    let zeta = 0.25 * z;
    let mut acc = 0.0;
    let mut factorial = 1.0;
    for n in 1..=n_max {
        let nf = f64::from(n);
        factorial *= nf;
        let g1 = gamma_half_integer(2 * i64::from(n) - 1)?.to_f64();
        let g2 = gamma_half_integer(4 * i64::from(n) - 1)?.to_f64();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let f = kummer_1f1(nf - 0.5, 2.0 * nf + 0.5, zeta, TERM_TOL)?.value;
        let term = sign * g1 * g1 / (4.0 * factorial * g2) * (energy_e(n, alpha) * tau).exp() * zeta.powf(nf - 0.5) * f;
        if !term.is_finite() {
            return Ok(JInfinity {
                value: acc,
                diverged: true,
            });
        }
        acc += term;
    }
    Ok(JInfinity {
        value: acc,
        diverged: false,
    })
}

/// κ reassembled as `(√ν/T) {1 + √(z/π) (J₀ + J∞)}` with J∞ cut at `n_max`.
pub fn kappa_from_components(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    n_max: u32,
) -> Result<f64> {
    let vars = series_variables(state, params, contract)?;
    let j0 = j0_hypergeometric_form(vars.z)?;
    let jinf = j_infinity(vars.z, vars.tau, params.alpha(), n_max)?;
    if jinf.diverged {
        return Err(Error::Accuracy(String::from("J-infinity term overflowed")));
    }
    Ok(state.nu.sqrt() / contract.tenor() * (1.0 + (vars.z / PI).sqrt() * (j0 + jinf.value)))
}

/// `true` when `b_n` has sign (−1)^{n+1} (n ≥ 2) in exact arithmetic.
pub fn coeff_b_sign_matches(n: u32) -> bool {
    let b = coeff_b_exact(n);
    if n % 2 == 0 {
        b.is_negative()
    } else {
        b.is_positive()
    }
}
