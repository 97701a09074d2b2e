//! Mechanized checks of the identities behind the series solution.
//!
//! Floating-point checks return a [`ResidualReport`]; the combinatorial
//! identity that fixes the terminal value is evaluated in exact rational
//! arithmetic. Series-based checks refuse to give a verdict
//! ([`Error::Inconclusive`]) once the requested truncation runs past the
//! index where the terms start to grow.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::model::{MarketState, SabrParams, SwapContract};
use crate::series::{coeff_a, coeff_b, energy_e, series_variables};
use crate::specfun::{bessel_i, gamma_half_integer, kummer_1f1};

const EVAL_TOL: f64 = 1e-16;
pub const BESSEL_EXPANSION_TOL: f64 = 1e-6;
pub const PSI_PDE_TOL: f64 = 1e-6;
pub const FUNCTIONAL_TERM_TOL: f64 = 1e-9;
pub const KUMMER_ODE_TOL: f64 = 1e-9;
pub const FD_TOL: f64 = 1e-5;

/// Exact rational number, always in lowest terms with a positive
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(domain("zero denominator"));
        }
        Ok(Self(BigRational::new(numer, denom)))
    }

    pub fn from_integer(n: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Add for ExactRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for ExactRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul for ExactRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Neg for ExactRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Outcome of a floating-point identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub point: String,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    /// `|residual| / scale ≤ tolerance`
    pub pass: bool,
}

impl ResidualReport {
    fn new(point: String, residual: f64, scale: f64, tolerance: f64) -> Self {
        let scale = if scale > 0.0 { scale } else { f64::MIN_POSITIVE };
        let pass = residual.is_finite() && residual.abs() / scale <= tolerance;
        Self {
            point,
            residual,
            scale,
            tolerance,
            pass,
        }
    }

    pub fn relative(&self) -> f64 {
        self.residual.abs() / self.scale
    }
}

fn factorial(n: u32) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Σ_{0≤n≤s} (−1)^{n+1} (2n−½) Γ(n−½) / (n! (s−n)! Γ(s+n+½)), exactly.
///
/// Both gammas carry a single factor √π, so each ratio is rational. The sum
/// vanishes for every s ≥ 1; for s = 0 it is −1.
pub fn check_terminal_identity(s: u32) -> ExactRational {
    let s_i = i64::from(s);
    let mut sum = BigRational::zero();
    for n in 0..=s {
        let n_i = i64::from(n);
        let num = gamma_half_integer(2 * n_i - 1).expect("odd").rational();
        let den = gamma_half_integer(2 * (s_i + n_i) + 1).expect("odd").rational();
        let lead = BigRational::new(BigInt::from(4 * n_i - 1), BigInt::from(2));
        let fact = BigRational::from_integer(factorial(n) * factorial(s - n));
        let mut term = lead * num / (den * fact);
        if n % 2 == 0 {
            term = -term;
        }
        sum += term;
    }
    ExactRational(sum)
}

/// The s = 0 sum times Γ(−½)/(2√π) = −1: the leading coefficient of κ,
/// which must be 1.
pub fn terminal_leading_coefficient() -> ExactRational {
    let gamma_ratio = gamma_half_integer(-1).expect("odd").rational() / BigRational::from_integer(BigInt::from(2));
    ExactRational(check_terminal_identity(0).0 * gamma_ratio)
}

/// Partial sum of y^{−1/2} = 2^{−1/2} Σ a_n I_{2n−½}(y) over `n_terms` terms.
pub fn check_bessel_sqrt_expansion(y: f64, n_terms: usize) -> Result<ResidualReport> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(domain(format!("y must be positive, got {y}")));
    }
    let mut sum = 0.0;
    for n in 0..n_terms as u32 {
        let i = bessel_i(2.0 * f64::from(n) - 0.5, y, EVAL_TOL)?;
        sum += coeff_a(n) * i.value;
    }
    sum *= core::f64::consts::FRAC_1_SQRT_2;
    let target = 1.0 / y.sqrt();
    Ok(ResidualReport::new(
        format!("y={y}, n_terms={n_terms}"),
        (sum - target).abs(),
        target,
        BESSEL_EXPANSION_TOL,
    ))
}

/// F, F′, F″ of F(y) = √(y/2) I_k(y), via I′ = (I_{k−1}+I_{k+1})/2 and
/// I″ = (I_{k−2} + 2I_k + I_{k+2})/4.
fn bessel_mode(k: f64, y: f64) -> Result<(f64, f64, f64)> {
    let i = |order: f64| bessel_i(order, y, EVAL_TOL).map(|r| r.value);
    let (im2, im1, i0, ip1, ip2) = (i(k - 2.0)?, i(k - 1.0)?, i(k)?, i(k + 1.0)?, i(k + 2.0)?);
    let d1 = 0.5 * (im1 + ip1);
    let d2 = 0.25 * (im2 + 2.0 * i0 + ip2);
    let root = (0.5 * y).sqrt();
    Ok((
        root * i0,
        root * (d1 + i0 / (2.0 * y)),
        root * (d2 + d1 / y - i0 / (4.0 * y * y)),
    ))
}

fn inconclusive_past_minimum(magnitudes: &[f64], what: &str) -> Result<()> {
    if magnitudes.len() < 3 {
        return Ok(());
    }
    let last = magnitudes.len() - 1;
    let (argmin, _) =
        magnitudes.iter().enumerate().skip(1).fold(
            (1, f64::INFINITY),
            |best, (i, &m)| if m < best.1 { (i, m) } else { best },
        );
    if argmin < last {
        return Err(Error::Inconclusive(format!(
            "{what}: terms grow after index {argmin}, requested {} terms",
            magnitudes.len()
        )));
    }
    Ok(())
}

/// Residual of −(2/α²)∂_tψ = y²∂²_yψ − y²ψ for the truncated mode sum
/// ψ = Σ a_n √(y/2) I_{2n−½}(y) e^{E_n τ}, differentiated term by term.
pub fn check_psi_pde_residual(tau: f64, y: f64, alpha: f64, n_terms: usize) -> Result<ResidualReport> {
    if !(tau >= 0.0 && y > 0.0 && alpha > 0.0) {
        return Err(domain("need tau >= 0, y > 0, alpha > 0"));
    }
    let a2 = alpha * alpha;
    let (mut lhs, mut rhs, mut scale) = (0.0, 0.0, 0.0);
    let mut magnitudes = Vec::with_capacity(n_terms);
    for n in 0..n_terms as u32 {
        let (f, _, f2) = bessel_mode(2.0 * f64::from(n) - 0.5, y)?;
        let w = coeff_a(n) * (energy_e(n, alpha) * tau).exp();
        // ∂_t = −∂_τ
        let l = (2.0 / a2) * energy_e(n, alpha) * w * f;
        let r = y * y * w * (f2 - f);
        lhs += l;
        rhs += r;
        scale += l.abs() + (y * y * w * f2).abs() + (y * y * w * f).abs();
        magnitudes.push((w * f).abs());
    }
    inconclusive_past_minimum(&magnitudes, "psi mode sum")?;
    Ok(ResidualReport::new(
        format!("tau={tau}, y={y}, alpha={alpha}, n_terms={n_terms}"),
        lhs - rhs,
        scale,
        PSI_PDE_TOL,
    ))
}

/// f, f′, f″ of f(ζ) = ₁F₁(a; b; ζ) with derivatives from
/// d/dζ ₁F₁(a; b; ζ) = (a/b) ₁F₁(a+1; b+1; ζ).
fn kummer_with_derivatives(a: f64, b: f64, z: f64) -> Result<(f64, f64, f64)> {
    let f0 = kummer_1f1(a, b, z, EVAL_TOL)?.value;
    let f1 = a / b * kummer_1f1(a + 1.0, b + 1.0, z, EVAL_TOL)?.value;
    let f2 = a * (a + 1.0) / (b * (b + 1.0)) * kummer_1f1(a + 2.0, b + 2.0, z, EVAL_TOL)?.value;
    Ok((f0, f1, f2))
}

/// z F″ − (z − b) F′ − a F, relative to max(1, |F|).
pub fn check_kummer_ode(a: f64, b: f64, z: f64) -> Result<ResidualReport> {
    let (f, f1, f2) = kummer_with_derivatives(a, b, z)?;
    let residual = z * f2 - (z - b) * f1 - a * f;
    Ok(ResidualReport::new(
        format!("a={a}, b={b}, z={z}"),
        residual,
        f.abs().max(1.0),
        KUMMER_ODE_TOL,
    ))
}

/// The n-th term of D_tκ and of ½α²σ²(∇ᵛ)²κ, per unit √ν/T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalTerm {
    pub horizontal: f64,
    /// With f″ from the contiguous relation.
    pub vertical: f64,
    /// With ζ²f″ replaced through Kummer's equation.
    pub vertical_kummer: f64,
    /// Sum of the magnitudes of the pieces, for relative comparisons.
    pub scale: f64,
}

/// Term n of both sides of D_tκ + ½α²σ²(∇ᵛ)²κ = 0, in units of √ν/T.
///
/// With g = ζⁿf_n, C = b_n e^{E_n τ}, ∂ν/∂t = σ² = 2α²νζ and ∇ᵛζ = 2ζ/σ:
/// D_t K = C[(α²ζ − E_n) g − 2α²ζ² g′], ½α²σ²(∇ᵛ)²K = α²ζ C (2ζ g″ + g′).
pub fn functional_term(n: u32, zeta: f64, tau: f64, alpha: f64) -> Result<FunctionalTerm> {
    let nf = f64::from(n);
    let (f, f1, f2) = kummer_with_derivatives(nf - 0.5, 2.0 * nf + 0.5, zeta)?;
    let a2 = alpha * alpha;
    let c = coeff_b(n) * (energy_e(n, alpha) * tau).exp();
    let zn = zeta.powi(n as i32);
    let g = zn * f;
    // g′ = ζ^{n−1}(ζ f′ + n f), g″ = ζ^{n−2}(ζ² f″ + 2nζ f′ + n(n−1) f)
    let g1 = zn * f1 + if n >= 1 { nf * zeta.powi(n as i32 - 1) * f } else { 0.0 };
    let mut g2 = zn * f2;
    if n >= 1 {
        g2 += 2.0 * nf * zeta.powi(n as i32 - 1) * f1;
    }
    if n >= 2 {
        g2 += nf * (nf - 1.0) * zeta.powi(n as i32 - 2) * f;
    }
    let h_a = c * (a2 * zeta - energy_e(n, alpha)) * g;
    let h_b = -c * 2.0 * a2 * zeta * zeta * g1;
    let v_a = a2 * zeta * c * 2.0 * zeta * g2;
    let v_b = a2 * zeta * c * g1;
    let vertical_kummer = 2.0 * a2 * c * zn * (zeta * zeta * f1 + (zeta + nf) * (nf - 0.5) * f);
    Ok(FunctionalTerm {
        horizontal: h_a + h_b,
        vertical: v_a + v_b,
        vertical_kummer,
        scale: h_a.abs() + h_b.abs() + v_a.abs() + v_b.abs(),
    })
}

/// Per-term residual |D_t K_n + ½α²σ²(∇ᵛ)² K_n| relative to the size of
/// its pieces.
pub fn check_functional_term(n: u32, zeta: f64, tau: f64, alpha: f64) -> Result<ResidualReport> {
    let t = functional_term(n, zeta, tau, alpha)?;
    Ok(ResidualReport::new(
        format!("n={n}, zeta={zeta}, tau={tau}, alpha={alpha}"),
        t.horizontal + t.vertical,
        t.scale,
        FUNCTIONAL_TERM_TOL,
    ))
}

/// Residual of D_tκ + ½α²σ²(∇ᵛ)²κ = 0 for the series truncated after
/// `n_terms` terms.
pub fn check_functional_residual(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    n_terms: usize,
) -> Result<ResidualReport> {
    let vars = series_variables(state, params, contract)?;
    let unit = state.nu.sqrt() / contract.tenor();
    let (mut total, mut scale) = (0.0, 0.0);
    let mut magnitudes = Vec::with_capacity(n_terms);
    for n in 0..n_terms as u32 {
        let t = functional_term(n, vars.zeta, vars.tau, params.alpha())?;
        total += t.horizontal + t.vertical;
        scale += t.scale;
        magnitudes.push(t.horizontal.abs());
    }
    inconclusive_past_minimum(&magnitudes, "functional series")?;
    Ok(ResidualReport::new(
        format!(
            "alpha={}, sigma={}, nu={}, tau={}, n_terms={n_terms}",
            params.alpha(),
            state.sigma,
            state.nu,
            vars.tau
        ),
        unit * total,
        unit * scale,
        FUNCTIONAL_TERM_TOL,
    ))
}

/// Analytic derivatives of the fixed-length series next to central
/// differences of the same truncated sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifferenceCheck {
    pub horizontal_analytic: f64,
    pub horizontal_fd: f64,
    /// (∇ᵛ)²κ, i.e. ∂²κ/∂σ² at fixed ν.
    pub vertical_analytic: f64,
    pub vertical_fd: f64,
    pub horizontal_rel_diff: f64,
    pub vertical_rel_diff: f64,
    pub pass: bool,
}

fn truncated_kappa(tau: f64, sigma: f64, nu: f64, alpha: f64, tenor: f64, n_terms: usize) -> Result<f64> {
    let zeta = sigma * sigma / (2.0 * alpha * alpha * nu);
    let mut sum = 0.0;
    for n in 0..n_terms as u32 {
        sum += crate::series::series_term(n, zeta, tau, alpha)?;
    }
    Ok(nu.sqrt() / tenor * sum)
}

/// Central differences with step `h`: D_t moves τ by ∓h and ν by ±σ²h,
/// the vertical derivative moves σ at fixed ν and τ.
pub fn functional_fd_crosscheck(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    n_terms: usize,
    h: f64,
) -> Result<FiniteDifferenceCheck> {
    let vars = series_variables(state, params, contract)?;
    if !(h > 0.0 && h < vars.tau && state.sigma * state.sigma * h < state.nu) {
        return Err(domain(format!("step {h} too large for this state")));
    }
    let alpha = params.alpha();
    let tenor = contract.tenor();
    let (tau, sigma, nu) = (vars.tau, state.sigma, state.nu);
    let k = |tau: f64, sigma: f64, nu: f64| truncated_kappa(tau, sigma, nu, alpha, tenor, n_terms);
    let s2 = sigma * sigma;
    let horizontal_fd = (k(tau - h, sigma, nu + s2 * h)? - k(tau + h, sigma, nu - s2 * h)?) / (2.0 * h);
    let vertical_fd = (k(tau, sigma + h, nu)? - 2.0 * k(tau, sigma, nu)? + k(tau, sigma - h, nu)?) / (h * h);

    let unit = nu.sqrt() / tenor;
    let (mut hz, mut vt) = (0.0, 0.0);
    for n in 0..n_terms as u32 {
        let t = functional_term(n, vars.zeta, tau, alpha)?;
        hz += t.horizontal;
        vt += t.vertical;
    }
    let horizontal_analytic = unit * hz;
    // ½α²σ²(∇ᵛ)²κ → (∇ᵛ)²κ
    let vertical_analytic = unit * vt / (0.5 * alpha * alpha * s2);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let horizontal_rel_diff = rel(horizontal_analytic, horizontal_fd);
    let vertical_rel_diff = rel(vertical_analytic, vertical_fd);
    Ok(FiniteDifferenceCheck {
        horizontal_analytic,
        horizontal_fd,
        vertical_analytic,
        vertical_fd,
        horizontal_rel_diff,
        vertical_rel_diff,
        pass: horizontal_rel_diff <= FD_TOL && vertical_rel_diff <= FD_TOL,
    })
}
