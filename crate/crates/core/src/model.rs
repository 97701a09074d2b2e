//! Contract, model and market value types.
//!
//! `beta` and `rho` are carried on [`SabrParams`] so a full SABR parameter
//! set can be passed around, but neither enters the volatility-swap value:
//! only the volatility leg `dσ = α σ dZ` matters.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::series::SeriesDiagnostics;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SabrParams {
    alpha: f64,
    beta: f64,
    rho: f64,
}

impl SabrParams {
    /// Validates `alpha > 0`, `beta == 1` and `rho ∈ [−1, 1]`.
    pub fn new(alpha: f64, beta: f64, rho: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("vol-of-vol must be positive and finite, got {alpha}"),
            });
        }
        if beta != 1.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("only beta = 1 is supported, got {beta}"),
            });
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("correlation must lie in [-1, 1], got {rho}"),
            });
        }
        Ok(Self { alpha, beta, rho })
    }

    /// β = 1, ρ = 0.
    pub fn lognormal(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Inert: never used by any valuation routine.
    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Accrual window `[t0, t0 + tenor]`, volatility strike and notional
/// (currency per volatility point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapContract {
    t0: f64,
    tenor: f64,
    strike: f64,
    notional: f64,
}

impl SwapContract {
    pub fn new(t0: f64, tenor: f64, strike: f64, notional: f64) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t0",
                reason: format!("start time must be finite, got {t0}"),
            });
        }
        if !(tenor.is_finite() && tenor > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tenor",
                reason: format!("tenor must be positive, got {tenor}"),
            });
        }
        if !(strike.is_finite() && strike >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "strike",
                reason: format!("strike must be non-negative, got {strike}"),
            });
        }
        if !notional.is_finite() {
            return Err(Error::InvalidParameter {
                name: "notional",
                reason: format!("notional must be finite, got {notional}"),
            });
        }
        Ok(Self {
            t0,
            tenor,
            strike,
            notional,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tenor(&self) -> f64 {
        self.tenor
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn notional(&self) -> f64 {
        self.notional
    }

    pub fn maturity(&self) -> f64 {
        self.t0 + self.tenor
    }

    /// τ = t0 + T − t.
    pub fn time_to_maturity(&self, t: f64) -> f64 {
        self.maturity() - t
    }
}

/// State at valuation time `t`: instantaneous volatility and the variance
/// accrued since `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    pub t: f64,
    pub sigma: f64,
    /// ν_t = ∫_{t0}^{t} σ_s² ds
    pub nu: f64,
}

impl MarketState {
    pub fn new(t: f64, sigma: f64, nu: f64) -> Self {
        Self { t, sigma, nu }
    }
}

/// Invariant violations reported by [`validate_state`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    NonFinite,
    BeforeAccrualStart,
    AfterMaturity,
    SigmaNonPositive,
    NuNegative,
    NuZeroSeriesSingular,
}

impl Violation {
    pub fn code(self) -> &'static str {
        match self {
            Violation::NonFinite => "NON_FINITE_INPUT",
            Violation::BeforeAccrualStart => "BEFORE_ACCRUAL_START",
            Violation::AfterMaturity => "AFTER_MATURITY",
            Violation::SigmaNonPositive => "SIGMA_NON_POSITIVE",
            Violation::NuNegative => "NU_NEGATIVE",
            Violation::NuZeroSeriesSingular => "NU_ZERO_SERIES_SINGULAR",
        }
    }
}

/// Sign and range checks only. Whether ν_t is attainable from the
/// (unknown) past path is not checked.
pub fn validate_state(state: &MarketState, _params: &SabrParams, contract: &SwapContract) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(state.t.is_finite() && state.sigma.is_finite() && state.nu.is_finite()) {
        out.push(Violation::NonFinite);
        return out;
    }
    if state.t < contract.t0() {
        out.push(Violation::BeforeAccrualStart);
    }
    if state.t > contract.maturity() {
        out.push(Violation::AfterMaturity);
    }
    if state.sigma <= 0.0 {
        out.push(Violation::SigmaNonPositive);
    }
    if state.nu < 0.0 {
        out.push(Violation::NuNegative);
    } else if state.nu == 0.0 {
        out.push(Violation::NuZeroSeriesSingular);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscountCurve {
    /// Continuously compounded flat rate.
    FlatRate(f64),
    /// A zero-coupon price supplied directly, in (0, 1].
    ExplicitFactor(f64),
}

impl DiscountCurve {
    pub fn flat(rate: f64) -> Result<Self> {
        if rate.is_finite() {
            Ok(DiscountCurve::FlatRate(rate))
        } else {
            Err(Error::InvalidParameter {
                name: "rate",
                reason: format!("rate must be finite, got {rate}"),
            })
        }
    }

    pub fn explicit(factor: f64) -> Result<Self> {
        if factor > 0.0 && factor <= 1.0 {
            Ok(DiscountCurve::ExplicitFactor(factor))
        } else {
            Err(Error::InvalidParameter {
                name: "discount_factor",
                reason: format!("explicit discount factor must lie in (0, 1], got {factor}"),
            })
        }
    }
}

/// Discount factor from `t` to the payment date `t0 + tenor`.
pub fn discount_factor(curve: &DiscountCurve, t: f64, contract: &SwapContract) -> Result<f64> {
    if t > contract.maturity() {
        return Err(domain(format!(
            "valuation time {t} is after the payment date {}",
            contract.maturity()
        )));
    }
    Ok(match *curve {
        DiscountCurve::FlatRate(r) => (-r * (contract.maturity() - t)).exp(),
        DiscountCurve::ExplicitFactor(p) => p,
    })
}

/// Priced swap. `fair_value` is exactly `notional * discount_factor * (kappa - strike)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    pub kappa: f64,
    pub fair_value: f64,
    pub discount_factor: f64,
    pub strike: f64,
    pub notional: f64,
    pub diagnostics: SeriesDiagnostics,
    pub warnings: Vec<String>,
}
