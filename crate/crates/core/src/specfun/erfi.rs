use alloc::format;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{domain, Result};

/// Below this |x| the Maclaurin series is used; above it the asymptotic
/// expansion of e^{−x²}·erfi(x).
const SERIES_LIMIT: f64 = 6.0;

/// Imaginary error function erfi(x) = (2/√π) ∫₀ˣ e^{s²} ds.
pub fn erfi(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("erfi needs a finite argument, got {x}")));
    }
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        maclaurin(ax)
    } else {
        asymptotic(ax)
    };
    Ok(if x < 0.0 { -v } else { v })
}

// (2/√π) Σ x^{2k+1} / (k! (2k+1)); all terms positive.
fn maclaurin(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x; // x^{2k+1}/k!
    let mut sum = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        power *= x2 / k;
        let term = power / (2.0 * k + 1.0);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

// erfi(x) ~ e^{x²}/(x√π) Σ_k (2k−1)!! / (2x²)^k, truncated at its smallest term.
fn asymptotic(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let next = term * (2.0 * k - 1.0) * inv;
        if next >= term || next <= 1e-17 * sum {
            break;
        }
        term = next;
        sum += term;
    }
    // e^{x²} overflows near x = 26.6; split the exponent to delay it.
    let half = (0.5 * x * x).exp();
    half * (half * sum / (x * PI.sqrt()))
}
