use alloc::format;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::gamma::ln_gamma;
use super::{check_tol, SeriesEvalReport, StopRule, MAX_SERIES_TERMS};
use crate::error::{domain, Result};

/// Above this argument the large-z asymptotic form is tried first.
pub const KUMMER_ASYMPTOTIC_SWITCH: f64 = 40.0;

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Confluent hypergeometric function ₁F₁(a; b; z) for z ≥ 0.
///
/// Below [`KUMMER_ASYMPTOTIC_SWITCH`] the defining power series is summed by
/// term recurrence. Above it, the expansion
/// `Γ(b)/Γ(a) · e^z z^{a−b} Σ (b−a)_k (1−a)_k / (k! z^k)` is used when it
/// reaches `rel_tol` before its terms start growing; otherwise the power
/// series is used there too (it has no cancellation for z ≥ 0 and a > 0).
pub fn kummer_1f1(a: f64, b: f64, z: f64, rel_tol: f64) -> Result<SeriesEvalReport> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(domain(format!("1F1 needs finite inputs, got ({a}, {b}, {z})")));
    }
    if is_non_positive_integer(b) {
        return Err(domain(format!("1F1 undefined for b = {b} (non-positive integer)")));
    }
    if z < 0.0 {
        return Err(domain(format!("1F1 implemented for z >= 0 only, got {z}")));
    }
    check_tol(rel_tol)?;

    if z >= KUMMER_ASYMPTOTIC_SWITCH && !is_non_positive_integer(a) {
        if let Some(report) = asymptotic(a, b, z, rel_tol) {
            return Ok(report);
        }
    }
    Ok(power_series(a, b, z, rel_tol))
}

fn power_series(a: f64, b: f64, z: f64, rel_tol: f64) -> SeriesEvalReport {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut stop = StopRule::default();
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        term *= (a + mf) / (b + mf) * z / (mf + 1.0);
        sum += term;
        m += 1;
        if stop.small(term, sum, rel_tol) || term == 0.0 {
            return SeriesEvalReport {
                value: sum,
                terms_used: m + 1,
                last_term_abs: term.abs(),
                converged: sum.is_finite(),
            };
        }
        if m >= MAX_SERIES_TERMS || !sum.is_finite() {
            return SeriesEvalReport {
                value: sum,
                terms_used: m + 1,
                last_term_abs: term.abs(),
                converged: false,
            };
        }
    }
}

fn asymptotic(a: f64, b: f64, z: f64, rel_tol: f64) -> Option<SeriesEvalReport> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0usize;
    let mut converged = false;
    while k < 200 {
        let kf = k as f64;
        let next = term * (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * z);
        if next.abs() >= term.abs() && next != 0.0 {
            // terms started growing before reaching the tolerance
            break;
        }
        term = next;
        sum += term;
        k += 1;
        if term.abs() <= rel_tol * sum.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let (lg_b, s_b) = ln_gamma(b);
    let (lg_a, s_a) = ln_gamma(a);
    // The recessive branch Γ(b)/Γ(b−a)·z^{−a} is dropped; make sure that is
    // within tolerance relative to the dominant one.
    let (lg_ba, _) = ln_gamma(b - a);
    let log_dominant = lg_b - lg_a + z + (a - b) * z.ln();
    let log_recessive = lg_b - lg_ba - a * z.ln();
    if log_recessive - log_dominant > rel_tol.ln() {
        return None;
    }
    let value = s_b * s_a * log_dominant.exp() * sum;
    Some(SeriesEvalReport {
        value,
        terms_used: k + 1,
        last_term_abs: (term * value / sum).abs(),
        converged: value.is_finite(),
    })
}
