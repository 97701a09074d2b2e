use alloc::format;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::gamma::{gamma_half_integer, ln_gamma};
use super::{check_tol, SeriesEvalReport, StopRule, MAX_SERIES_TERMS};
use crate::error::{domain, Result};

/// Modified Bessel function of the first kind I_ν(y), y ≥ 0, from its
/// power series Σ (y/2)^{2m+ν} / (m! Γ(ν+m+1)).
///
/// Half-integer orders take Γ(ν+1) from the exact half-integer table.
pub fn bessel_i(order: f64, y: f64, rel_tol: f64) -> Result<SeriesEvalReport> {
    if !(order.is_finite() && y.is_finite()) {
        return Err(domain(format!("bessel_i needs finite inputs, got ({order}, {y})")));
    }
    if y < 0.0 {
        return Err(domain(format!("bessel_i needs y >= 0, got {y}")));
    }
    if order <= -1.0 && order == order.floor() {
        return Err(domain(format!(
            "bessel_i order {order} is a negative integer; use I_{{-n}} = I_n"
        )));
    }
    check_tol(rel_tol)?;

    if y == 0.0 {
        let value = if order == 0.0 {
            1.0
        } else if order > 0.0 {
            0.0
        } else {
            return Err(domain(format!("I_{order}(y) is singular at y = 0")));
        };
        return Ok(SeriesEvalReport {
            value,
            terms_used: 1,
            last_term_abs: 0.0,
            converged: true,
        });
    }

    let half = 0.5 * y;
    let mut term = half.powf(order) / gamma_at_order_plus_one(order);
    let mut sum = term;
    let q = half * half;
    let mut stop = StopRule::default();
    let mut m = 0usize;
    loop {
        let mf = m as f64;
        term *= q / ((mf + 1.0) * (order + mf + 1.0));
        sum += term;
        m += 1;
        let done = stop.small(term, sum, rel_tol) || term == 0.0;
        if done || m >= MAX_SERIES_TERMS || !sum.is_finite() {
            return Ok(SeriesEvalReport {
                value: sum,
                terms_used: m + 1,
                last_term_abs: term.abs(),
                converged: done && sum.is_finite(),
            });
        }
    }
}

fn gamma_at_order_plus_one(order: f64) -> f64 {
    let twice = 2.0 * (order + 1.0);
    if twice == twice.round() && (twice as i64) % 2 != 0 && twice.abs() < 341.0 {
        if let Ok(g) = gamma_half_integer(twice as i64) {
            return g.to_f64();
        }
    }
    let (lg, sign) = ln_gamma(order + 1.0);
    sign * lg.exp()
}
