//! Special functions used by the series solution and its verification.
//!
//! Everything here is a pure function of its arguments. Series evaluations
//! stop once two consecutive terms fall below `rel_tol · |partial sum|`,
//! which keeps an even/odd oscillation in the terms from ending the sum
//! early.

mod bessel;
mod erfi;
mod gamma;
mod kummer;

pub use bessel::bessel_i;
pub use erfi::erfi;
pub use gamma::{gamma, gamma_half_integer, ln_gamma, HalfIntegerGamma};
pub use kummer::{kummer_1f1, KUMMER_ASYMPTOTIC_SWITCH};

/// Outcome of a truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEvalReport {
    pub value: f64,
    pub terms_used: usize,
    /// Magnitude of the last term that was added (or the truncation error
    /// estimate for an asymptotic expansion).
    pub last_term_abs: f64,
    pub converged: bool,
}

/// Hard cap on the number of terms any power series here may take.
pub(crate) const MAX_SERIES_TERMS: usize = 20_000;

/// Tracks the "two consecutive small terms" stopping rule.
#[derive(Debug, Default)]
pub(crate) struct StopRule {
    small_run: u8,
}

impl StopRule {
    pub(crate) fn small(&mut self, term: f64, sum: f64, rel_tol: f64) -> bool {
        if term.abs() <= rel_tol * sum.abs() {
            self.small_run += 1;
        } else {
            self.small_run = 0;
        }
        self.small_run >= 2
    }
}

pub(crate) fn check_tol(rel_tol: f64) -> crate::Result<()> {
    if rel_tol.is_finite() && rel_tol > 0.0 {
        Ok(())
    } else {
        Err(crate::error::domain(alloc::format!(
            "rel_tol must be positive and finite, got {rel_tol}"
        )))
    }
}
