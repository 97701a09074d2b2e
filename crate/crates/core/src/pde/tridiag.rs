use alloc::vec::Vec;

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` by
/// the Thomas algorithm. `lower[0]` and `upper[n-1]` are ignored. The
/// solution overwrites `rhs`.
pub(crate) fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
}
