//! Finite-difference reference pricer.
//!
//! With `y = √2 x σ / α` the Laplace transform `φ(t, σ, x) = E[exp(−x² ∫σ²)]`
//! becomes `ψ(t, y)`, which solves
//!
//! ```text
//! −(2/α²) ∂_t ψ = y² ∂²_y ψ − y² ψ,     ψ(t0+T, y) = 1.
//! ```
//!
//! The solver works with `w = 1 − ψ` in `u = ln y` and the rescaled time
//! `s = α² τ / 2`, where the equation reads `w_s = w_uu − w_u − e^{2u}(w − 1)`.
//! The log grid resolves both the `y → 0` layer (where `w ≈ c(s) y²`) and the
//! decay region in one sweep, and keeps the small quantity `w` free of
//! cancellation. Near `y = 0` the two-term expansion `w = c y² + d y⁴` is
//! used as the Dirichlet value; at `y_max` the value is `ψ = 0`.
//!
//! One ψ surface serves the whole x-integral, so κ costs one solve plus a
//! one-dimensional quadrature.

mod interp;
mod quad;
mod tridiag;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::model::{MarketState, SabrParams, SwapContract};
use interp::MonotoneCubic;

/// Largest deviation of ψ outside [0, 1] tolerated before the solve is
/// declared unstable.
pub const INSTABILITY_EPS: f64 = 1e-6;
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-8;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
const MIN_NODES: usize = 16;
const MAX_QUAD_PIECES: usize = 4000;
const QUAD_BREAKS: usize = 64;
/// Implicit-Euler start-up steps. Each removes the stiff reaction modes
/// (`y² Δs ≳ 1`) that Crank–Nicolson alone would carry as sign-alternating
/// overshoot; with eight (sixteen half steps) the overshoot stays below
/// [`INSTABILITY_EPS`] for any step size.
const START_STEPS: usize = 8;
/// ψ spreads in `ln y` like a diffusion over time `s`; `y_max` is widened by
/// `e^{Y_SPREAD √s}` to keep ψ(y_max/2) negligible.
const Y_SPREAD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Crank–Nicolson after implicit-Euler start-up steps, each taken as
    /// two half steps (Rannacher).
    #[default]
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Upper end of the y grid. `None` picks `2·max(√(20/s), 22)·e^{4√s}`
    /// with `s = α²τ/2`.
    pub y_max: Option<f64>,
    /// Intervals in `ln y`.
    pub n_y: usize,
    /// Time steps.
    pub n_t: usize,
    pub scheme: Scheme,
    /// Largest ψ allowed at `y_max/2` after the solve.
    pub boundary_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            y_max: None,
            n_y: 400,
            n_t: 400,
            scheme: Scheme::CrankNicolson,
            boundary_tol: DEFAULT_BOUNDARY_TOL,
        }
    }
}

impl GridSpec {
    pub fn new(n_y: usize, n_t: usize) -> Self {
        Self {
            n_y,
            n_t,
            ..Self::default()
        }
    }

    /// Both step sizes halved.
    pub fn refined(&self) -> Self {
        Self {
            n_y: 2 * self.n_y,
            n_t: 2 * self.n_t,
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_y < MIN_NODES || self.n_t < MIN_NODES {
            return Err(domain(format!(
                "grid needs n_y, n_t >= {MIN_NODES}, got ({}, {})",
                self.n_y, self.n_t
            )));
        }
        if let Some(y) = self.y_max {
            if !(y > 0.0 && y.is_finite()) {
                return Err(domain(format!("y_max must be positive, got {y}")));
            }
        }
        if !(self.boundary_tol > 0.0) {
            return Err(domain("boundary_tol must be positive"));
        }
        Ok(())
    }
}

/// Coefficients of `w(s, y) = c(s) y² + d(s) y⁴ + O(y⁶)`.
fn small_y_coefficients(s: f64) -> (f64, f64) {
    let c = 0.5 * (2.0 * s).exp_m1();
    // d = ½ Σ_{k≥2} (12^{k−1} − 2^{k−1}) s^k / (5 k!)
    let d = if 12.0 * s < 1.0 {
        let (mut p12, mut p2, mut sk, mut fact) = (12.0, 2.0, s * s, 2.0);
        let mut sum = 0.0;
        for k in 2..60u32 {
            let t = (p12 - p2) * sk / (5.0 * fact);
            sum += t;
            if t <= 1e-17 * sum {
                break;
            }
            p12 *= 12.0;
            p2 *= 2.0;
            sk *= s;
            fact *= (k + 1) as f64;
        }
        0.5 * sum
    } else {
        (12.0 * s).exp_m1() / 120.0 - (2.0 * s).exp_m1() / 20.0
    };
    (c, d)
}

/// ψ on the full (τ, y) grid, with level 0 at τ = 0 (time t0 + T).
#[derive(Debug, Clone)]
pub struct PsiSolution {
    alpha: f64,
    tau: f64,
    s: f64,
    u0: f64,
    du: f64,
    n_y: usize,
    n_t: usize,
    /// `w = 1 − ψ`, level-major.
    w: Vec<f64>,
    c: f64,
    d: f64,
    boundary_psi: f64,
    boundary_tol: f64,
    interp: MonotoneCubic,
}

impl PsiSolution {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn y_min(&self) -> f64 {
        self.u0.exp()
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.n_y)
    }

    pub fn y(&self, j: usize) -> f64 {
        (self.u0 + j as f64 * self.du).exp()
    }

    /// Time to maturity of stored level `i` (0 ≤ i ≤ n_t).
    pub fn tau_at(&self, i: usize) -> f64 {
        self.tau * i as f64 / self.n_t as f64
    }

    pub fn psi(&self, level: usize, j: usize) -> f64 {
        1.0 - self.w[level * (self.n_y + 1) + j]
    }

    /// `1 − ψ` at the final level, without cancellation for small y.
    pub fn one_minus_psi(&self, y: f64) -> f64 {
        if !(y > 0.0) {
            return 0.0;
        }
        let u = y.ln();
        if u <= self.u0 {
            let y2 = y * y;
            return y2 * self.d.mul_add(y2, self.c);
        }
        if u >= self.u0 + self.n_y as f64 * self.du {
            return 1.0;
        }
        self.interp.eval(u)
    }

    /// ψ(t, y) at the final level (y = 0 gives 1).
    pub fn psi_at(&self, y: f64) -> f64 {
        1.0 - self.one_minus_psi(y)
    }

    /// ψ at `y_max/2` on the final level.
    pub fn boundary_psi(&self) -> f64 {
        self.boundary_psi
    }

    pub fn boundary_tol(&self) -> f64 {
        self.boundary_tol
    }

    fn scale(&self) -> f64 {
        self.s
    }
}

fn auto_range(s: f64) -> (f64, f64) {
    let inv = if s > 0.0 { 1.0 / s.sqrt() } else { 1.0 };
    let y_min = 1e-4 * inv.min(1.0) * (-5.0 * s).exp();
    let y_max = 2.0 * (20f64.sqrt() * inv).max(22.0) * (Y_SPREAD * s.sqrt()).exp();
    (y_min, y_max)
}

/// Solves for ψ over `τ ∈ [0, tau]`.
pub fn solve_psi(alpha: f64, tau: f64, grid: &GridSpec) -> Result<PsiSolution> {
    grid.validate()?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(domain(format!("tau must be non-negative, got {tau}")));
    }
    let s_end = 0.5 * alpha * alpha * tau;
    let (y_min, auto_max) = auto_range(s_end);
    let y_max = grid.y_max.unwrap_or(auto_max);
    if !(y_max > 10.0 * y_min) {
        return Err(domain(format!("y_max = {y_max} leaves no room above y_min = {y_min}")));
    }
    let (n_y, n_t) = (grid.n_y, grid.n_t);
    let u0 = y_min.ln();
    let du = (y_max.ln() - u0) / n_y as f64;
    let width = n_y + 1;
    let mut w = vec![0.0; width * (n_t + 1)];

    if s_end > 0.0 {
        let y2: Vec<f64> = (0..width).map(|j| (2.0 * (u0 + j as f64 * du)).exp()).collect();
        let lo = 1.0 / (du * du) + 0.5 / du;
        let up = 1.0 / (du * du) - 0.5 / du;
        let mut stepper = Stepper {
            y2: &y2,
            lo,
            up,
            y_min2: y_min * y_min,
            lower: vec![0.0; n_y - 1],
            diag: vec![0.0; n_y - 1],
            upper: vec![0.0; n_y - 1],
            rhs: vec![0.0; n_y - 1],
            scratch: Vec::new(),
        };
        let ds = s_end / n_t as f64;
        // Level 0 is the terminal data ψ = 1 everywhere; the Dirichlet value
        // ψ(y_max) = 0 takes over from the first step.
        let mut cur = vec![0.0; width];
        for i in 0..n_t {
            let s0 = i as f64 * ds;
            match grid.scheme {
                Scheme::CrankNicolson if i < START_STEPS => {
                    stepper.step(&mut cur, s0, 0.5 * ds, 1.0);
                    stepper.step(&mut cur, s0 + 0.5 * ds, 0.5 * ds, 1.0);
                }
                Scheme::CrankNicolson => stepper.step(&mut cur, s0, ds, 0.5),
            }
            for (j, &v) in cur.iter().enumerate() {
                if !(-INSTABILITY_EPS..=1.0 + INSTABILITY_EPS).contains(&v) {
                    return Err(Error::Instability {
                        value: 1.0 - v,
                        time_index: i + 1,
                        space_index: j,
                    });
                }
            }
            w[(i + 1) * width..(i + 2) * width].copy_from_slice(&cur);
        }
    }

    let last = w[n_t * width..].to_vec();
    let interp = MonotoneCubic::new(u0, du, last);
    let (c, d) = small_y_coefficients(s_end);
    let mut sol = PsiSolution {
        alpha,
        tau,
        s: s_end,
        u0,
        du,
        n_y,
        n_t,
        w,
        c,
        d,
        boundary_psi: 0.0,
        boundary_tol: grid.boundary_tol,
        interp,
    };
    if s_end > 0.0 {
        sol.boundary_psi = sol.psi_at(0.5 * y_max);
        if !(sol.boundary_psi < grid.boundary_tol) {
            return Err(Error::Accuracy(format!(
                "psi(y_max/2) = {:e} exceeds boundary_tol {:e}; increase y_max",
                sol.boundary_psi, grid.boundary_tol
            )));
        }
    }
    Ok(sol)
}

struct Stepper<'a> {
    y2: &'a [f64],
    lo: f64,
    up: f64,
    y_min2: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper<'_> {
    /// One θ-scheme step of `w_s = w_uu − w_u − y²w + y²` from `s0` to `s0 + dt`.
    fn step(&mut self, w: &mut [f64], s0: f64, dt: f64, theta: f64) {
        let n = w.len() - 1;
        let (lo, up) = (self.lo, self.up);
        let mid = -(lo + up);
        let explicit = (1.0 - theta) * dt;
        let implicit = theta * dt;
        for i in 1..n {
            let di = mid - self.y2[i];
            let aw = lo * w[i - 1] + di * w[i] + up * w[i + 1];
            self.rhs[i - 1] = w[i] + explicit * aw + dt * self.y2[i];
            self.lower[i - 1] = -implicit * lo;
            self.diag[i - 1] = 1.0 - implicit * di;
            self.upper[i - 1] = -implicit * up;
        }
        let (c, d) = small_y_coefficients(s0 + dt);
        let w_low = self.y_min2 * d.mul_add(self.y_min2, c);
        self.rhs[0] += implicit * lo * w_low;
        self.rhs[n - 2] += implicit * up;
        tridiag::solve(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch);
        w[0] = w_low;
        w[1..n].copy_from_slice(&self.rhs);
        w[n] = 1.0;
    }
}

/// κ from the quadrature together with its error budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaQuadrature {
    pub kappa: f64,
    /// Kronrod error estimate of the x-integral, in κ units.
    pub quad_error: f64,
    /// Bound on the part of the tail not captured by treating ψ as 0 above
    /// `y_max`, in κ units.
    pub tail_bound: f64,
    pub evaluations: usize,
}

fn check_inputs(state: &MarketState, params: &SabrParams, contract: &SwapContract) -> Result<f64> {
    let tau = contract.time_to_maturity(state.t);
    if !(tau >= 0.0 && tau <= contract.tenor()) {
        return Err(domain(format!(
            "valuation time {} outside the accrual window [{}, {}]",
            state.t,
            contract.t0(),
            contract.maturity()
        )));
    }
    if !(state.sigma > 0.0 && state.sigma.is_finite()) {
        return Err(domain(format!("sigma must be positive, got {}", state.sigma)));
    }
    if !(state.nu >= 0.0 && state.nu.is_finite()) {
        return Err(domain(format!("nu must be non-negative, got {}", state.nu)));
    }
    let _ = params;
    Ok(tau)
}

/// κ_t by the square-root quadrature over a ψ surface. `psi` must have been
/// solved with `params.alpha()` and the state's time to maturity.
pub fn kappa_from_psi(
    psi: &PsiSolution,
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    quad_tol: f64,
) -> Result<KappaQuadrature> {
    let tau = check_inputs(state, params, contract)?;
    if !(quad_tol > 0.0) {
        return Err(domain(format!("quad_tol must be positive, got {quad_tol}")));
    }
    if psi.alpha != params.alpha() || psi.tau != tau {
        return Err(domain("psi surface was solved for a different alpha or tau"));
    }
    let tenor = contract.tenor();
    let nu = state.nu;
    if psi.scale() == 0.0 {
        return Ok(KappaQuadrature {
            kappa: nu.sqrt() / tenor,
            quad_error: 0.0,
            tail_bound: 0.0,
            evaluations: 0,
        });
    }
    let norm = 1.0 / (tenor * core::f64::consts::PI.sqrt());
    let k = core::f64::consts::SQRT_2 * state.sigma / params.alpha();
    let x_min = psi.y_min() / k;
    let x_cut = psi.y_max() / k;

    // [0, x_min]: integrand expanded to O(x²).
    let (c, d) = (psi.c, psi.d);
    let ck2 = c * k * k;
    let head = (nu + ck2) * x_min + x_min.powi(3) / 3.0 * (d * k.powi(4) - 0.5 * nu * nu - nu * ck2);
    // (x_cut, ∞): ψ taken as 0, so the integrand is exactly 1/x².
    let tail = 1.0 / x_cut;
    let tail_bound = norm * 2.0 * psi.boundary_psi / x_cut;
    if tail_bound > quad_tol {
        return Err(Error::Accuracy(format!(
            "tail bound {tail_bound:e} exceeds quad_tol {quad_tol:e}"
        )));
    }

    let ratio = (x_cut / x_min).ln() / QUAD_BREAKS as f64;
    let breaks: Vec<f64> = (0..=QUAD_BREAKS)
        .map(|i| match i {
            0 => x_min,
            i if i == QUAD_BREAKS => x_cut,
            i => x_min * (ratio * i as f64).exp(),
        })
        .collect();
    let integrand = |x: f64| {
        let a = x * x * nu;
        let e = (-a).exp();
        (-(-a).exp_m1() + e * psi.one_minus_psi(k * x)) / (x * x)
    };
    let budget = 0.5 * (quad_tol - tail_bound) / norm;
    let body = quad::integrate(integrand, &breaks, budget, MAX_QUAD_PIECES);
    let quad_error = norm * body.error;
    if quad_error > quad_tol {
        return Err(Error::Accuracy(format!(
            "quadrature error {quad_error:e} exceeds quad_tol {quad_tol:e}"
        )));
    }
    Ok(KappaQuadrature {
        kappa: norm * (head + body.value + tail),
        quad_error,
        tail_bound,
        evaluations: body.evaluations,
    })
}

/// κ_t = (1/(T√π)) ∫₀^∞ [1 − e^{−x²ν} ψ(t, √2 xσ/α)] / x² dx.
pub fn kappa_quadrature(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    grid: &GridSpec,
    quad_tol: f64,
) -> Result<f64> {
    kappa_quadrature_detailed(state, params, contract, grid, quad_tol).map(|q| q.kappa)
}

pub fn kappa_quadrature_detailed(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    grid: &GridSpec,
    quad_tol: f64,
) -> Result<KappaQuadrature> {
    let tau = check_inputs(state, params, contract)?;
    let psi = solve_psi(params.alpha(), tau, grid)?;
    kappa_from_psi(&psi, state, params, contract, quad_tol)
}

/// κ on successively halved grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub grids: Vec<GridSpec>,
    pub kappas: Vec<f64>,
    /// `(κ_i − κ_{i+1}) / (κ_{i+1} − κ_{i+2})`; close to 4 for a
    /// second-order scheme.
    pub ratios: Vec<f64>,
}

impl Refinement {
    /// Richardson extrapolation of the two finest values.
    pub fn extrapolated(&self) -> f64 {
        let n = self.kappas.len();
        if n < 2 {
            return self.kappas[n - 1];
        }
        let (a, b) = (self.kappas[n - 2], self.kappas[n - 1]);
        b + (b - a) / 3.0
    }

    /// Difference of the two finest values.
    pub fn last_change(&self) -> f64 {
        let n = self.kappas.len();
        if n < 2 {
            return 0.0;
        }
        (self.kappas[n - 1] - self.kappas[n - 2]).abs()
    }
}

/// Solves on `base` and `levels` successive halvings of both steps.
pub fn refinement_study(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    base: &GridSpec,
    levels: usize,
    quad_tol: f64,
) -> Result<Refinement> {
    let mut grids = vec![*base];
    for _ in 0..levels {
        let next = grids[grids.len() - 1].refined();
        grids.push(next);
    }
    let kappas = grids
        .iter()
        .map(|g| kappa_quadrature(state, params, contract, g, quad_tol))
        .collect::<Result<Vec<f64>>>()?;
    let ratios = kappas.windows(3).map(|k| (k[0] - k[1]) / (k[1] - k[2])).collect();
    Ok(Refinement { grids, kappas, ratios })
}
