//! Monte Carlo oracle for κ_t and for the variance-swap expectation.
//!
//! Volatility paths use exact lognormal increments
//! `σ_{k+1} = σ_k exp(α√Δ ξ − α²Δ/2)`, and realized variance is the
//! trapezoidal rule on σ². Path `i` draws from its own ChaCha8 stream
//! (`seed`, stream `i`), blocks of [`BLOCK`] draws are reduced in a fixed
//! binary tree, so estimates are bit-identical for any number of workers.

mod normal;
mod stats;

use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub use normal::{inverse_normal_cdf, open_unit};
use stats::Moments;

use crate::error::{domain, Result};
use crate::model::{MarketState, SabrParams, SwapContract};

/// Draws per reduction block.
pub const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Self {
        Self {
            n_paths,
            n_steps,
            seed,
            antithetic: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(domain(format!("n_paths must be >= 2, got {}", self.n_paths)));
        }
        if self.n_steps < 1 {
            return Err(domain("n_steps must be >= 1"));
        }
        Ok(())
    }

    /// Independent draws: antithetic pairs count once.
    fn draws(&self) -> usize {
        if self.antithetic {
            self.n_paths.div_ceil(2)
        } else {
            self.n_paths
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation of the draws over √(number of draws).
    pub std_error: f64,
    /// Paths simulated.
    pub n_paths: usize,
}

/// The random stream for path (or antithetic pair) `index`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    inverse_normal_cdf(open_unit(rng.next_u64()))
}

/// σ at `n_steps + 1` equidistant times on `[0, horizon]`.
pub fn simulate_vol_path<R: RngCore>(
    params: &SabrParams,
    sigma_start: f64,
    horizon: f64,
    n_steps: usize,
    rng: &mut R,
) -> Vec<f64> {
    let step = Step::new(params.alpha(), horizon, n_steps);
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut s = sigma_start;
    out.push(s);
    for _ in 0..n_steps {
        s = step.advance(s, standard_normal(rng));
        out.push(s);
    }
    out
}

#[derive(Clone, Copy)]
struct Step {
    vol: f64,
    drift: f64,
    dt: f64,
    n: usize,
}

impl Step {
    fn new(alpha: f64, horizon: f64, n: usize) -> Self {
        let dt = horizon / n as f64;
        Self {
            vol: alpha * dt.sqrt(),
            drift: -0.5 * alpha * alpha * dt,
            dt,
            n,
        }
    }

    #[inline]
    fn advance(&self, s: f64, xi: f64) -> f64 {
        s * (self.vol * xi + self.drift).exp()
    }

    /// Trapezoidal ∫σ² along one path (or an antithetic pair).
    fn integrate<R: RngCore>(&self, sigma0: f64, rng: &mut R, antithetic: bool) -> (f64, f64) {
        let s2 = sigma0 * sigma0;
        let (mut a, mut b) = (sigma0, sigma0);
        let (mut acc_a, mut acc_b) = (0.5 * s2, 0.5 * s2);
        for k in 0..self.n {
            let xi = standard_normal(rng);
            a = self.advance(a, xi);
            let w = if k + 1 == self.n { 0.5 } else { 1.0 };
            acc_a += w * a * a;
            if antithetic {
                b = self.advance(b, -xi);
                acc_b += w * b * b;
            }
        }
        (acc_a * self.dt, acc_b * self.dt)
    }
}

fn check_state(state: &MarketState, contract: &SwapContract) -> Result<f64> {
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
    Ok(tau)
}

fn estimate<P>(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    config: &McConfig,
    payoff: P,
) -> Result<McEstimate>
where
    P: Fn(f64) -> f64 + Sync + Send,
{
    config.validate()?;
    let tau = check_state(state, contract)?;
    if tau == 0.0 {
        return Ok(McEstimate {
            mean: payoff(state.nu),
            std_error: 0.0,
            n_paths: 0,
        });
    }
    let step = Step::new(params.alpha(), tau, config.n_steps);
    let draws = config.draws();
    let blocks = draws.div_ceil(BLOCK);
    let block = |b: usize| {
        let mut m = Moments::default();
        for i in b * BLOCK..((b + 1) * BLOCK).min(draws) {
            let mut rng = path_rng(config.seed, i as u64);
            let (ia, ib) = step.integrate(state.sigma, &mut rng, config.antithetic);
            let x = if config.antithetic {
                0.5 * (payoff(state.nu + ia) + payoff(state.nu + ib))
            } else {
                payoff(state.nu + ia)
            };
            m.push(x);
        }
        m
    };
    let moments = reduce_blocks(blocks, block);
    let n = moments.n as f64;
    let var = if moments.n > 1 { moments.m2 / (n - 1.0) } else { 0.0 };
    Ok(McEstimate {
        mean: moments.mean,
        std_error: (var / n).sqrt(),
        n_paths: if config.antithetic { 2 * draws } else { draws },
    })
}

#[cfg(feature = "parallel")]
fn reduce_blocks<F: Fn(usize) -> Moments + Sync + Send>(blocks: usize, f: F) -> Moments {
    use rayon::prelude::*;
    let per_block: Vec<Moments> = (0..blocks).into_par_iter().map(f).collect();
    Moments::tree_reduce(&per_block)
}

#[cfg(not(feature = "parallel"))]
fn reduce_blocks<F: Fn(usize) -> Moments>(blocks: usize, f: F) -> Moments {
    let per_block: Vec<Moments> = (0..blocks).map(f).collect();
    Moments::tree_reduce(&per_block)
}

/// Sample estimate of κ_t = E[√(ν_t + ∫_t^{t0+T} σ² ds)] / T.
pub fn kappa_mc(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    config: &McConfig,
) -> Result<McEstimate> {
    let tenor = contract.tenor();
    estimate(state, params, contract, config, move |v| v.sqrt() / tenor)
}

/// Sample estimate of E[∫_{t0}^{t0+T} σ² ds | σ_t, ν_t].
pub fn variance_swap_mc(
    state: &MarketState,
    params: &SabrParams,
    contract: &SwapContract,
    config: &McConfig,
) -> Result<McEstimate> {
    estimate(state, params, contract, config, |v| v)
}

/// E[∫_{t0}^{t0+T} σ² ds | σ_t] = ν_t + σ_t² (e^{α²τ} − 1) / α².
pub fn variance_swap_expectation(state: &MarketState, params: &SabrParams, contract: &SwapContract) -> Result<f64> {
    let tau = check_state(state, contract)?;
    let a2 = params.alpha() * params.alpha();
    let x = a2 * tau;
    // (e^x − 1)/x
    let growth = if x < 1e-8 {
        1.0 + 0.5 * x + x * x / 6.0
    } else {
        x.exp_m1() / x
    };
    Ok(state.nu + state.sigma * state.sigma * tau * growth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn contract() -> SwapContract {
        SwapContract::new(0.0, 1.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn deterministic_limit_path_is_flat() {
        let p = SabrParams::lognormal(1e-14).unwrap();
        let mut rng = path_rng(7, 0);
        let path = simulate_vol_path(&p, 0.3, 1.0, 50, &mut rng);
        assert_eq!(path.len(), 51);
        for s in path {
            assert_relative_eq!(s, 0.3, max_relative = 1e-12);
        }
    }

    #[test]
    fn terminal_state_needs_no_simulation() {
        let p = SabrParams::lognormal(0.5).unwrap();
        let s = MarketState::new(1.0, 0.2, 0.05);
        let e = kappa_mc(&s, &p, &contract(), &McConfig::new(100, 10, 1)).unwrap();
        assert_eq!(e.mean, 0.05f64.sqrt());
        assert_eq!(e.std_error, 0.0);
        let v = variance_swap_mc(&s, &p, &contract(), &McConfig::new(100, 10, 1)).unwrap();
        assert_eq!(v.mean, 0.05);
    }

    #[test]
    fn variance_expectation_examples() {
        let c = contract();
        let s = MarketState::new(0.0, 0.2, 0.0);
        let p = SabrParams::lognormal(0.5).unwrap();
        let v = variance_swap_expectation(&s, &p, &c).unwrap();
        assert_relative_eq!(v, 0.04 * (0.25f64.exp() - 1.0) / 0.25, max_relative = 1e-14);
        let tiny = SabrParams::lognormal(1e-6).unwrap();
        let s = MarketState::new(0.5, 0.2, 0.01);
        assert_relative_eq!(
            variance_swap_expectation(&s, &tiny, &c).unwrap(),
            0.01 + 0.04 * 0.5,
            max_relative = 1e-11
        );
        let s = MarketState::new(1.0, 0.2, 0.01);
        assert_eq!(variance_swap_expectation(&s, &p, &c).unwrap(), 0.01);
    }

    #[test]
    fn rejects_bad_config_and_state() {
        let p = SabrParams::lognormal(0.5).unwrap();
        let s = MarketState::new(0.5, 0.2, 0.01);
        assert!(kappa_mc(&s, &p, &contract(), &McConfig::new(1, 10, 1)).is_err());
        assert!(kappa_mc(&s, &p, &contract(), &McConfig::new(10, 0, 1)).is_err());
        let early = MarketState::new(-0.5, 0.2, 0.01);
        assert!(kappa_mc(&early, &p, &contract(), &McConfig::new(10, 10, 1)).is_err());
    }

    #[test]
    fn same_seed_same_bits() {
        let p = SabrParams::lognormal(0.6).unwrap();
        let s = MarketState::new(0.5, 0.25, 0.03);
        let cfg = McConfig::new(5000, 20, 99);
        let a = kappa_mc(&s, &p, &contract(), &cfg).unwrap();
        let b = kappa_mc(&s, &p, &contract(), &cfg).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = kappa_mc(&s, &p, &contract(), &McConfig::new(5000, 20, 100)).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
