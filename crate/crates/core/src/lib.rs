//! Fair value of volatility swaps when the instantaneous volatility follows a
//! driftless lognormal process `dσ = α σ dZ` (the SABR volatility leg with
//! β = 1).
//!
//! The crate evaluates the expected annualized realized volatility
//!
//! ```text
//! κ_t = E[ (1/T) · sqrt(∫_{t0}^{t0+T} σ_s² ds) | σ_t = σ ]
//! ```
//!
//! three independent ways:
//!
//! - [`series`]: a closed-form expansion in confluent hypergeometric
//!   functions, summed with optimal truncation since it is asymptotic for
//!   any positive time to maturity;
//! - [`pde`]: a Crank–Nicolson solve of the Laplace-transform PDE followed by
//!   the square-root quadrature `√v = π^{-1/2} ∫ (1 − e^{−x² v}) / x² dx`;
//! - [`mc`]: exact lognormal path simulation with reproducible per-path
//!   random substreams.
//!
//! [`verify`] holds mechanized checks of the identities the expansion rests
//! on, including an exact-rational check of a combinatorial identity that
//! forces the terminal value.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature. The `parallel` feature fans Monte Carlo paths out over
//! rayon without changing any result bit.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

extern crate alloc;

pub mod error;
pub mod mc;
pub mod model;
pub mod pde;
pub mod series;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};

pub use model::{DiscountCurve, MarketState, PricingResult, SabrParams, SwapContract};
pub use series::{SeriesConfig, SeriesDiagnostics, SeriesMode, SeriesRegime};
