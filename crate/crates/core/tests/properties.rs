use num_traits::Signed;
use proptest::prelude::*;
use volswap_core::mc::{kappa_mc, McConfig};
use volswap_core::pde::{solve_psi, GridSpec};
use volswap_core::series::{coeff_b_exact, kappa_series};
use volswap_core::specfun::kummer_1f1;
use volswap_core::verify::{check_kummer_ode, check_terminal_identity};
use volswap_core::{MarketState, SabrParams, SeriesConfig, SeriesMode, SwapContract};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn terminal_identity_is_zero(s in 1u32..=40) {
        prop_assert!(check_terminal_identity(s).is_zero());
    }

    #[test]
    fn b_sign_alternates(n in 2u32..60) {
        let b = coeff_b_exact(n);
        prop_assert_eq!(b.is_positive(), n % 2 == 1);
    }

    #[test]
    fn kummer_ode_holds(a in -3.0f64..12.0, b in 0.25f64..20.0, z in 0.0f64..30.0) {
        let r = check_kummer_ode(a, b, z).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn kummer_positive_parameters_monotone(a in 0.1f64..5.0, b in 0.1f64..8.0, z in 0.0f64..20.0) {
        let f = kummer_1f1(a, b, z, 1e-15).unwrap().value;
        let g = kummer_1f1(a, b, z + 0.5, 1e-15).unwrap().value;
        prop_assert!(g > f);
    }

    #[test]
    fn series_terminal_value(zeta in 0.01f64..10.0, nu in 0.001f64..1.0) {
        let alpha = 0.5;
        let sigma = (2.0 * alpha * alpha * nu * zeta).sqrt();
        let c = SwapContract::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = SabrParams::lognormal(alpha).unwrap();
        let s = MarketState::new(1.0, sigma, nu);
        let (k, d) = kappa_series(&s, &p, &c, &SeriesConfig::default()).unwrap();
        prop_assert!((k - nu.sqrt()).abs() <= 1e-8 * nu.sqrt());
        prop_assert!(d.terms_used <= 64 && d.min_term_index <= d.terms_used);
    }

    #[test]
    fn diagnostics_bounded(alpha in 0.05f64..2.0, zeta in 0.05f64..20.0, t in 0.0f64..1.0, max_terms in 2usize..80) {
        let nu = 0.04;
        let sigma = (2.0 * alpha * alpha * nu * zeta).sqrt();
        let c = SwapContract::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = SabrParams::lognormal(alpha).unwrap();
        let s = MarketState::new(t, sigma, nu);
        let cfg = SeriesConfig { max_terms, mode: SeriesMode::AdaptiveAsymptotic, ..SeriesConfig::default() };
        let (_, d) = kappa_series(&s, &p, &c, &cfg).unwrap();
        prop_assert!(d.terms_used <= max_terms);
        prop_assert!(d.min_term_index <= d.terms_used);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn psi_stays_in_unit_interval_and_decreases(alpha in 0.05f64..1.5, tau in 0.0f64..1.5) {
        let sol = solve_psi(alpha, tau, &GridSpec::new(96, 48)).unwrap();
        let last = sol.n_t();
        let mut prev = f64::INFINITY;
        for j in 0..=sol.n_y() {
            let p = sol.psi(last, j);
            prop_assert!((-1e-6..=1.0 + 1e-6).contains(&p));
            prop_assert!(p <= prev + 1e-6);
            prev = p;
        }
    }

    #[test]
    fn mc_is_reproducible(seed in any::<u64>(), paths in 2usize..600, steps in 1usize..8) {
        let c = SwapContract::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let p = SabrParams::lognormal(0.6).unwrap();
        let s = MarketState::new(0.2, 0.3, 0.01);
        let cfg = McConfig::new(paths, steps, seed);
        let a = kappa_mc(&s, &p, &c, &cfg).unwrap();
        let b = kappa_mc(&s, &p, &c, &cfg).unwrap();
        prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        prop_assert!(a.std_error >= 0.0);
    }
}
