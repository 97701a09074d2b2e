//! One line per acceptance criterion. Exits non-zero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use volswap_core::mc::{kappa_mc, variance_swap_expectation, variance_swap_mc, McConfig};
use volswap_core::pde::{kappa_quadrature, kappa_quadrature_detailed, GridSpec, DEFAULT_QUAD_TOL};
use volswap_core::series::{j0_closed_form, j0_hypergeometric_form, kappa_series};
use volswap_core::verify;
use volswap_core::{MarketState, SabrParams, SeriesConfig, SeriesRegime, SwapContract};

const TERMINAL_TOL: f64 = 1e-8;
const J0_TOL: f64 = 1e-10;
const MC_REL_FLOOR: f64 = 1e-3;
const PDE_REL_TOL: f64 = 1e-3;
const TAIL_TOL: f64 = 1e-6;
const DET_MC_TOL: f64 = 1e-8;
const DET_PDE_TOL: f64 = 1e-4;
const MC_SEED: u64 = 20_240_601;

/// (alpha, sigma, nu, t) with t0 = 0, T = 1.
const POINTS: [(f64, f64, f64, f64); 6] = [
    (1.0, 0.2, 0.2, 0.99),
    (0.2, 0.2, 0.05, 0.75),
    (0.5, 0.3, 0.06, 0.8),
    (0.5, 0.2, 0.08, 0.6),
    (0.5, 0.25, 0.41667, 0.2),
    (1.0, 0.2, 0.2, 0.5),
];

type Outcome = (bool, String);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn unit_contract() -> SwapContract {
    SwapContract::new(0.0, 1.0, 0.0, 1.0).unwrap()
}

fn terminal_value() -> Outcome {
    let contract = unit_contract();
    let alpha = 0.5;
    let params = SabrParams::lognormal(alpha).unwrap();
    let mut worst: f64 = 0.0;
    for nu in [0.01, 0.04, 0.25] {
        for i in 0..20 {
            let zeta = (0.01f64.ln() + (10f64.ln() - 0.01f64.ln()) * f64::from(i) / 19.0).exp();
            let sigma = (2.0 * alpha * alpha * nu * zeta).sqrt();
            let state = MarketState::new(1.0, sigma, nu);
            let (k, _) = kappa_series(&state, &params, &contract, &SeriesConfig::default()).unwrap();
            worst = worst.max((k - nu.sqrt()).abs() / nu.sqrt());
        }
    }
    (
        worst <= TERMINAL_TOL,
        format!("60 points, max rel err {worst:.2e} (tol {TERMINAL_TOL:.0e})"),
    )
}

fn terminal_identity() -> Outcome {
    let nonzero: Vec<u32> = (1..=40)
        .filter(|&s| !verify::check_terminal_identity(s).is_zero())
        .collect();
    (
        nonzero.is_empty(),
        format!("s = 1..40 exact zero, nonzero at {nonzero:?}"),
    )
}

fn j0_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 1..=50 {
        let z = (0.01f64.ln() + (50f64.ln() - 0.01f64.ln()) * f64::from(i) / 50.0).exp();
        let c = j0_closed_form(z).unwrap();
        let h = j0_hypergeometric_form(z).unwrap();
        worst = worst.max((c - h).abs() / c.abs());
    }
    (
        worst <= J0_TOL,
        format!("50 z in (1e-2, 50], max rel diff {worst:.2e} (tol {J0_TOL:.0e})"),
    )
}

fn bessel_expansion() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for y in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let r = verify::check_bessel_sqrt_expansion(y, 60).unwrap();
        pass &= r.pass;
        worst = worst.max(r.relative());
    }
    (
        pass,
        format!(
            "60 terms, max rel residual {worst:.2e} (tol {:.0e})",
            verify::BESSEL_EXPANSION_TOL
        ),
    )
}

fn functional_calculus() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for alpha in [0.2, 0.5] {
        for tau in [0.1, 0.5] {
            for zeta in [0.5, 2.0, 8.0] {
                for n in 0..=10 {
                    let r = verify::check_functional_term(n, zeta, tau, alpha).unwrap();
                    pass &= r.pass;
                    worst = worst.max(r.relative());
                }
            }
        }
    }
    let state = MarketState::new(0.5, 0.25, 0.03);
    let fd = verify::functional_fd_crosscheck(&state, &SabrParams::lognormal(0.4).unwrap(), &unit_contract(), 4, 1e-4)
        .unwrap();
    let fd_worst = fd.horizontal_rel_diff.max(fd.vertical_rel_diff);
    (
        pass && fd.pass,
        format!(
            "per-term max rel {worst:.2e} (tol {:.0e}); FD max rel {fd_worst:.2e} (tol {:.0e})",
            verify::FUNCTIONAL_TERM_TOL,
            verify::FD_TOL
        ),
    )
}

fn point_setup(p: (f64, f64, f64, f64)) -> (MarketState, SabrParams, SwapContract) {
    (
        MarketState::new(p.3, p.1, p.2),
        SabrParams::lognormal(p.0).unwrap(),
        unit_contract(),
    )
}

fn series_vs_mc() -> Outcome {
    let cfg = McConfig::new(1_000_000, 500, MC_SEED);
    let mut pass = true;
    let (mut worst, mut sigmas): (f64, f64) = (0.0, 0.0);
    for p in POINTS {
        let (state, params, contract) = point_setup(p);
        let (ks, diag) = kappa_series(&state, &params, &contract, &SeriesConfig::default()).unwrap();
        let est = kappa_mc(&state, &params, &contract, &cfg).unwrap();
        let band = (3.0 * est.std_error).max(MC_REL_FLOOR * ks.abs());
        let diff = (ks - est.mean).abs();
        pass &= diag.regime != SeriesRegime::Diverging && diff <= band;
        worst = worst.max(diff / band);
        sigmas = sigmas.max(diff / est.std_error);
    }
    (
        pass,
        format!("6 points, 1e6 paths x 500 steps, max |diff|/band {worst:.3}, max |diff| {sigmas:.2} std errors"),
    )
}

fn series_vs_pde() -> Outcome {
    let grid = GridSpec::new(400, 400);
    let mut pass = true;
    let (mut worst, mut tail): (f64, f64) = (0.0, 0.0);
    for p in POINTS {
        let (state, params, contract) = point_setup(p);
        let (ks, _) = kappa_series(&state, &params, &contract, &SeriesConfig::default()).unwrap();
        let q = kappa_quadrature_detailed(&state, &params, &contract, &grid, DEFAULT_QUAD_TOL).unwrap();
        let rel = (ks - q.kappa).abs() / ks;
        pass &= rel <= PDE_REL_TOL && q.tail_bound <= TAIL_TOL;
        worst = worst.max(rel);
        tail = tail.max(q.tail_bound);
    }
    (
        pass,
        format!(
            "400x400, max rel diff {worst:.2e} (tol {PDE_REL_TOL:.0e}), max tail bound {tail:.1e} (tol {TAIL_TOL:.0e})"
        ),
    )
}

fn deterministic_limit() -> Outcome {
    let (state, params, contract) = point_setup((1e-12, 0.25, 0.03, 0.5));
    let exact = (0.03f64 + 0.0625 * 0.5).sqrt();
    let mc = kappa_mc(&state, &params, &contract, &McConfig::new(10_000, 100, MC_SEED)).unwrap();
    let pde = kappa_quadrature(&state, &params, &contract, &GridSpec::default(), DEFAULT_QUAD_TOL).unwrap();
    let (e_mc, e_pde) = ((mc.mean - exact).abs(), (pde - exact).abs() / exact);
    (
        e_mc <= DET_MC_TOL && e_pde <= DET_PDE_TOL,
        format!("alpha=1e-12: mc abs err {e_mc:.1e} (tol {DET_MC_TOL:.0e}), pde rel err {e_pde:.1e} (tol {DET_PDE_TOL:.0e})"),
    )
}

fn variance_swap() -> Outcome {
    let cfg = McConfig::new(200_000, 200, MC_SEED);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for p in [(0.4, 0.25, 0.03, 0.5), (1.0, 0.2, 0.2, 0.5), (0.2, 0.3, 0.0, 0.0)] {
        let (state, params, contract) = point_setup(p);
        let est = variance_swap_mc(&state, &params, &contract, &cfg).unwrap();
        let exact = variance_swap_expectation(&state, &params, &contract).unwrap();
        let z = (est.mean - exact).abs() / est.std_error;
        pass &= z <= 3.0;
        worst = worst.max(z);
    }
    (pass, format!("3 points, max |diff| {worst:.2} std errors (tol 3)"))
}

fn run_bin(args: &[&str], threads: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_volswap"))
        .env("VOLSWAP_THREADS", threads)
        .args(args)
        .output()
        .expect("spawn volswap")
}

fn divergence_handling() -> Outcome {
    let alpha = 2f64.sqrt();
    let (state, params, contract) = point_setup((alpha, 0.2, 0.04 / (2.0 * alpha * alpha), 0.0));
    let (_, diag) = kappa_series(&state, &params, &contract, &SeriesConfig::default()).unwrap();
    let mc = kappa_mc(&state, &params, &contract, &McConfig::new(100_000, 200, MC_SEED)).unwrap();
    let out = run_bin(
        &[
            "compare",
            "--alphas",
            "1.4142135623730951",
            "--taus",
            "1",
            "--zetas",
            "0.5,1,4",
            "--paths",
            "20000",
            "--steps",
            "100",
            "--no-pde",
        ],
        "0",
    );
    let text = String::from_utf8_lossy(&out.stdout);
    let excluded = text.lines().skip(2).filter(|l| l.contains(",excluded,")).count();
    let rows = text.lines().skip(2).count();
    let pass = diag.regime != SeriesRegime::ConvergentLike
        && mc.mean.is_finite()
        && out.status.code() == Some(0)
        && rows == 3
        && excluded == rows;
    (
        pass,
        format!(
            "alpha^2 tau = 2: regime {}, mc {:.6} +- {:.1e}, compare exit {:?}, {excluded}/{rows} rows excluded",
            diag.regime.as_str(),
            mc.mean,
            mc.std_error,
            out.status.code()
        ),
    )
}

fn strip_duration(mut v: Value) -> Value {
    v["manifest"]["duration_seconds"] = Value::Null;
    v
}

fn reproducibility(dir: &Path) -> Outcome {
    let json_path = dir.join("mc.json");
    let csv_path = dir.join("cmp.csv");
    let mc_args = [
        "oracle",
        "mc",
        "--alpha",
        "0.5",
        "--sigma",
        "0.2",
        "--nu",
        "0.08",
        "--tenor",
        "1",
        "--t",
        "0.6",
        "--seed",
        "17",
        "--paths",
        "60000",
        "--steps",
        "50",
        "--antithetic",
        "--output",
        json_path.to_str().unwrap(),
    ];
    let cmp_args = [
        "compare",
        "--alphas",
        "0.5,1",
        "--taus",
        "0.2",
        "--zetas",
        "1,3",
        "--seed",
        "17",
        "--paths",
        "30000",
        "--steps",
        "50",
        "--no-pde",
        "--output",
        csv_path.to_str().unwrap(),
    ];
    assert_eq!(run_bin(&mc_args, "1").status.code(), Some(0));
    assert_eq!(run_bin(&cmp_args, "1").status.code(), Some(0));
    let reference: Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let reference = strip_duration(reference);
    let csv_body = |s: &str| s.lines().skip(1).collect::<Vec<_>>().join("\n");
    let csv_ref = csv_body(&std::fs::read_to_string(&csv_path).unwrap());
    let mut pass = true;
    for threads in ["1", "4", "16"] {
        let mc = run_bin(&["replay", json_path.to_str().unwrap()], threads);
        let doc: Value = serde_json::from_slice(&mc.stdout).unwrap();
        pass &= strip_duration(doc) == reference;
        let cmp = run_bin(&["replay", csv_path.to_str().unwrap()], threads);
        pass &= csv_body(&String::from_utf8_lossy(&cmp.stdout)) == csv_ref;
    }
    (
        pass,
        String::from("oracle mc and compare replayed under 1, 4, 16 workers, bit-identical"),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<Criterion> = vec![
        ("terminal value", Box::new(terminal_value)),
        ("terminal identity", Box::new(terminal_identity)),
        ("J0 dual representation", Box::new(j0_forms)),
        ("Bessel expansion", Box::new(bessel_expansion)),
        ("functional calculus", Box::new(functional_calculus)),
        ("series vs Monte Carlo", Box::new(series_vs_mc)),
        ("series vs PDE", Box::new(series_vs_pde)),
        ("deterministic limit", Box::new(deterministic_limit)),
        ("variance swap", Box::new(variance_swap)),
        ("divergence handling", Box::new(divergence_handling)),
        ("reproducibility", Box::new(move || reproducibility(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {:>2} {name}: {detail} [{:.1}s]",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
