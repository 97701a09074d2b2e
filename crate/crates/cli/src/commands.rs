use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};
use volswap_core::mc::{kappa_mc, variance_swap_expectation, variance_swap_mc, McConfig};
use volswap_core::model::{validate_state, Violation};
use volswap_core::pde::{kappa_from_psi, solve_psi, GridSpec, Refinement};
use volswap_core::series::{j0_closed_form, j0_hypergeometric_form, kappa_series, price_swap};
use volswap_core::verify::{self, ResidualReport};
use volswap_core::{
    DiscountCurve, Error as CoreError, MarketState, SabrParams, SeriesConfig, SeriesMode, SeriesRegime, SwapContract,
};

use crate::args::{
    Annualization, Check, CompareArgs, ContractArgs, MarketArgs, McArgs, McFlags, Mode, Payoff, PdeArgs, PdeFlags,
    PriceArgs, SeriesArgs, VerifyArgs,
};
use crate::manifest::RunManifest;
use crate::output::{cell, num, write_csv, write_json};
use crate::{CliError, EXIT_DIVERGING, EXIT_MISMATCH, EXIT_OK};

struct Setup {
    state: MarketState,
    params: SabrParams,
    contract: SwapContract,
}

fn setup(m: &MarketArgs, strike: f64, notional: f64) -> Result<Setup, CliError> {
    let params = SabrParams::new(m.alpha, m.beta, m.rho)?;
    let contract = SwapContract::new(m.t0, m.tenor, strike, notional)?;
    let state = MarketState::new(m.t, m.sigma, m.nu);
    Ok(Setup {
        state,
        params,
        contract,
    })
}

/// Rejects invalid states; `allow_zero_nu` admits ν = 0, which only the
/// series cannot handle.
fn check_state(s: &Setup, allow_zero_nu: bool) -> Result<(), CliError> {
    let codes: Vec<&str> = validate_state(&s.state, &s.params, &s.contract)
        .into_iter()
        .filter(|v| !(allow_zero_nu && *v == Violation::NuZeroSeriesSingular))
        .map(Violation::code)
        .collect();
    if codes.is_empty() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("invalid market state: {}", codes.join(", "))))
    }
}

/// Factor taking (1/T)√∫σ² to the requested convention.
fn display_factor(a: Annualization, tenor: f64) -> f64 {
    match a {
        Annualization::Paper => 1.0,
        Annualization::Market => tenor.sqrt(),
    }
}

fn curve(c: &ContractArgs) -> Result<DiscountCurve, CliError> {
    Ok(match (c.rate, c.discount_factor) {
        (_, Some(p)) => DiscountCurve::explicit(p)?,
        (Some(r), None) => DiscountCurve::flat(r)?,
        (None, None) => DiscountCurve::flat(0.0)?,
    })
}

fn series_config(a: &SeriesArgs) -> SeriesConfig {
    SeriesConfig {
        max_terms: a.max_terms,
        rel_tol: a.rel_tol,
        mode: match a.mode {
            Mode::Adaptive => SeriesMode::AdaptiveAsymptotic,
            Mode::Fixed => SeriesMode::FixedN,
        },
        asymptotic_tol: a.asymptotic_tol,
    }
}

fn mc_config(f: &McFlags, seed: u64) -> McConfig {
    McConfig {
        antithetic: f.antithetic,
        ..McConfig::new(f.paths, f.steps, seed)
    }
}

fn grid(f: &PdeFlags) -> GridSpec {
    GridSpec {
        y_max: f.y_max,
        ..GridSpec::new(f.ny, f.nt)
    }
}

fn finish_json(doc: Value, mut manifest: RunManifest, start: Instant, out: Option<&Path>) -> Result<(), CliError> {
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    write_json(doc, &manifest, out)
}

pub fn price(a: &PriceArgs) -> Result<i32, CliError> {
    let start = Instant::now();
    let manifest = RunManifest::new("price", a, None)?;
    let s = setup(&a.market, a.contract.strike, a.contract.notional)?;
    if s.state.nu == 0.0 {
        return Err(CoreError::SeriesSingular.into());
    }
    check_state(&s, false)?;
    let res = price_swap(
        &s.state,
        &s.params,
        &s.contract,
        &curve(&a.contract)?,
        &series_config(&a.series),
    )?;
    let f = display_factor(a.common.annualization, s.contract.tenor());
    let kappa = f * res.kappa;
    let fair_value = res.notional * res.discount_factor * (kappa - res.strike);
    let d = res.diagnostics;
    let doc = json!({
        "kappa": num(kappa),
        "fair_value": num(fair_value),
        "discount_factor": num(res.discount_factor),
        "strike": num(res.strike),
        "notional": num(res.notional),
        "terms_used": d.terms_used,
        "terms_evaluated": d.terms_evaluated,
        "min_term_index": d.min_term_index,
        "min_term_abs": num(f * d.min_term_abs),
        "error_estimate": num(f * d.error_estimate),
        "rounding_error": num(f * d.rounding_error),
        "converged": d.converged,
        "regime": d.regime.as_str(),
        "warnings": res.warnings,
        "annualization": a.common.annualization.as_str(),
    });
    finish_json(doc, manifest, start, a.common.output.as_deref())?;
    Ok(if d.regime == SeriesRegime::Diverging {
        EXIT_DIVERGING
    } else {
        EXIT_OK
    })
}

pub fn oracle_mc(a: &McArgs) -> Result<i32, CliError> {
    let start = Instant::now();
    let manifest = RunManifest::new("oracle mc", a, Some(a.seed))?;
    let s = setup(&a.market, 0.0, 1.0)?;
    check_state(&s, true)?;
    let cfg = mc_config(&a.mc, a.seed);
    let f = display_factor(a.common.annualization, s.contract.tenor());
    let doc = match a.payoff {
        Payoff::Volatility => {
            let est = kappa_mc(&s.state, &s.params, &s.contract, &cfg)?;
            json!({
                "payoff": "volatility",
                "kappa": num(f * est.mean),
                "std_error": num(f * est.std_error),
                "n_paths": est.n_paths,
                "variance": null,
                "closed_form": null,
                "annualization": a.common.annualization.as_str(),
            })
        }
        Payoff::Variance => {
            let est = variance_swap_mc(&s.state, &s.params, &s.contract, &cfg)?;
            let exact = variance_swap_expectation(&s.state, &s.params, &s.contract)?;
            json!({
                "payoff": "variance",
                "kappa": null,
                "std_error": num(est.std_error),
                "n_paths": est.n_paths,
                "variance": num(est.mean),
                "closed_form": num(exact),
                "annualization": a.common.annualization.as_str(),
            })
        }
    };
    finish_json(doc, manifest, start, a.common.output.as_deref())?;
    Ok(EXIT_OK)
}

pub fn oracle_pde(a: &PdeArgs) -> Result<i32, CliError> {
    let start = Instant::now();
    let manifest = RunManifest::new("oracle pde", a, None)?;
    let s = setup(&a.market, 0.0, 1.0)?;
    check_state(&s, true)?;
    let tau = s.contract.time_to_maturity(s.state.t);
    let mut grids = vec![grid(&a.pde)];
    for _ in 0..a.refine {
        let next = grids[grids.len() - 1].refined();
        grids.push(next);
    }
    let mut kappas = Vec::with_capacity(grids.len());
    let mut last = None;
    for g in &grids {
        let psi = solve_psi(s.params.alpha(), tau, g)?;
        let q = kappa_from_psi(&psi, &s.state, &s.params, &s.contract, a.pde.quad_tol)?;
        kappas.push(q.kappa);
        last = Some((psi, q));
    }
    let (psi, q) = last.expect("at least one grid");
    let f = display_factor(a.common.annualization, s.contract.tenor());
    let refinement = if a.refine > 0 {
        let ratios: Vec<f64> = kappas.windows(3).map(|k| (k[0] - k[1]) / (k[1] - k[2])).collect();
        let r = Refinement {
            grids: grids.clone(),
            kappas,
            ratios,
        };
        json!({
            "levels": grids.iter().map(|g| json!({"ny": g.n_y, "nt": g.n_t})).collect::<Vec<_>>(),
            "kappas": r.kappas.iter().map(|k| num(f * k)).collect::<Vec<_>>(),
            "ratios": r.ratios.iter().map(|x| num(*x)).collect::<Vec<_>>(),
            "extrapolated": num(f * r.extrapolated()),
            "last_change": num(f * r.last_change()),
        })
    } else {
        Value::Null
    };
    let doc = json!({
        "kappa": num(f * q.kappa),
        "quad_error": num(f * q.quad_error),
        "tail_bound": num(f * q.tail_bound),
        "evaluations": q.evaluations,
        "grid_report": {
            "ny": psi.n_y(),
            "nt": psi.n_t(),
            "y_min": num(psi.y_min()),
            "y_max": num(psi.y_max()),
            "boundary_psi": num(psi.boundary_psi()),
            "boundary_tol": num(psi.boundary_tol()),
        },
        "refinement": refinement,
        "annualization": a.common.annualization.as_str(),
    });
    finish_json(doc, manifest, start, a.common.output.as_deref())?;
    Ok(EXIT_OK)
}

pub const COMPARE_HEADER: [&str; 11] = [
    "alpha",
    "tau",
    "zeta",
    "kappa_series",
    "regime",
    "kappa_mc",
    "mc_se",
    "kappa_pde",
    "abs_diff_mc_sigmas",
    "pass",
    "note",
];

pub fn compare(a: &CompareArgs) -> Result<i32, CliError> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("compare", a, Some(a.seed))?;
    for (name, list) in [("alphas", &a.alphas), ("taus", &a.taus), ("zetas", &a.zetas)] {
        if list.is_empty() || list.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Usage(format!("--{name} needs finite values")));
        }
    }
    if let Some(tau) = a.taus.iter().find(|t| !(**t >= 0.0 && **t <= a.tenor)) {
        return Err(CliError::Usage(format!("tau {tau} outside [0, {}]", a.tenor)));
    }
    if let Some(z) = a.zetas.iter().find(|z| !(**z > 0.0)) {
        return Err(CliError::Usage(format!("zeta must be positive, got {z}")));
    }
    if !(a.sigma > 0.0) || !(a.rel_floor >= 0.0) {
        return Err(CliError::Usage(String::from(
            "--sigma must be positive and --rel-floor non-negative",
        )));
    }
    let cfg = series_config(&a.series);
    let mc = mc_config(&a.mc, a.seed);
    let g = grid(&a.pde);
    let f = display_factor(a.common.annualization, a.tenor);
    let mut rows = Vec::new();
    let mut all_pass = true;
    for &alpha in &a.alphas {
        let params = SabrParams::lognormal(alpha)?;
        let contract = SwapContract::new(a.t0, a.tenor, 0.0, 1.0)?;
        for &tau in &a.taus {
            for &zeta in &a.zetas {
                let nu = a.sigma * a.sigma / (2.0 * alpha * alpha * zeta);
                let t = if tau == 0.0 {
                    contract.maturity()
                } else {
                    a.t0 + a.tenor - tau
                };
                let state = MarketState::new(t, a.sigma, nu);
                let mut notes = Vec::new();
                let series = kappa_series(&state, &params, &contract, &cfg);
                let (ks, regime) = match &series {
                    Ok((k, d)) => (Some(*k), Some(d.regime)),
                    Err(e) => {
                        notes.push(format!("series: {e}"));
                        (None, None)
                    }
                };
                let est = kappa_mc(&state, &params, &contract, &mc)?;
                let kp = if a.no_pde {
                    None
                } else {
                    match solve_psi(alpha, contract.time_to_maturity(t), &g)
                        .and_then(|psi| kappa_from_psi(&psi, &state, &params, &contract, a.pde.quad_tol))
                    {
                        Ok(q) => Some(q.kappa),
                        Err(e) => {
                            notes.push(format!("pde: {e}"));
                            None
                        }
                    }
                };
                let diff = ks.map(|k| (k - est.mean).abs());
                let sigmas = diff.and_then(|d| {
                    if est.std_error > 0.0 {
                        Some(d / est.std_error)
                    } else if d == 0.0 {
                        Some(0.0)
                    } else {
                        None
                    }
                });
                let verdict = match (regime, diff) {
                    (Some(SeriesRegime::Diverging), _) => "excluded",
                    (Some(_), Some(d)) if d <= (3.0 * est.std_error).max(a.rel_floor * est.mean.abs()) => "true",
                    _ => "false",
                };
                if verdict == "false" {
                    all_pass = false;
                }
                rows.push(vec![
                    cell(Some(alpha)),
                    cell(Some(tau)),
                    cell(Some(zeta)),
                    cell(ks.map(|k| f * k)),
                    regime.map_or_else(String::new, |r| r.as_str().to_string()),
                    cell(Some(f * est.mean)),
                    cell(Some(f * est.std_error)),
                    cell(kp.map(|k| f * k)),
                    cell(sigmas),
                    verdict.to_string(),
                    notes.join("; "),
                ]);
            }
        }
    }
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    write_csv(&COMPARE_HEADER, &rows, &manifest, a.common.output.as_deref())?;
    Ok(if all_pass { EXIT_OK } else { EXIT_MISMATCH })
}

fn report_json(check: &str, r: &ResidualReport) -> Value {
    json!({
        "check": check,
        "point": r.point,
        "residual": num(r.residual),
        "scale": num(r.scale),
        "relative": num(r.relative()),
        "tolerance": num(r.tolerance),
        "exact": null,
        "pass": r.pass,
    })
}

fn failed_json(check: &str, point: String, err: &CoreError) -> Value {
    json!({
        "check": check,
        "point": point,
        "residual": null,
        "scale": null,
        "relative": null,
        "tolerance": null,
        "exact": null,
        "pass": false,
        "error": err.to_string(),
    })
}

fn push(out: &mut Vec<Value>, check: &str, point: String, r: Result<ResidualReport, CoreError>) {
    out.push(match r {
        Ok(r) => report_json(check, &r),
        Err(e) => failed_json(check, point, &e),
    });
}

const J0_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-4;
const FD_TERMS: usize = 4;
const BESSEL_TERMS: usize = 60;

fn identity_reports(out: &mut Vec<Value>) {
    for s in 1..=40u32 {
        let v = verify::check_terminal_identity(s);
        out.push(json!({
            "check": "identity",
            "point": format!("s={s}"),
            "residual": num(0.0),
            "scale": num(1.0),
            "relative": num(0.0),
            "tolerance": num(0.0),
            "exact": v.to_string(),
            "pass": v.is_zero(),
        }));
    }
    let lead = verify::terminal_leading_coefficient();
    let one = verify::ExactRational::from_integer(1);
    out.push(json!({
        "check": "identity",
        "point": "s=0 leading coefficient",
        "residual": num(0.0),
        "scale": num(1.0),
        "relative": num(0.0),
        "tolerance": num(0.0),
        "exact": lead.to_string(),
        "pass": (lead - one).is_zero(),
    }));
}

fn j0_reports(out: &mut Vec<Value>) {
    let (lo, hi) = (1e-2f64.ln(), 50f64.ln());
    for i in 1..=50 {
        let z = (lo + (hi - lo) * f64::from(i) / 50.0).exp();
        let point = format!("z={z}");
        match j0_closed_form(z).and_then(|c| j0_hypergeometric_form(z).map(|h| (c, h))) {
            Ok((c, h)) => {
                let scale = c.abs().max(f64::MIN_POSITIVE);
                let rel = (c - h).abs() / scale;
                out.push(json!({
                    "check": "j0",
                    "point": point,
                    "residual": num(c - h),
                    "scale": num(scale),
                    "relative": num(rel),
                    "tolerance": num(J0_TOL),
                    "exact": null,
                    "pass": rel <= J0_TOL,
                }));
            }
            Err(e) => out.push(failed_json("j0", point, &e)),
        }
    }
}

fn fd_report(out: &mut Vec<Value>) {
    let point = format!("alpha=0.4, sigma=0.25, nu=0.03, tau=0.5, n_terms={FD_TERMS}, h={FD_STEP}");
    let run = || -> Result<_, CoreError> {
        let params = SabrParams::lognormal(0.4)?;
        let contract = SwapContract::new(0.0, 1.0, 0.0, 1.0)?;
        let state = MarketState::new(0.5, 0.25, 0.03);
        verify::functional_fd_crosscheck(&state, &params, &contract, FD_TERMS, FD_STEP)
    };
    match run() {
        Ok(fd) => {
            let rel = fd.horizontal_rel_diff.max(fd.vertical_rel_diff);
            out.push(json!({
                "check": "functional_fd",
                "point": point,
                "residual": num(rel),
                "scale": num(1.0),
                "relative": num(rel),
                "tolerance": num(verify::FD_TOL),
                "exact": null,
                "pass": fd.pass,
            }));
        }
        Err(e) => out.push(failed_json("functional_fd", point, &e)),
    }
}

pub fn verify(a: &VerifyArgs) -> Result<i32, CliError> {
    let start = Instant::now();
    let manifest = RunManifest::new("verify", a, None)?;
    if a.n_terms == 0 {
        return Err(CliError::Usage(String::from("--n-terms must be at least 1")));
    }
    let want = |c: Check| a.check == Check::All || a.check == c;
    let mut reports = Vec::new();
    if want(Check::Identity) {
        identity_reports(&mut reports);
    }
    if want(Check::Bessel) {
        for y in [0.1, 0.5, 1.0, 2.0, 5.0] {
            push(
                &mut reports,
                "bessel",
                format!("y={y}, n_terms={BESSEL_TERMS}"),
                verify::check_bessel_sqrt_expansion(y, BESSEL_TERMS),
            );
        }
    }
    if want(Check::Psi) {
        for (tau, y, alpha) in [(0.1, 0.5, 0.5), (0.1, 2.0, 0.5), (0.5, 1.0, 0.2), (0.5, 1.0, 0.5)] {
            push(
                &mut reports,
                "psi",
                format!("tau={tau}, y={y}, alpha={alpha}, n_terms={}", a.n_terms),
                verify::check_psi_pde_residual(tau, y, alpha, a.n_terms),
            );
        }
    }
    if want(Check::Functional) {
        for alpha in [0.2, 0.5] {
            for tau in [0.1, 0.5] {
                for zeta in [0.5, 2.0, 8.0] {
                    for n in 0..a.n_terms as u32 {
                        push(
                            &mut reports,
                            "functional",
                            format!("n={n}, zeta={zeta}, tau={tau}, alpha={alpha}"),
                            verify::check_functional_term(n, zeta, tau, alpha),
                        );
                    }
                }
            }
        }
        fd_report(&mut reports);
    }
    if want(Check::Kummer) {
        for (a_, b) in [(-0.5, 0.5), (0.5, 2.5), (1.5, 4.5), (4.5, 10.5)] {
            for z in [0.1, 1.0, 5.0, 20.0] {
                push(
                    &mut reports,
                    "kummer",
                    format!("a={a_}, b={b}, z={z}"),
                    verify::check_kummer_ode(a_, b, z),
                );
            }
        }
    }
    if want(Check::J0) {
        j0_reports(&mut reports);
    }
    let passed = reports.iter().filter(|r| r["pass"] == Value::Bool(true)).count();
    let all_pass = passed == reports.len();
    let doc = json!({
        "all_pass": all_pass,
        "passed": passed,
        "total": reports.len(),
        "reports": reports,
    });
    finish_json(doc, manifest, start, a.common.output.as_deref())?;
    Ok(if all_pass { EXIT_OK } else { EXIT_MISMATCH })
}
