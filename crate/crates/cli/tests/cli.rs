use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volswap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn volswap")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema")
}

fn load_schema(name: &str) -> Value {
    let read =
        |n: &str| -> Value { serde_json::from_str(&std::fs::read_to_string(schema_dir().join(n)).unwrap()).unwrap() };
    let mut schema = read(name);
    let mut manifest = read("manifest.schema.json");
    let m = manifest.as_object_mut().unwrap();
    m.remove("$id");
    m.remove("$schema");
    schema["properties"]["manifest"] = manifest;
    schema
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let schema = load_schema(schema_name);
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("schema compiles");
    let msgs: Vec<String> = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{schema_name}: {msgs:?}");
}

const STD: [&str; 10] = [
    "--alpha", "0.4", "--sigma", "0.25", "--nu", "0.03", "--tenor", "1", "--t", "0.5",
];

fn with_std<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(STD.iter()).chain(tail.iter()).copied().collect()
}

fn strip_duration(mut v: Value) -> Value {
    v["manifest"]["duration_seconds"] = Value::Null;
    v
}

#[test]
fn price_terminal_at_the_money() {
    let out = run(&[
        "price", "--alpha", "0.5", "--sigma", "0.2", "--nu", "0.04", "--t0", "0", "--tenor", "1", "--t", "1.0",
        "--strike", "0.2", "--rate", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert!((f(&doc["kappa"]) - 0.2).abs() < 1e-12);
    assert!(f(&doc["fair_value"]).abs() < 1e-12);
    assert_eq!(doc["regime"], "convergent_like");
    assert_valid("price.schema.json", &doc);
}

#[test]
fn price_usage_errors_exit_2() {
    let out = run(&["price", "--alpha", "0.5", "--sigma", "0.2", "--tenor", "1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--nu"));
    assert!(out.stdout.is_empty());

    let zero_nu = run(&[
        "price", "--alpha", "0.5", "--sigma", "0.2", "--nu", "0", "--tenor", "1", "--t", "0.5",
    ]);
    assert_eq!(zero_nu.status.code(), Some(2));
    let late = run(&[
        "price", "--alpha", "0.5", "--sigma", "0.2", "--nu", "0.01", "--tenor", "1", "--t", "2",
    ]);
    assert_eq!(late.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&late.stderr).contains("AFTER_MATURITY"));
    let both = run(&[
        "price",
        "--alpha",
        "0.5",
        "--sigma",
        "0.2",
        "--nu",
        "0.01",
        "--tenor",
        "1",
        "--t",
        "0.5",
        "--rate",
        "0",
        "--discount-factor",
        "0.9",
    ]);
    assert_eq!(both.status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn price_diverging_exits_3_with_document() {
    let out = run(&with_std(&["price"], &[]));
    assert_eq!(out.status.code(), Some(3));
    let doc = json_of(&out);
    assert_eq!(doc["regime"], "diverging");
    assert!(doc["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w == "SERIES_DIVERGING"));
    assert_valid("price.schema.json", &doc);
}

#[test]
fn price_market_annualization_scales_by_root_tenor() {
    let base = [
        "price", "--alpha", "0.5", "--sigma", "0.3", "--nu", "0.06", "--t0", "0", "--tenor", "4", "--t", "3.8",
    ];
    let paper = json_of(&run(&base));
    let mut args = base.to_vec();
    args.extend(["--annualization", "market"]);
    let market = json_of(&run(&args));
    assert_eq!(market["annualization"], "market");
    let ratio = f(&market["kappa"]) / f(&paper["kappa"]);
    assert!((ratio - 2.0).abs() < 1e-15, "{ratio}");
}

#[test]
fn mc_is_reproducible_and_schema_valid() {
    let args = with_std(&["oracle", "mc"], &["--seed", "11", "--paths", "4000", "--steps", "50"]);
    let a = json_of(&run(&args));
    let b = json_of(&run(&args));
    assert_eq!(strip_duration(a.clone()), strip_duration(b));
    assert_valid("oracle_mc.schema.json", &a);
    assert_eq!(a["manifest"]["seed"], 11);

    let other = json_of(&run(&with_std(
        &["oracle", "mc"],
        &["--seed", "12", "--paths", "4000", "--steps", "50"],
    )));
    assert_ne!(a["kappa"], other["kappa"]);
}

#[test]
fn mc_requires_seed() {
    let out = run(&with_std(&["oracle", "mc"], &[]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mc_deterministic_limit() {
    let out = run(&[
        "oracle", "mc", "--alpha", "1e-12", "--sigma", "0.25", "--nu", "0.03", "--tenor", "1", "--t", "0.5", "--seed",
        "1", "--paths", "1000", "--steps", "20",
    ]);
    let doc = json_of(&out);
    let exact = (0.03f64 + 0.0625 * 0.5).sqrt();
    assert!((f(&doc["kappa"]) - exact).abs() < 1e-10);
    assert!(f(&doc["std_error"]) < 1e-12);
}

#[test]
fn mc_variance_payoff_matches_closed_form() {
    let doc = json_of(&run(&with_std(
        &["oracle", "mc"],
        &[
            "--seed", "5", "--paths", "20000", "--steps", "100", "--payoff", "variance",
        ],
    )));
    assert!(doc["kappa"].is_null());
    let diff = (f(&doc["variance"]) - f(&doc["closed_form"])).abs();
    assert!(diff <= 3.0 * f(&doc["std_error"]), "{doc}");
    assert_valid("oracle_mc.schema.json", &doc);
}

#[test]
fn pde_refinement_ratio() {
    let doc = json_of(&run(&with_std(
        &["oracle", "pde"],
        &["--refine", "2", "--ny", "200", "--nt", "200"],
    )));
    let r = &doc["refinement"];
    assert_eq!(r["kappas"].as_array().unwrap().len(), 3);
    let ratio = f(&r["ratios"][0]);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    assert_valid("oracle_pde.schema.json", &doc);

    let plain = json_of(&run(&with_std(&["oracle", "pde"], &[])));
    assert!(plain["refinement"].is_null());
    assert!(f(&plain["tail_bound"]) <= 1e-6);
    assert_valid("oracle_pde.schema.json", &plain);
}

#[test]
fn verify_default_and_subsets() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["all_pass"], true);
    assert_valid("verify.schema.json", &doc);
    let identity: Vec<&Value> = doc["reports"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["check"] == "identity")
        .collect();
    assert_eq!(identity.len(), 41);
    assert!(identity[..40].iter().all(|r| r["exact"] == "0"));
    assert_eq!(identity[40]["exact"], "1");

    let functional = json_of(&run(&["verify", "--check", "functional", "--n-terms", "10"]));
    assert_eq!(functional["all_pass"], true);
    assert_eq!(functional["total"], 2 * 2 * 3 * 10 + 1);

    let j0 = run(&["verify", "--check", "j0"]);
    assert_eq!(j0.status.code(), Some(0));
    assert_eq!(json_of(&j0)["total"], 50);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# market\nalpha = 0.5\nsigma = 0.2\nnu = 0.04\ntenor = 1\nt = 1.0\nstrike = 0.1\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let doc = json_of(&run(&["price", "--config", cfg]));
    assert!((f(&doc["fair_value"]) - 0.1).abs() < 1e-12);
    let doc = json_of(&run(&["price", "--config", cfg, "--strike", "0.2"]));
    assert!(f(&doc["fair_value"]).abs() < 1e-12);
    assert_eq!(doc["manifest"]["params"]["strike"], 0.2);

    std::fs::write(dir.path().join("bad.cfg"), "alpha 0.5\n").unwrap();
    let bad = run(&["price", "--config", dir.path().join("bad.cfg").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn output_flag_writes_only_that_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    let out = run(&["verify", "--check", "kummer", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid("verify.schema.json", &doc);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn replay_reproduces_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("mc.json");
    let args = with_std(
        &["oracle", "mc"],
        &["--seed", "4", "--paths", "3000", "--steps", "40", "--antithetic"],
    );
    let mut with_out = args.clone();
    with_out.extend(["--output", first.to_str().unwrap()]);
    assert_eq!(run(&with_out).status.code(), Some(0));
    let again = run(&["replay", first.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(strip_duration(a), strip_duration(json_of(&again)));

    let csv_path = dir.path().join("cmp.csv");
    let cmp = run(&[
        "compare",
        "--alphas",
        "0.5",
        "--taus",
        "0,0.2",
        "--zetas",
        "1",
        "--paths",
        "2000",
        "--steps",
        "20",
        "--no-pde",
        "--output",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(cmp.status.code(), Some(0), "{}", String::from_utf8_lossy(&cmp.stderr));
    let replayed = run(&["replay", csv_path.to_str().unwrap()]);
    let body = |s: &str| s.lines().skip(1).map(String::from).collect::<Vec<_>>();
    let original = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(body(&original), body(&String::from_utf8_lossy(&replayed.stdout)));
}

#[test]
fn compare_terminal_rows_and_divergence_exclusion() {
    let out = run(&[
        "compare",
        "--alphas",
        "0.5,1.4142135623730951",
        "--taus",
        "0,1",
        "--zetas",
        "0.5,4",
        "--paths",
        "4000",
        "--steps",
        "50",
        "--no-pde",
        "--seed",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    let body = lines.collect::<Vec<_>>().join("\n");
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mut saw_excluded = false;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let alpha: f64 = rec[col("alpha")].parse().unwrap();
        let tau: f64 = rec[col("tau")].parse().unwrap();
        let zeta: f64 = rec[col("zeta")].parse().unwrap();
        let ks: f64 = rec[col("kappa_series")].parse().unwrap();
        let kmc: f64 = rec[col("kappa_mc")].parse().unwrap();
        assert!(kmc.is_finite());
        if tau == 0.0 {
            let nu = 0.04 / (2.0 * alpha * alpha * zeta);
            assert!((ks - nu.sqrt()).abs() < 1e-12 * nu.sqrt());
            assert!((kmc - nu.sqrt()).abs() < 1e-15);
        }
        if (alpha * alpha * tau - 2.0).abs() < 1e-9 {
            assert_ne!(&rec[col("regime")], "convergent_like");
            if &rec[col("regime")] == "diverging" {
                assert_eq!(&rec[col("pass")], "excluded");
                saw_excluded = true;
            }
        }
    }
    assert!(saw_excluded);
}

#[test]
fn compare_rejects_bad_grid() {
    let out = run(&["compare", "--alphas", "0.5", "--taus", "2", "--zetas", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["compare", "--alphas", "0.5", "--taus", "0.5", "--zetas", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_usage_error() {
    let out = bin()
        .env("VOLSWAP_THREADS", "many")
        .args(["verify", "--check", "kummer"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
