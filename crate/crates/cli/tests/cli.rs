use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pullback"));
    c.env_remove("PULLBACK_SEED");
    c
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(c: &mut Command) -> Run {
    let out = c.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn report(c: &mut Command) -> Value {
    let r = run(c);
    assert_eq!(r.code, 0, "stderr: {}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    validate(&v);
    v
}

fn validate(v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema errors: {errors:?}");
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn mean_re(v: &Value, name: &str) -> f64 {
    v["estimates"][name]["mean"][0].as_f64().unwrap()
}

#[test]
fn detk_on_the_identity() {
    let v = report(bin().args(["detk", "--matrix", "1,0;0,1", "--orders", "1,2"]));
    assert!((mean_re(&v, "det_1") - 4.0).abs() < 1e-14);
    assert!((mean_re(&v, "det_2") - 4.0 * (-2.0f64).exp()).abs() < 1e-14);
    assert!(v["wall_clock_seconds"].as_f64().is_some());
    assert_eq!(v["seed_source"], "default");
}

#[test]
fn findim_degree_of_the_square_map() {
    let v = report(bin().args(["findim", "--map", "zsq", "--mode", "degree"]));
    assert_eq!(v["results"]["degree"], 2);
    for mode in ["zero_count", "mass", "phase"] {
        let v = report(bin().args(["findim", "--map", "zsq_m1", "--mode", mode, "--samples", "50", "--omit-timing"]));
        assert!(v.get("wall_clock_seconds").is_none());
    }
}

#[test]
fn configuration_errors_exit_with_2() {
    let bad = tmp("malformed.json");
    std::fs::write(&bad, "{ \"command\": \"detk\", ").unwrap();
    assert_eq!(run(bin().args(["detk", "--config"]).arg(&bad)).code, 2);

    let unknown = tmp("unknown_key.json");
    std::fs::write(&unknown, r#"{"command": "detk", "params": {"matrix": [[1.0]]}, "sneed": 1}"#).unwrap();
    assert_eq!(run(bin().args(["detk", "--config"]).arg(&unknown)).code, 2);

    let mismatch = tmp("mismatch.json");
    std::fs::write(&mismatch, r#"{"command": "fz"}"#).unwrap();
    assert_eq!(run(bin().args(["detk", "--config"]).arg(&mismatch)).code, 2);

    assert_eq!(run(bin().args(["detk", "--set", "matrx=[[1.0]]"])).code, 2);
    assert_eq!(run(bin().args(["findim", "--map", "zfour"])).code, 2);
    assert_eq!(run(bin().args(["wzlg", "--N", "0"])).code, 2);
    assert_eq!(run(bin().args(["wzlg", "--variant", "sideways"])).code, 2);
    assert_eq!(run(bin().args(["gaussian", "--samples", "1"])).code, 2);
    assert_eq!(run(bin().args(["frobnicate"])).code, 2);
    assert_eq!(run(bin().args(["detk"]).env("PULLBACK_SEED", "many")).code, 2);
}

#[test]
fn numerical_failures_exit_with_3() {
    // the literal operator at base +1 is singular from N = 4 on
    let r = run(bin().args(["wzlg", "--variant", "literal", "--base", "1", "--N", "4", "--samples", "2", "--starts", "2"]));
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("singular"));
    // a degenerate preimage: y = 0 under z^2
    let r = run(bin().args(["findim", "--map", "zsq", "--mode", "zero_count", "--y", "0,0"]));
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn seed_precedence_is_echoed() {
    let v = report(bin().args(["detk", "--matrix", "0.5"]).env("PULLBACK_SEED", "77"));
    assert_eq!((v["seed"].as_u64(), v["seed_source"].as_str()), (Some(77), Some("env")));
    let v = report(bin().args(["detk", "--matrix", "0.5", "--seed", "5"]).env("PULLBACK_SEED", "77"));
    assert_eq!((v["seed"].as_u64(), v["seed_source"].as_str()), (Some(5), Some("flag")));
}

#[test]
fn flags_override_the_config() {
    let cfg = tmp("findim_config.json");
    std::fs::write(&cfg, r#"{"command": "findim", "params": {"map": "zsq"}, "seed": 9, "omit_timing": true}"#).unwrap();
    let v = report(bin().args(["findim", "--config"]).arg(&cfg));
    assert_eq!(v["results"]["degree"], 2);
    assert_eq!((v["seed"].as_u64(), v["seed_source"].as_str()), (Some(9), Some("config")));
    assert!(v.get("wall_clock_seconds").is_none());
    let v = report(bin().args(["findim", "--map", "zcube", "--config"]).arg(&cfg));
    assert_eq!(v["results"]["degree"], 3);
    assert_eq!(v["params"]["map"], "zcube");
}

#[test]
fn config_and_flags_give_the_same_report() {
    let cfg = tmp("gaussian_config.json");
    let out = tmp("gaussian_report.json");
    let config = json!({
        "command": "gaussian",
        "params": { "trunc": 4, "t": 2.0, "n_samples": 2000, "n_fields": 4 },
        "seed": 3,
        "output": out,
        "workers": 1,
        "omit_timing": true,
    });
    std::fs::write(&cfg, config.to_string()).unwrap();
    assert_eq!(run(bin().args(["gaussian", "--config"]).arg(&cfg)).code, 0);
    let from_file: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let mut flags = from_file.clone();
    flags["seed_source"] = json!("config");
    let v = report(bin().args([
        "gaussian", "--N", "4", "--t", "2", "--samples", "2000", "--fields", "4", "--seed", "3", "--omit-timing",
    ]));
    assert_eq!(v["seed_source"], "flag");
    let mut v = v;
    v["seed_source"] = json!("config");
    assert_eq!(v, flags);
    validate(&from_file);
}

#[test]
fn every_command_validates_against_the_schema() {
    report(bin().args(["gaussian", "--check", "cameron_martin", "--N", "3", "--samples", "500", "--fields", "2"]));
    report(bin().args(["wzlg", "--N", "3", "--samples", "3", "--starts", "2", "--t", "4"]));
    let v = report(bin().args(["fz", "--size", "2", "--insertions", "0,2", "--configs", "2"]));
    assert_eq!(v["results"]["passed"], true);
    report(bin().args(["detk", "--laplace-trunc", "6", "--schatten", "1,3"]));
    report(bin().args(["detk", "--matrix", "0.1,0.2;0.3,0.4", "--imag", "0,0.1;-0.1,0"]));
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let head = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    (head, rows)
}

#[test]
fn t_sweep_of_the_phase_integral() {
    let r = run(bin().args([
        "sweep", "--target", "wzlg", "--axis", "t", "--values", "1,4,16", "--set", "trunc=3", "--set", "samples=3",
        "--set", "starts=2",
    ]));
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (head, rows) = csv_rows(&r.stdout);
    assert_eq!(head[0], "t");
    assert!(head.contains(&"phase_integral_mean_re".to_string()));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![1.0, 4.0, 16.0]);
}

#[test]
fn empty_sweep_is_a_config_error() {
    let r = run(bin().args(["sweep", "--target", "detk", "--axis", "laplace_trunc", "--values", ""]));
    assert_eq!(r.code, 2);
    let r = run(bin().args(["sweep", "--target", "sweep", "--axis", "x", "--values", "1"]));
    assert_eq!(r.code, 2);
}

#[test]
fn truncation_sweep_of_the_schatten_norm_is_monotone() {
    let out = tmp("schatten_sweep.csv");
    let r = run(bin()
        .args(["sweep", "--target", "detk", "--axis", "laplace_trunc", "--values", "2,4,8,16", "--set", "schatten=[3]"])
        .arg("--output")
        .arg(&out));
    assert_eq!(r.code, 0, "{}", r.stderr);
    let (head, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    let i = head.iter().position(|h| h == "schatten_3_mean_re").unwrap();
    assert!(rows.windows(2).all(|w| w[1][i] > w[0][i]));
}

#[test]
fn worker_count_does_not_change_the_report() {
    let args = ["findim", "--map", "cubic1d", "--mode", "mass", "--samples", "300", "--omit-timing"];
    let a = run(bin().args(args).args(["--workers", "1"]));
    let b = run(bin().args(args).args(["--workers", "3"]));
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn schema_rejects_broken_reports() {
    let mut v = report(bin().args(["detk", "--matrix", "0.5", "--omit-timing"]));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    assert!(validator.is_valid(&v));
    v["estimates"]["det_1"]["stderr"] = json!(-1.0);
    assert!(!validator.is_valid(&v));
    v["estimates"]["det_1"]["stderr"] = json!(0.0);
    v["extra"] = json!(1);
    assert!(!validator.is_valid(&v));
}
