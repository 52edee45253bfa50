use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_deepcycle")
}

fn tiny_case() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/tiny_case.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("DEEPCYCLE_OUT")
        .env_remove("DEEPCYCLE_CONFIG")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, seed) in [(&a, "4"), (&b, "4"), (&c, "5")] {
        let out = run(&["synth", "--out", s(path), "--count", "50", "--seed", seed]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b, c) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), std::fs::read(&c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    let manifest = read_json(&dir.path().join("a.csv.manifest.json"));
    assert_eq!(manifest["results"]["samples"], 50);
}

#[test]
fn synth_zero_count_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    let out = run(&["synth", "--out", s(&path), "--count", "0"]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("g_prev,g,g_next"));
}

#[test]
fn fit_recovers_noiseless_static_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("s.csv");
    let out = run(&["synth", "--out", s(&samples), "--count", "400", "--noise", "0", "--seed", "9"]);
    assert!(out.status.success());
    let fit_dir = dir.path().join("fit");
    let out = run(&["fit", "--samples", s(&samples), "--out", s(&fit_dir), "--g-max", "600"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&fit_dir.join("fit_report.json"));
    let p = &report["static_fit"]["params"];
    for (key, truth) in [("f0", 11.53), ("f1", 0.86), ("n1", 1.02)] {
        let v = p[key].as_f64().unwrap();
        assert!((v - truth).abs() / truth < 1e-4, "{key} = {v}");
    }
    assert_eq!(report["threshold_mw"], 300.0);
    let residuals = std::fs::read_to_string(fit_dir.join("residuals.csv")).unwrap();
    assert_eq!(residuals.lines().count(), 401);
    let manifest = read_json(&fit_dir.join("manifest.json"));
    assert_eq!(manifest["inputs"][0]["role"], "samples");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn export_counts_match_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["export", "--out", s(dir.path()), "--levels", "zeros,high", "--wind", "both"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let counts = read_json(&dir.path().join("counts.json"));
    let counts = counts.as_array().unwrap();
    assert_eq!(counts.len(), 4);
    for c in counts {
        assert_eq!(c["columns"], c["closed_form_columns"]);
        assert_eq!(c["integer_columns"], 24 * (3 * 6 + 2 * 2));
        assert!(dir.path().join(c["file"].as_str().unwrap()).exists());
    }
}

#[test]
fn solve_writes_tables_comparison_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny_case();
    let out = run(&["solve", "--case", s(&case), "--out", s(dir.path()), "--wind", "off", "--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.path().join("wind_off");
    for label in ["zeros", "low", "high", "very_high"] {
        for f in ["dispatch.csv", "coal_units.csv", "emissions.csv", "cycling.csv", "solution.sol", "summary.json"] {
            assert!(root.join(label).join(f).exists(), "{label}/{f}");
        }
        let summary = read_json(&root.join(label).join("summary.json"));
        assert_eq!(summary["status"], "optimal");
        assert!(summary["max_violation"].as_f64().unwrap() <= 1e-6);
    }
    assert!(root.join("comparison.csv").exists());
    let table = std::fs::read_to_string(root.join("comparison.txt")).unwrap();
    assert!(table.starts_with("label"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("very_high"));

    let manifest = read_json(&dir.path().join("manifest.json"));
    let case_bytes = std::fs::read(&case).unwrap();
    let expected = {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(&case_bytes))
    };
    assert_eq!(manifest["inputs"][0]["sha256"], expected.as_str());
    assert_eq!(manifest["results"]["all_ok"], true);
    assert_eq!(manifest["results"]["runs"].as_array().unwrap().len(), 4);
}

#[test]
fn repeated_solves_give_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny_case();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = run(&["solve", "--case", s(&case), "--out", s(out_dir), "--wind", "off", "--levels", "low"]);
        assert!(out.status.success());
    }
    for f in ["wind_off/low/dispatch.csv", "wind_off/low/solution.sol", "wind_off/comparison.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let (ma, mb) = (read_json(&a.join("manifest.json")), read_json(&b.join("manifest.json")));
    assert_eq!(ma["results"], mb["results"]);
    assert_eq!(ma["inputs_sha256"], mb["inputs_sha256"]);
}

#[test]
fn external_solver_agrees_with_engine() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny_case();
    let internal = dir.path().join("internal");
    let external = dir.path().join("external");
    let command = format!("{} solve-mps {{mps}} {{sol}}", bin());
    let base = ["solve", "--case", s(&case), "--wind", "off", "--levels", "high"];
    let out = run(&[&base[..], &["--out", s(&internal)]].concat());
    assert!(out.status.success());
    let out = run(&[&base[..], &["--out", s(&external), "--external-solver", &command]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let obj = |d: &Path| read_json(&d.join("wind_off/high/summary.json"))["objective"].as_f64().unwrap();
    let (a, b) = (obj(&internal), obj(&external));
    assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{a} vs {b}");
}

#[test]
fn validate_accepts_solution_and_rejects_tampered_one() {
    let dir = tempfile::tempdir().unwrap();
    let case = tiny_case();
    let out = run(&["solve", "--case", s(&case), "--out", s(dir.path()), "--wind", "off", "--levels", "zeros"]);
    assert!(out.status.success());
    let sol = dir.path().join("wind_off/zeros/solution.sol");
    let out = run(&["validate", "--case", s(&case), "--solution", s(&sol), "--level", "zeros", "--wind", "off"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("feasible"));

    let text = std::fs::read_to_string(&sol).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .map(|l| match l.split_once(' ') {
            Some((name, v)) if name.starts_with("g_C1") => format!("{name} {}", v.parse::<f64>().unwrap() + 5.0),
            _ => l.to_string(),
        })
        .collect();
    let bad = dir.path().join("bad.sol");
    std::fs::write(&bad, tampered.join("\n")).unwrap();
    let out = run(&["validate", "--case", s(&case), "--solution", s(&bad), "--level", "zeros", "--wind", "off"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn unwritable_output_fails_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("out");
    let out = run(&["solve", "--case", s(&tiny_case()), "--out", s(&target)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("output directory"), "{err}");
    assert!(!err.contains("optimal"));
}

#[test]
fn unknown_level_is_rejected() {
    let out = run(&["export", "--levels", "medium", "--out", "unused"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("medium"));
}

#[test]
fn config_file_and_env_supply_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!("case = {:?}\nlevels = [\"zeros\", \"cheap:1:1\"]\nwind = \"off\"\nmip_gap = 0.0\n", s(&tiny_case())),
    )
    .unwrap();
    let env_out = dir.path().join("from_env");
    let out = Command::new(bin())
        .args(["--config", s(&config), "solve"])
        .env("DEEPCYCLE_OUT", &env_out)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(env_out.join("wind_off/cheap/summary.json").exists());
    let manifest = read_json(&env_out.join("manifest.json"));
    assert_eq!(manifest["options"]["solver"]["mip_gap"], 0.0);
    assert_eq!(manifest["inputs"][1]["role"], "config");

    // the flag wins over the config file
    let out = Command::new(bin())
        .args(["--config", s(&config), "solve", "--levels", "low", "--out", s(&dir.path().join("flag"))])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("flag/wind_off/low").exists());
    assert!(!dir.path().join("flag/wind_off/zeros").exists());
}

#[test]
fn bad_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "colour = 3\n").unwrap();
    let out = run(&["--config", s(&config), "validate"]);
    assert_eq!(out.status.code(), Some(2));
}
