use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn cqed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqed")).args(args).output().expect("spawn cqed")
}

fn ok(args: &[&str]) -> String {
    let o = cqed(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn listed(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        manifest(dir)["outputs"].as_array().unwrap().iter().map(|e| e["file"].as_str().unwrap().to_string()).collect();
    v.sort();
    v
}

fn on_disk(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    v.sort();
    v
}

const REFERENCE: &str = "
[system]
g0 = 18.0
g = 8.0
kappa = 0.4
gamma = 5.2
ell0 = 155.0
w_c = 23.0
eta = 6.0

[drive]
lambda_l = 0.8523
delta_a = 100.0
i_l = 2.0
i_sat = 1.1
";

#[test]
fn config_file_matches_builtin_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("ref.toml");
    fs::write(&cfg, REFERENCE).unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&["scan", "--config", s(&cfg), "--out", s(&a)]);
    ok(&["scan", "--out", s(&b)]);
    assert_eq!(fs::read(a.join("scan.csv")).unwrap(), fs::read(b.join("scan.csv")).unwrap());
    assert_eq!(manifest(&a)["config"]["config"]["system"]["g"], 8.0);
}

#[test]
fn invalid_config_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, REFERENCE.replace("kappa = 0.4", "kappa = -0.4")).unwrap();
    let out = tmp.path().join("out");
    let o = cqed(&["scan", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa"));
    assert!(!out.exists());

    fs::write(&cfg, REFERENCE.replace("eta = 6.0", "eta = 6.0\nbogus = 1.0")).unwrap();
    let o = cqed(&["scan", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn usage_errors_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for args in [
        vec!["scan", "--preset", "fig4d", "--out", s(&out)],
        vec!["synth", "--preset", "table", "--out", s(&out)],
        vec!["synth", "--preset", "fig2", "--rate-cd", "3", "--out", s(&out)],
        vec!["scan", "--grid", "0:1", "--out", s(&out)],
        vec!["scan", "--jobs", "0", "--out", s(&out)],
        vec!["scan", "--quantum-stride", "0", "--out", s(&out)],
        vec!["synth", "--bin-width", "-1", "--out", s(&out)],
        vec!["scan", "--no-such-flag", "--out", s(&out)],
    ] {
        assert_eq!(cqed(&args).status.code(), Some(2), "{args:?}");
    }
    assert!(!out.exists());
}

#[test]
fn missing_trace_fails_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let missing = tmp.path().join("nope.csv");
    let o = cqed(&["analyze", s(&missing), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
    assert!(!out.exists());
}

#[test]
fn scan_presets_write_listed_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for (preset, files) in [
        ("table", vec!["table.csv"]),
        ("fig3a", vec!["fig3a_cavity.csv", "fig3a_free_space.csv", "fig3a_lossless.csv"]),
        ("fig3b", vec!["fig3b.csv"]),
    ] {
        let out = tmp.path().join(preset);
        ok(&["scan", "--preset", preset, "--out", s(&out)]);
        assert_eq!(listed(&out), files);
        assert_eq!(on_disk(&out), files);
        let m = manifest(&out);
        assert_eq!(m["command"], "scan");
        assert_eq!(m["tool_version"], env!("CARGO_PKG_VERSION"));
    }
    let table = fs::read_to_string(tmp.path().join("table").join("table.csv")).unwrap();
    assert!(table.starts_with("# schema=1\ncase,n_atoms,r_d_per_ms\n"));
    assert!(table.contains("free_space,2,3.6"));
}

#[test]
fn quantum_scan_adds_comparison_column() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("q");
    let stdout = ok(&[
        "scan", "--axis", "phi-y", "--grid", "0:3.14159:3", "--quantum-stride", "2", "--compare-classical", "--nmax", "4",
        "--out", s(&out),
    ]);
    assert!(stdout.contains("max relative deviation"));
    let q = fs::read_to_string(out.join("scan_quantum.csv")).unwrap();
    let lines: Vec<&str> = q.lines().collect();
    assert!(lines[1].ends_with(",rel_dev"));
    // Points 0 and 2 of a three-point grid, on both φ_z branches.
    assert_eq!(lines.len(), 6);
    let phi_z: Vec<&str> = lines[2..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(phi_z[0], phi_z[1]);
    assert_ne!(phi_z[1], phi_z[2]);
    assert_eq!(listed(&out), ["scan.csv", "scan_quantum.csv"]);
}

#[test]
fn synth_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| -> PathBuf {
        let out = tmp.path().join(name);
        ok(&["synth", "--preset", "fig4e", "--duration", "2", "--seed", seed, "--out", s(&out)]);
        out
    };
    let (a, b, c) = (run("a", "0"), run("b", "0"), run("c", "1"));
    let read = |d: &Path| fs::read(d.join("fig4e.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(listed(&a), ["fig4e.csv", "fig4e.json"]);
    assert_eq!(manifest(&a)["seed"], 0);
}

#[test]
fn synth_config_file_and_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("t.toml");
    fs::write(&cfg, "rate_cd = 2.0\nrate_dc = 8.0\nduration = 1.0\nbin_width = 1e-3\n").unwrap();
    let out = tmp.path().join("out");
    ok(&["synth", "--config", s(&cfg), "--r-bg", "0.25", "--stem", "custom", "--out", s(&out)]);
    let side: Value = serde_json::from_str(&fs::read_to_string(out.join("custom.json")).unwrap()).unwrap();
    assert_eq!(side["n_bins"], 1000);
    assert_eq!(side["model"]["rate_dc"], 8.0);
    assert_eq!(side["model"]["r_bg"], 250.0);

    fs::write(&cfg, "rate_cd = 2.0\nspeed = 3.0\n").unwrap();
    let o = cqed(&["synth", "--config", s(&cfg), "--out", s(&tmp.path().join("bad"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}

#[test]
fn fig4d_analysis_recovers_rates() {
    let tmp = tempfile::tempdir().unwrap();
    let traces = tmp.path().join("traces");
    ok(&["synth", "--preset", "fig4d", "--seed", "0", "--out", s(&traces)]);
    let out = tmp.path().join("fit");
    ok(&["analyze", s(&traces.join("fig4d.csv")), "--out", s(&out)]);
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("fig4d_hmm.json")).unwrap()).unwrap();
    for key in ["rate_cd", "rate_dc"] {
        let rate = report[key]["rate_per_s"].as_f64().unwrap();
        assert!((rate / cqed_cli::presets::FIG4D_RATE - 1.0).abs() <= 0.15, "{key} {rate}");
    }
    assert_eq!(report["degenerate"], false);
    assert_eq!(listed(&out), ["fig4d_hmm.json", "fig4d_posteriors.csv"]);
}

#[test]
fn loss_scenario_regions() {
    let tmp = tempfile::tempdir().unwrap();
    let traces = tmp.path().join("traces");
    ok(&["synth", "--preset", "fig2", "--out", s(&traces)]);
    let trace = traces.join("fig2.csv");

    let out = tmp.path().join("ii");
    let o = cqed(&["analyze", s(&trace), "--region", "ii", "--out", s(&out)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("fig2_ii_hmm.json")).unwrap()).unwrap();
    assert_eq!(report["degenerate"], true);
    assert_eq!(report["start_bin"], 340);
    assert_eq!(report["end_bin"], 780);

    let out = tmp.path().join("i");
    ok(&["analyze", s(&trace), "--region", "i", "--out", s(&out)]);
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("fig2_i_hmm.json")).unwrap()).unwrap();
    assert_eq!(report["degenerate"], false);

    let out = tmp.path().join("bins");
    ok(&["analyze", s(&trace), "--bins", "0:340", "--init-means", "60,10", "--init-switch", "0.02", "--out", s(&out)]);
    assert_eq!(listed(&out), ["fig2_0_340_hmm.json", "fig2_0_340_posteriors.csv"]);

    let o = cqed(&["analyze", s(&trace), "--region", "iv", "--out", s(&tmp.path().join("iv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_handles_several_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let traces = tmp.path().join("traces");
    for (stem, seed) in [("one", "1"), ("two", "2")] {
        ok(&["synth", "--duration", "2", "--seed", seed, "--stem", stem, "--out", s(&traces.join(stem))]);
    }
    let out = tmp.path().join("fit");
    let a = traces.join("one").join("one.csv");
    let b = traces.join("two").join("two.csv");
    ok(&["analyze", s(&a), s(&b), "--jobs", "2", "--out", s(&out)]);
    assert_eq!(listed(&out), ["one_hmm.json", "one_posteriors.csv", "two_hmm.json", "two_posteriors.csv"]);
}
