use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn hullspec(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hullspec"))
        .args(args)
        .env_remove("HULLSPEC_TOLERANCES")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run(scenario: &str, config: &Path, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let mut args = vec![scenario, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    hullspec(&args)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn dynsys_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run("dynsys-check", &scenarios().join("fibonacci_dynsys.toml"), dir.path(), &[]);
    assert_eq!(code, 0, "{stdout}");
    let cert = json(&dir.path().join("certificate.json"));
    assert_eq!(cert["minimality"]["primitivity"]["matrix"], serde_json::json!([[2, 1], [1, 1]]));

    let refuted = dir.path().join("refuted");
    let (code, _, _) = run("dynsys-check", &scenarios().join("full_pm1_dynsys.toml"), &refuted, &[]);
    assert_eq!(code, 2);
    let cert = json(&refuted.join("certificate.json"));
    let patterns: Vec<&str> = cert["minimality"]["witnesses"].as_array().unwrap().iter().map(|w| w["pattern"].as_str().unwrap()).collect();
    assert!(patterns.contains(&"1,1,1"), "{patterns:?}");
}

#[test]
fn bounded_search_failures_are_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short_search.toml");
    std::fs::write(
        &cfg,
        "[hull]\nname = \"full_pm1\"\nrank = 1\n\n[[configurations]]\nrule = \"explicit\"\nseed = 42\n\n[certify]\nn = 8\nradius = 50\n",
    )
    .unwrap();
    // 256 blocks of length 8 cannot all fit in ball(50)
    let (code, stdout, _) = run("dynsys-check", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code, 3, "{stdout}");
}

#[test]
fn periodic_constancy_and_identity_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p2");
    let (code, stdout, stderr) = run("constancy", &scenarios().join("period2_constancy.toml"), &out, &[]);
    assert_eq!(code, 0, "{stdout}{stderr}");
    let report = json(&out.join("constancy_report.json"));
    for pair in report["spectral"].as_array().unwrap() {
        for d in pair["distances"].as_array().unwrap() {
            assert!(d.as_f64().unwrap() <= 1e-12, "{d}");
        }
    }

    let out = dir.path().join("id");
    let (code, stdout, _) = run("pseudospectrum", &scenarios().join("identity_pseudospectrum.toml"), &out, &["--svg"]);
    assert_eq!(code, 0, "{stdout}");
    let csv = std::fs::read_to_string(out.join("grid_c0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re,im,sigma_min"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2500);
    let at_one = rows.iter().find(|r| r[0] == 1.0 && r[1] == 0.0).expect("node at 1 + 0i");
    assert_eq!(at_one[2], 0.0);
    for r in &rows {
        assert!((r[2] - ((r[0] - 1.0).powi(2) + r[1].powi(2)).sqrt()).abs() < 1e-14);
    }
    assert!(out.join("grid_c0.svg").exists());
}

#[test]
fn manifest_lists_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run("spectrum", &scenarios().join("floquet_q2.toml"), dir.path(), &["--threads", "2"]);
    assert_eq!(code, 0);
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["scenario"], "spectrum");
    assert_eq!(manifest["threads"], 2);
    assert_eq!(manifest["exit_code"], 0);
    assert!(manifest["version"].is_string() && manifest["wall_time_seconds"].is_number());
    let echoed = hullspec::experiment::ExperimentConfig::parse(manifest["config_toml"].as_str().unwrap()).unwrap();
    let original = hullspec::experiment::ExperimentConfig::load(&scenarios().join("floquet_q2.toml")).unwrap();
    assert_eq!(echoed.to_toml().unwrap(), original.to_toml().unwrap());
    for a in manifest["artifacts"].as_array().unwrap() {
        let path = dir.path().join(a["path"].as_str().unwrap());
        assert_eq!(std::fs::metadata(&path).unwrap().len(), a["bytes"].as_u64().unwrap());
    }
    assert!(manifest["tolerances"]["entries"]["floquet_q2"]["threshold"].as_f64().unwrap() >= 1e-8);
}

#[test]
fn csv_bytes_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("identity_pseudospectrum.toml");
    let (a, b) = (dir.path().join("t1"), dir.path().join("t4"));
    assert_eq!(run("pseudospectrum", &cfg, &a, &["--threads", "1"]).0, 0);
    assert_eq!(run("pseudospectrum", &cfg, &b, &["--threads", "4"]).0, 0);
    for name in ["grid_c0.csv", "grid_c1.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
}

#[test]
fn config_errors_exit_1_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[hull]\nname = \"fibonacci\"\nshape = \"round\"\n").unwrap();
    let (code, _, stderr) = run("spectrum", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(code, 1);
    assert!(stderr.contains("line 3"), "{stderr}");
    let (code, _, _) = hullspec(&["spectra", "--config", cfg.to_str().unwrap()]);
    assert_ne!(code, 0);
}

#[test]
fn tolerance_file_override() {
    let dir = tempfile::tempdir().unwrap();
    let strict = dir.path().join("strict.json");
    std::fs::write(
        &strict,
        r#"{"tool_version":"0","entries":{"floquet_q3":{"measured":0.0,"floor":0.0,"threshold":1e-30}}}"#,
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hullspec"))
        .args(["spectrum", "--config"])
        .arg(scenarios().join("floquet_q3.toml"))
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("HULLSPEC_TOLERANCES", &strict)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
}
