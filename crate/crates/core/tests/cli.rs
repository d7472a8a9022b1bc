use std::path::PathBuf;

use dissipgen::cli::run;

fn config(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    p.to_str().unwrap().to_string()
}

fn exec(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["dissipgen"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_worked_pencil_and_quadruple() {
    let (code, out, _) = exec(&["verify", "--config", &config("worked_pencil.json")]);
    assert_eq!(code, 0, "{out}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["pass"], true);
    let checks = report["checks"].as_array().unwrap();
    let green = checks.iter().find(|c| c["name"].as_str().unwrap().contains("green identity")).unwrap();
    assert!(green["residual"].as_f64().unwrap() <= 1e-12);

    let (code, out, _) = exec(&["verify", "--config", &config("worked_quadruple.json")]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn verify_zeroed_gp_fails_surjectivity() {
    let (code, out, _) = exec(&["verify", "--config", &config("zeroed_gp_quadruple.json")]);
    assert_eq!(code, 1);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.iter().any(|n| n.contains("individual surjectivity")), "{failed:?}");
}

#[test]
fn schema_and_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.json", "{ not json");
    assert_eq!(exec(&["verify", "--config", &bad]).0, 2);
    let unknown = write_temp(&dir, "unknown.json", r#"{"k0":1,"kp":1,"km":1,"extra":0}"#);
    assert_eq!(exec(&["synth", "--config", &unknown]).0, 2);
    assert_eq!(exec(&["verify", "--config", "/nonexistent/file.json"]).0, 2);
    assert_eq!(exec(&["frobnicate"]).0, 2);
    assert_eq!(exec(&["verify"]).0, 2);
    assert_eq!(exec(&["synth", "--config", &config("synth.json"), "--tol", "abc"]).0, 2);
    assert_eq!(exec(&["--help"]).0, 0);
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(exec(&["synth", "--config", &config("synth.json"), "--out", a.to_str().unwrap()]).0, 0);
    assert_eq!(exec(&["synth", "--config", &config("synth.json"), "--out", b.to_str().unwrap()]).0, 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (_, s1, _) = exec(&["synth", "--config", &config("synth.json"), "--seed", "8"]);
    let (_, s2, _) = exec(&["synth", "--config", &config("synth.json")]);
    assert_ne!(s1, s2);
    // The synthesized pencil verifies.
    assert_eq!(exec(&["verify", "--config", a.to_str().unwrap()]).0, 0);
}

#[test]
fn dirichlet_spectrum_first_entry() {
    let (code, out, _) = exec(&["spectrum", "--config", &config("dirichlet_spectrum.json")]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["k", "re_lambda", "im_lambda"]);
    let first = rdr.records().next().unwrap().unwrap();
    let lam: f64 = first[1].parse().unwrap();
    let want = -std::f64::consts::PI.powi(2);
    assert!(((lam - want) / want).abs() < 0.01, "{lam}");
}

#[test]
fn enumerate_synth_pencil() {
    let (code, out, _) = exec(&["enumerate", "--config", &config("enumerate_synth.json")]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 100);
    for r in &rows {
        assert_eq!(&r[col("dissipative")], "true");
        let smin: f64 = r[col("sigma_min")].parse().unwrap();
        assert_eq!(&r[col("unitary_phi")] == "true", smin >= 1.0 - 1e-9);
        assert_eq!(&r[col("regime")], "generic");
    }
    let (_, again, _) = exec(&["enumerate", "--config", &config("enumerate_synth.json")]);
    assert_eq!(out, again);
}

#[test]
fn evolve_transport_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let (code, stdout, _) =
        exec(&["evolve", "--config", &config("transport_periodic.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().take(4).collect::<Vec<_>>(), ["t", "energy", "flux_plus", "flux_minus"]);
    let energies: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert_eq!(energies.len(), 21);
    assert!((energies[20] - energies[0]).abs() <= 1e-9 * energies[0]);
    let final_line = stdout.trim();
    let final_energy: f64 = final_line.strip_prefix("final_energy=").unwrap().parse().unwrap();
    assert_eq!(final_energy, energies[20]);
}

#[test]
fn evolve_wave_absorbs() {
    let (code, out, _) = exec(&["evolve", "--config", &config("wave_absorbing.json")]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let energies: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert!(energies.last().unwrap() / energies[0] <= 0.05);
}

#[test]
fn evolve_off_domain_exits_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_temp(
        &dir,
        "off.json",
        r#"{"model": {"kind": "transport", "n": 8, "phi": {"rows": 1, "cols": 1, "data": [[0, 0]]}},
            "u0": {"gaussian": {"center": 1.0, "width": 0.3}},
            "times": {"t_end": 1.0, "steps": 2}}"#,
    );
    let out = dir.path().join("never.csv");
    let (code, _, err) = exec(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.to_lowercase().contains("domain"), "{err}");
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn tolerance_flag_beats_environment() {
    // Only the flag path is exercised here; the environment is process-global.
    let (code, _, _) = exec(&["verify", "--config", &config("worked_pencil.json"), "--tol", "1e-6"]);
    assert_eq!(code, 0);
    let (_, out, _) = exec(&["verify", "--config", &config("worked_pencil.json"), "--tol", "1e-6"]);
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["tolerance"], 1e-6);
}
