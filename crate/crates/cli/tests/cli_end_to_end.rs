//! Binary-level checks: exit codes, determinism and table shape.

use std::path::Path;
use std::process::Command;

fn omk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omk"))
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn validate_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "good.omk",
        "scenario = instability_scan\ndelta_over_omega_m_start = -0.75\n\
         delta_over_omega_m_stop = -0.6\ndelta_over_omega_m_points = 5\n\
         gamma_over_kappa = 1e-3\nn_mth = 650\n",
    );
    let st = omk().args(["validate", good.to_str().unwrap()]).status().unwrap();
    assert!(st.success());

    // empty sweep range: config error, exit 2
    let bad = write(
        dir.path(),
        "bad.omk",
        "scenario = instability_scan\ndelta_over_omega_m_start = -0.75\n\
         delta_over_omega_m_stop = -0.6\ndelta_over_omega_m_points = 0\n",
    );
    let st = omk().args(["validate", bad.to_str().unwrap()]).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = omk().args(["run", bad.to_str().unwrap()]).status().unwrap();
    assert_eq!(st.code(), Some(2));

    // missing file: config error
    let st = omk().args(["run", "/nonexistent/file.omk"]).status().unwrap();
    assert_eq!(st.code(), Some(2));

    // infeasible lindblad regime refused up front
    let hot = write(
        dir.path(),
        "hot.omk",
        "scenario = spectrum_point\nsolver = lindblad\ndelta_over_omega_m = -0.65\n\
         gamma_over_kappa = 1e-3\nn_mth = 650\n",
    );
    let st = omk().args(["validate", hot.to_str().unwrap()]).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn run_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "coop.omk",
        "scenario = cooperativity_sweep\nsolver = leading\n\
         delta_over_omega_m_start = -1.9\ndelta_over_omega_m_stop = -0.6\n\
         delta_over_omega_m_points = 9\ngamma_over_kappa = 1e-4\nn_mth = 0\n",
    );
    let out1 = dir.path().join("o1");
    let out2 = dir.path().join("o2");
    for out in [&out1, &out2] {
        let st = omk()
            .args(["run", sc.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed-check"])
            .status()
            .unwrap();
        assert!(st.success());
    }
    let csv1 = std::fs::read(out1.join("cooperativity_sweep.csv")).unwrap();
    let csv2 = std::fs::read(out2.join("cooperativity_sweep.csv")).unwrap();
    assert_eq!(csv1, csv2, "runs are not byte-identical");

    let text = String::from_utf8(csv1).unwrap();
    assert!(!text.contains('\r'), "CSV must use LF line endings");
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("solver,delta_over_omega_m,"));
    let mut count = 0;
    for line in lines {
        assert!(line.starts_with("leading,"), "row missing solver tag: {line}");
        count += 1;
    }
    assert_eq!(count, 9);

    // summary is valid JSON carrying the config echo and tool version
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out1.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["tool"], "omk");
    assert_eq!(summary["scenario"], "cooperativity_sweep");
    assert!(summary["version"].as_str().is_some());
    assert!(summary["config"]["scenario"].as_str().is_some());
}

#[test]
fn workers_flag_preserves_output_order() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "coop.omk",
        "scenario = cooperativity_sweep\nsolver = leading\n\
         delta_over_omega_m_start = -1.8\ndelta_over_omega_m_stop = -0.9\n\
         delta_over_omega_m_points = 7\n",
    );
    let single = dir.path().join("w1");
    let multi = dir.path().join("w4");
    for (out, workers) in [(&single, "1"), (&multi, "4")] {
        let st = omk()
            .args([
                "run",
                sc.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--workers",
                workers,
            ])
            .status()
            .unwrap();
        assert!(st.success());
    }
    assert_eq!(
        std::fs::read(single.join("cooperativity_sweep.csv")).unwrap(),
        std::fs::read(multi.join("cooperativity_sweep.csv")).unwrap(),
        "worker count changed the table"
    );
}

#[test]
fn two_phonon_and_classical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "tp.omk",
        "scenario = two_phonon\ndelta_over_omega_m = -1.997\ngamma_over_kappa = 1e-4\n\
         g_over_kappa = 0.1\nn_mth = 100\nband_half_width = 1.5\n",
    );
    let out = dir.path().join("out");
    let st = omk()
        .args(["run", sc.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(out.join("two_phonon.csv")).unwrap();
    assert!(text.lines().next().unwrap().contains("s_d_asymptotic"));
    assert!(text.lines().count() > 100);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap())
            .unwrap();
    let tp = &summary["diagnostics"][0]["two_phonon"];
    assert!(tp["classical_weight"].as_f64().unwrap() > 0.0);

    let sc = write(
        dir.path(),
        "cl.omk",
        "scenario = classical_check\ndelta_over_omega_m = -1.997\nepsilon = 0.1\n\
         series_cutoff = 12\ng_over_kappa = 0.1\nn_mth = 100\n",
    );
    let out2 = dir.path().join("out2");
    let st = omk()
        .args(["run", sc.to_str().unwrap(), "--out", out2.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out2.join("summary.json")).unwrap())
            .unwrap();
    let cc = &summary["diagnostics"][0]["classical_check"];
    let lhs = cc["parseval_series"].as_f64().unwrap();
    let rhs = cc["parseval_quadrature"].as_f64().unwrap();
    assert!((lhs - rhs).abs() / rhs < 1e-8);
    assert!(cc["weight_identity_worst_rel"].as_f64().unwrap() < 1e-10);
}
