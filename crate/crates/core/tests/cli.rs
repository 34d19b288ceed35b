//! End-to-end checks of the command-line binary: subcommands, artifacts,
//! exit codes, and determinism of written files.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photon-fusion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("config.toml");
    std::fs::write(
        &path,
        "schemes = [\"regular\", \"boosted-phi+\"]\n\
         bisection_tolerance = 1e-3\n\
         [axes.p_eff]\nmin = 0.9\nmax = 1.0\npoints = 5\n\
         [axes.bs_loss_db]\nmin = 0.0\nmax = 0.2\npoints = 5\n\
         [axes.prop_loss_db_per_cm]\nmin = 0.0\nmax = 2.0\npoints = 5\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let output = run(&["validate", "--config", &config]);
    assert!(output.status.success(), "{}", stdout(&output));
    let text = stdout(&output);
    assert!(text.contains("scheme regular"));
    assert!(text.contains("validate: ok"));
}

#[test]
fn threshold_prints_headline_value() {
    let output = run(&[
        "threshold",
        "--scheme",
        "boosted-phi+",
        "--network",
        "six_ring",
        "--encoding",
        "shor_2_2",
        "--axis",
        "p_eff",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    let value: f64 = text
        .lines()
        .find_map(|l| l.split("threshold ").nth(1))
        .and_then(|rest| rest.split_whitespace().next())
        .expect("threshold line")
        .parse()
        .unwrap();
    assert!((value - 0.973).abs() < 0.002, "{value}");
}

#[test]
fn threshold_reports_uncorrectable_scheme() {
    let output = run(&[
        "threshold",
        "--scheme",
        "regular",
        "--network",
        "four_star",
        "--encoding",
        "bare",
        "--axis",
        "p_eff",
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("not correctable even without loss"));
}

#[test]
fn report_writes_normative_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("report");
    let output = run(&["report", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(output.status.success(), "{}", stdout(&output));

    let csv = std::fs::read_to_string(out.join("thresholds.csv")).unwrap();
    assert!(csv.starts_with(
        "scheme,ancilla,p_succ,network,encoding,axis,threshold_value,units"
    ));
    // 2 schemes x 2 networks x 2 encodings x 3 axes
    assert_eq!(csv.lines().count(), 1 + 24);
    assert!(csv.contains("regular,none,0.500000,six_ring,bare,p_eff,none,probability"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("thresholds.json")).unwrap())
            .unwrap();
    assert_eq!(json.as_array().unwrap().len(), 24);
}

#[test]
fn sweep_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = run(&[
            "sweep",
            "--config",
            &config,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", stdout(&output));
    }
    let mut names: Vec<String> = std::fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    // 2 schemes x 3 slices x (1 csv + 4 svg)
    assert_eq!(names.len(), 30);
    for name in &names {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between runs");
    }
}

#[test]
fn joint_check_exit_codes() {
    let good = run(&["joint-check", "--p-det", "0.99"]);
    assert_eq!(good.status.code(), Some(0));
    assert!(stdout(&good).contains("correctable"));

    let bad = run(&[
        "joint-check",
        "--p-det",
        "0.97",
        "--bs-loss-db",
        "0.048",
        "--prop-loss-db-per-cm",
        "0.48",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("NOT correctable"));
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(
        run(&["threshold", "--scheme", "nonexistent"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["threshold", "--scheme", "regular", "--axis", "bogus"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "layer_length_um = -1.0\n").unwrap();
    assert_eq!(
        run(&["validate", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn custom_circuit_file_defines_a_scheme() {
    let dir = tempfile::tempdir().unwrap();
    // the regular interferometer written as a circuit file
    let circuit = dir.path().join("custom.txt");
    std::fs::write(
        &circuit,
        "modes 4\nbs 0 0 1\nbs 0 2 3\nswap 1 1 2\nbs 2 0 1\nbs 2 2 3\nswap 3 1 2\n",
    )
    .unwrap();
    let output = run(&["describe", "--circuit", circuit.to_str().unwrap()]);
    assert!(output.status.success(), "{}", stdout(&output));
    let text = stdout(&output);
    assert!(text.contains("scheme custom"));
    assert!(text.contains("p_succ 0.500000000000"));
    assert!(text.contains("failure_basis XX"));
}
