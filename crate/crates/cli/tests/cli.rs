//! End-to-end tests driving the installed binary: exit codes, artifact
//! bytes, config-file precedence, and the headline numbers of each
//! subcommand.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decohist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "args {args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn assert_validation_failure(args: &[&str], needle: &str) {
    let out = run(args);
    assert_eq!(out.status.code(), Some(1), "args {args:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(needle), "stderr {stderr:?} lacks {needle:?}");
    assert!(out.stdout.is_empty());
}

fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).expect("artifact exists");
    serde_json::from_str(&text).expect("artifact is JSON")
}

#[test]
fn not_circuit_on_a_basis_state_has_one_certain_history() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("d.json");
    let circuit = repo_path("circuits/not.cir");
    let summary = run_ok(&[
        "decohere",
        "--circuit",
        circuit.to_str().unwrap(),
        "--state",
        "basis:0",
        "--grain",
        "full",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(summary.starts_with("decohere:"), "{summary}");
    assert!(summary.contains("max_re_offdiag="), "{summary}");

    let artifact = read_json(&out_path);
    let diag = artifact["diag"].as_array().unwrap();
    assert_eq!(diag.len(), 1);
    assert_eq!(diag[0]["history"], "0=0;0=1");
    assert_eq!(diag[0]["p"], 1.0);
    assert_eq!(artifact["weakly_decoherent"], true);
}

#[test]
fn shallow_enumeration_finds_exactly_the_empty_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("e.csv");
    run_ok(&["enumerate", "--l-max", "3", "--out", out_path.to_str().unwrap()]);
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(
        csv,
        "output_hex,output_len,mass,shortest_program_bits\n,0,0.125,3\n"
    );
}

#[test]
fn missing_circuit_file_fails_validation() {
    assert_validation_failure(&["decohere", "--circuit", "missing.cir"], "missing.cir");
}

#[test]
fn unknown_flags_fail_validation() {
    let out = run(&["enumerate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--no-such-flag"));
}

#[test]
fn help_lists_every_flag_with_its_default() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));

    let khat_help = run(&["khat", "--help"]);
    assert_eq!(khat_help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&khat_help.stdout).into_owned();
    for flag in [
        "--target",
        "--l-max",
        "--budget",
        "--witness-file",
        "--format",
        "--out",
        "--config",
    ] {
        assert!(text.contains(flag), "khat help lacks {flag}");
    }
    assert!(text.contains("[default: 18]"));
    assert!(text.contains("[default: 4096]"));
    assert!(text.contains("[default: khat.json]"));
}

#[test]
fn malformed_circuits_and_witnesses_fail_validation() {
    let dir = tempfile::tempdir().unwrap();

    let circuit = dir.path().join("bad.cir");
    std::fs::write(&circuit, "WIDTH 2\nNOT 7\n").unwrap();
    assert_validation_failure(&["decohere", "--circuit", circuit.to_str().unwrap()], "site");

    let witness = dir.path().join("bad.txt");
    std::fs::write(&witness, "01x\n").unwrap();
    assert_validation_failure(
        &[
            "khat",
            "--target",
            "0",
            "--l-max",
            "6",
            "--witness-file",
            witness.to_str().unwrap(),
        ],
        "bit",
    );

    assert_validation_failure(&["khat", "--target", "0^x"], "bad target");
    assert_validation_failure(&["advantage", "--l-max", "6"], "--target is required");
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = repo_path("circuits/all_gates.cir");

    let first = dir.path().join("a.json");
    let second = dir.path().join("b.json");
    for path in [&first, &second] {
        run_ok(&[
            "decohere",
            "--circuit",
            circuit.to_str().unwrap(),
            "--state",
            "random:7",
            "--grain",
            "local",
            "--out",
            path.to_str().unwrap(),
        ]);
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );

    let s1 = dir.path().join("s1.csv");
    let s2 = dir.path().join("s2.csv");
    for path in [&s1, &s2] {
        run_ok(&[
            "sample",
            "--samples",
            "20000",
            "--seed",
            "9",
            "--bit-cap",
            "14",
            "--out",
            path.to_str().unwrap(),
        ]);
    }
    assert_eq!(std::fs::read(&s1).unwrap(), std::fs::read(&s2).unwrap());
}

#[test]
fn config_files_supply_defaults_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let by_flag = dir.path().join("flag.csv");
    run_ok(&["enumerate", "--l-max", "3", "--out", by_flag.to_str().unwrap()]);

    let by_config = dir.path().join("config.csv");
    let config = dir.path().join("enum.cfg");
    std::fs::write(
        &config,
        format!(
            "# depth for the smoke run\nl-max = 3\nout = {}\n",
            by_config.display()
        ),
    )
    .unwrap();
    run_ok(&["enumerate", "--config", config.to_str().unwrap()]);
    assert_eq!(
        std::fs::read(&by_flag).unwrap(),
        std::fs::read(&by_config).unwrap()
    );

    // An explicit flag shadows the config value for the same key.
    let deeper = dir.path().join("deeper.csv");
    run_ok(&[
        "enumerate",
        "--config",
        config.to_str().unwrap(),
        "--l-max",
        "6",
        "--out",
        deeper.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&deeper).unwrap();
    assert!(text.lines().count() > 2, "depth 6 finds more than one output");

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "l-max=3\nbogus=1\n").unwrap();
    assert_validation_failure(&["enumerate", "--config", bad.to_str().unwrap()], "bogus");
}

#[test]
fn record_demo_contrasts_interference_with_decoherence() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("rd.json");
    run_ok(&["record-demo", "--out", out_path.to_str().unwrap()]);
    let artifact = read_json(&out_path);

    let bare = &artifact["no_record"];
    assert!((bare["max_re_offdiag"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(bare["weakly_decoherent"], false);

    let recorded = &artifact["record"];
    assert!(recorded["max_abs_offdiag"].as_f64().unwrap() < 1e-12);
    assert_eq!(recorded["weakly_decoherent"], true);
    let diag = recorded["diag"].as_array().unwrap();
    assert_eq!(diag.len(), 2);
    for entry in diag {
        assert!((entry["p"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn chain_root_reaches_all_three_sites() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("h.json");
    let circuit = repo_path("circuits/cnot_chain.cir");
    run_ok(&[
        "hamiltonian",
        "--circuit",
        circuit.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let artifact = read_json(&out_path);
    assert_eq!(artifact["step_supports"], serde_json::json!([[0, 1], [1, 2]]));
    assert_eq!(artifact["root_support"], serde_json::json!([0, 1, 2]));
    assert!(artifact["spectrum_err"].as_f64().unwrap() < 1e-9);
    assert!(artifact["root_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn witnessed_khat_and_advantage_beat_coin_flipping() {
    let dir = tempfile::tempdir().unwrap();
    let witness = repo_path("witnesses/zeros_64.txt");

    let khat_path = dir.path().join("k.json");
    run_ok(&[
        "khat",
        "--target",
        "0^64",
        "--l-max",
        "12",
        "--witness-file",
        witness.to_str().unwrap(),
        "--out",
        khat_path.to_str().unwrap(),
    ]);
    let khat = read_json(&khat_path);
    assert_eq!(khat["khat"], 38);
    assert_eq!(khat["source"], "witness");
    assert_eq!(khat["target_len"], 64);
    assert_eq!(khat["rejected_witnesses"].as_array().unwrap().len(), 0);

    let adv_path = dir.path().join("a.json");
    run_ok(&[
        "advantage",
        "--target",
        "0^64",
        "--l-max",
        "12",
        "--witness-file",
        witness.to_str().unwrap(),
        "--out",
        adv_path.to_str().unwrap(),
    ]);
    let adv = read_json(&adv_path);
    assert_eq!(adv["khat"], 38);
    assert_eq!(adv["bound_log2"], 26.0);
    assert_eq!(adv["bound_ratio"], (1u64 << 26) as f64);
}

#[test]
fn sampled_mode_and_csv_format_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = repo_path("circuits/adder_bit.cir");

    let sampled = dir.path().join("sampled.json");
    run_ok(&[
        "decohere",
        "--circuit",
        circuit.to_str().unwrap(),
        "--grain",
        "local",
        "--mode",
        "sampled",
        "--pairs",
        "2000",
        "--out",
        sampled.to_str().unwrap(),
    ]);
    let artifact = read_json(&sampled);
    assert_eq!(artifact["mode"], "sampled");
    assert_eq!(artifact["weakly_decoherent"], true);
    assert!((artifact["sum_diag"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let csv_path = dir.path().join("d.csv");
    run_ok(&[
        "decohere",
        "--circuit",
        circuit.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("history,p\n"));
    assert_eq!(csv.lines().count(), 9, "8 histories plus header");
}

#[test]
fn sample_json_accounts_for_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.json");
    run_ok(&[
        "sample",
        "--samples",
        "10000",
        "--seed",
        "5",
        "--format",
        "json",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    let artifact = read_json(&out_path);
    let n = artifact["n"].as_u64().unwrap();
    assert_eq!(n, 10_000);
    let accounted = artifact["halted"].as_u64().unwrap()
        + artifact["budget_exceeded"].as_u64().unwrap()
        + artifact["bits_exhausted"].as_u64().unwrap();
    assert_eq!(accounted, n);
    let tallied: u64 = artifact["outputs"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(tallied, artifact["halted"].as_u64().unwrap());
}
