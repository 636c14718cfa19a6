//! End-to-end tests of the binary: every subcommand, the exit-code
//! contract, and the file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use equiangular::io::{MatrixJson, ProgramJson, ProjectionJson, SequenceJson};
use equiangular::projection::{octonion_graph_projection, Projection};
use equiangular::synthesis::embed_su4;
use nalgebra::{Complex, DMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_equiangular"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

#[test]
fn verify_octonions_exit_codes() {
    let ok = run(&["verify-octonions"]);
    assert_eq!(ok.status.code(), Some(0));
    let report = stdout_json(&ok);
    assert_eq!(report["pass"], true);

    let fault = run(&["verify-octonions", "--inject-table-fault"]);
    assert_eq!(fault.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&fault.stdout).unwrap();
    assert_eq!(report["pass"], false);
    let table_check = &report["checks"][0];
    assert_eq!(table_check["pass"], false);
    assert!(
        table_check["detail"].as_str().unwrap().contains("e_1·e_2"),
        "failure names the corrupted identity: {table_check}"
    );

    let bad = run(&["verify-octonions", "--no-such-flag"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn synth_then_eval_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let program = ProgramJson {
        terms: vec![equiangular::io::TermJson {
            k: 1,
            j: 2,
            t: std::f64::consts::FRAC_PI_4,
        }],
    };
    let prog_path = write_json(dir.path(), "prog.json", &program);
    let seq_path = dir.path().join("seq.json");

    let out = run(&[
        "synth",
        prog_path.to_str().unwrap(),
        "--out",
        seq_path.to_str().unwrap(),
    ]);
    let summary = stdout_json(&out);
    assert_eq!(summary["labels"], 2);

    let seq: SequenceJson =
        serde_json::from_str(&std::fs::read_to_string(&seq_path).unwrap()).unwrap();
    assert_eq!(seq.labels.len(), 2);
    assert_eq!(seq.labels[0].axis, 1);
    assert!((seq.labels[0].c - 1.0).abs() <= 1e-12);
    assert_eq!(seq.labels[1].axis, 2);

    let eval = run(&["eval-seq", seq_path.to_str().unwrap()]);
    let value = stdout_json(&eval);
    assert!(value["scale"].as_f64().unwrap() > 0.0);
    assert_eq!(value["angles"].as_array().unwrap().len(), 3);

    // Empty sequence: identity gate, scale 1.
    let empty = write_json(dir.path(), "empty.json", &SequenceJson { labels: vec![] });
    let eval = run(&["eval-seq", empty.to_str().unwrap()]);
    let value = stdout_json(&eval);
    assert_eq!(value["scale"].as_f64().unwrap(), 1.0);
    let gate: MatrixJson = serde_json::from_value(value["gate"].clone()).unwrap();
    assert_eq!(gate.to_real().unwrap(), DMatrix::<f64>::identity(8, 8));
}

#[test]
fn decompose_embedded_su4_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = StdRng::seed_from_u64(77);
    let g = DMatrix::<Complex<f64>>::from_fn(4, 4, |_, _| {
        Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let q = g.qr().q();
    let target = embed_su4(&q).unwrap();
    let target_path = write_json(dir.path(), "target.json", &MatrixJson::from_real(&target));
    let prog_path = dir.path().join("prog.json");

    let out = run(&[
        "decompose",
        target_path.to_str().unwrap(),
        "--out",
        prog_path.to_str().unwrap(),
        "--tolerance",
        "1e-7",
    ]);
    let summary = stdout_json(&out);
    assert!(summary["residual"].as_f64().unwrap() <= 1e-7);

    let seq_path = dir.path().join("seq.json");
    run(&[
        "synth",
        prog_path.to_str().unwrap(),
        "--out",
        seq_path.to_str().unwrap(),
    ]);
    let eval = run(&["eval-seq", seq_path.to_str().unwrap()]);
    let value = stdout_json(&eval);
    let gate: MatrixJson = serde_json::from_value(value["gate"].clone()).unwrap();
    let diff = (gate.to_real().unwrap() - &target).amax();
    assert!(diff <= 1e-6, "end-to-end residual {diff:.3e}");

    // A reflection is rejected as malformed input (exit 2).
    let mut refl = DMatrix::<f64>::identity(8, 8);
    refl[(0, 0)] = -1.0;
    let refl_path = write_json(dir.path(), "refl.json", &MatrixJson::from_real(&refl));
    let out = run(&[
        "decompose",
        refl_path.to_str().unwrap(),
        "--out",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // An impossible budget reports the residual and exits 1.
    let out = run(&[
        "decompose",
        target_path.to_str().unwrap(),
        "--out",
        dir.path().join("y.json").to_str().unwrap(),
        "--max-factors",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["error"], "budget-exceeded");
    assert!(report["residual"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_is_deterministic_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let program = ProgramJson {
        terms: vec![
            equiangular::io::TermJson { k: 1, j: 2, t: 0.7 },
            equiangular::io::TermJson { k: 3, j: 4, t: -0.4 },
        ],
    };
    let prog_path = write_json(dir.path(), "prog.json", &program);
    let seq_path = dir.path().join("seq.json");
    run(&[
        "synth",
        prog_path.to_str().unwrap(),
        "--out",
        seq_path.to_str().unwrap(),
    ]);

    let args = [
        "simulate",
        "--seq",
        seq_path.to_str().unwrap(),
        "--trials",
        "1",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "byte-identical outputs for a fixed seed");

    // Trace: NDJSON, one event per line, schema fields present.
    let trace_path = dir.path().join("trace.ndjson");
    let out = run(&[
        "simulate",
        "--seq",
        seq_path.to_str().unwrap(),
        "--trials",
        "1",
        "--seed",
        "7",
        "--trace",
        trace_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    for line in trace.trim_end().split('\n') {
        let event: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(event["branch_probability"].as_f64().unwrap() <= 1.0);
        assert!(event.get("step_index").is_some());
        assert!(event.get("retry_depth").is_some());
    }

    // Tracing multiple trials is a usage error.
    let out = run(&[
        "simulate",
        "--seq",
        seq_path.to_str().unwrap(),
        "--trials",
        "2",
        "--trace",
        trace_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // The seed falls back to the environment variable.
    let with_env = bin()
        .args(["simulate", "--seq", seq_path.to_str().unwrap(), "--trials", "1"])
        .env("EQUIANGULAR_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(a.stdout, with_env.stdout);
}

#[test]
fn simulate_slicing_improves_base_step() {
    let dir = tempfile::tempdir().unwrap();
    let program = ProgramJson {
        terms: vec![equiangular::io::TermJson { k: 1, j: 2, t: 1.2 }],
    };
    let prog_path = write_json(dir.path(), "prog.json", &program);
    let freq0 = |slice: &str| -> f64 {
        let out = run(&[
            "simulate",
            "--program",
            prog_path.to_str().unwrap(),
            "--slice",
            slice,
            "--trials",
            "3000",
            "--seed",
            "11",
        ]);
        let value = stdout_json(&out);
        value["empirical_step_success"]["0"].as_f64().unwrap()
    };
    let s1 = freq0("1");
    let s4 = freq0("4");
    assert!(
        s4 > s1,
        "slice 4 first-step success {s4:.3} should beat slice 1 {s1:.3}"
    );
}

#[test]
fn check_pair_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p = Projection::<f64>::base(8);
    let q = octonion_graph_projection(&equiangular::Oct::basis(1));
    let p_path = write_json(
        dir.path(),
        "p.json",
        &ProjectionJson::from_projection_real(&p),
    );
    let q_path = write_json(
        dir.path(),
        "q.json",
        &ProjectionJson::from_projection_real(&q),
    );
    let out = run(&["check-pair", p_path.to_str().unwrap(), q_path.to_str().unwrap()]);
    let report = stdout_json(&out);
    assert_eq!(report["is_strong"], true);
    let alpha = report["alpha"].as_f64().unwrap();
    assert!((alpha * alpha - 0.5).abs() <= 1e-10);

    // Malformed input exits 2.
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = run(&["check-pair", bad.to_str().unwrap(), q_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn family_audit_builtin_and_planes() {
    let out = run(&["family-audit", "--builtin", "octonion-basis"]);
    let value = stdout_json(&out);
    assert_eq!(value["family"]["mutually_strong"], true);
    assert_eq!(value["family"]["size"], 8);

    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../equiangular/tests/data/packing_m4.json"
    );
    let out = run(&["family-audit", "--planes", fixture, "--closure"]);
    let value = stdout_json(&out);
    assert_eq!(value["closure"]["is_finite"], true);
    assert!(value["closure"]["elements_found"].as_u64().unwrap() <= 16);
    // The full 18-plane family is not mutually equiangular (planes share
    // lines); the pairwise table carries the actual verdicts.
    assert_eq!(value["family"]["size"], 18);
    assert_eq!(value["family"]["mutually_equiangular"], false);
}

#[test]
fn family_audit_projection_file() {
    let dir = tempfile::tempdir().unwrap();
    let projections = vec![
        ProjectionJson::from_projection_real(&Projection::<f64>::base(8)),
        ProjectionJson::from_projection_real(&octonion_graph_projection(&equiangular::Oct::basis(
            3,
        ))),
        ProjectionJson::from_projection_real(&octonion_graph_projection(
            &equiangular::Oct::basis(5),
        )),
    ];
    let path = write_json(dir.path(), "family.json", &projections);
    let out = run(&["family-audit", "--projections", path.to_str().unwrap()]);
    let value = stdout_json(&out);
    assert_eq!(value["family"]["mutually_strong"], true);
    assert_eq!(
        value["family"]["pairwise"].as_array().unwrap().len(),
        3,
        "full pairwise table"
    );
}

#[test]
fn sic_check_modes() {
    let out = run(&["sic-check", "--formula-only", "--n", "2"]);
    let value = stdout_json(&out);
    assert!((value["alpha2_formula"].as_f64().unwrap() - 1.0 / 3.0).abs() <= 1e-15);

    let out = run(&["sic-check", "--demo"]);
    assert_eq!(out.status.code(), Some(0));
    let value = stdout_json(&out);
    assert_eq!(value["passes"], true);

    // A tampered family is a verified failure: exit 1.
    let dir = tempfile::tempdir().unwrap();
    let mut ops = equiangular::family::tetrahedron_sic();
    ops[0] = ops[0].clone() * Complex::new(1.25, 0.0);
    let file = equiangular::io::SicFileJson {
        n: 2,
        operators: ops.iter().map(MatrixJson::from_complex).collect(),
    };
    let path = write_json(dir.path(), "ops.json", &file);
    let out = run(&["sic-check", "--operators", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passes"], false);
}

#[test]
fn spin_demo_ranks() {
    let out = run(&["spin-demo"]);
    let value = stdout_json(&out);
    assert_eq!(value["rank"], 10);
    assert_eq!(value["complement_rank"], 6);
    assert_eq!(value["non_equiangular_found"], true);
    let human = String::from_utf8_lossy(&out.stderr);
    assert!(human.contains("rank 10"));
}

#[test]
fn pretty_flag_formats_output() {
    let compact = run(&["sic-check", "--formula-only", "--n", "2"]);
    let pretty = run(&["sic-check", "--formula-only", "--n", "2", "--pretty"]);
    assert!(compact.stdout.len() < pretty.stdout.len());
    let a: serde_json::Value = serde_json::from_slice(&compact.stdout).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&pretty.stdout).unwrap();
    assert_eq!(a, b);
}
