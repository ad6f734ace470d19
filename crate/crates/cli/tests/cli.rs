//! End-to-end checks of the `mram` binary: exit codes, the compile/run
//! pipeline, and report determinism through the real CLI surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mram() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mram"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn guess_bit_json() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../machines/guess_bit.json")
}

#[test]
fn run_executes_a_program_and_reports_costs() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(
        dir.path(),
        "square.masm",
        "LOAD [0], #2\nMUL [0], [0], [0]\nMUL [0], [0], [0]\nHALT\n",
    );
    let out = run_ok(mram().arg("run").arg(&prog).args(["--cost", "both"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("output (cell 0): 16"), "{stdout}");
    assert!(stdout.contains("executed: 4"), "{stdout}");
    assert!(stdout.contains("unit_cost: 4"), "{stdout}");
    assert!(stdout.contains("log_cost:"), "{stdout}");
}

#[test]
fn run_with_trace_prints_one_record_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(dir.path(), "halt.masm", "HALT\n");
    let out = run_ok(mram().arg("run").arg(&prog).arg("--trace"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("HALT"), "{stdout}");
}

#[test]
fn faulting_program_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(dir.path(), "div0.masm", "DIV [0], #1, #0\nHALT\n");
    let out = mram().arg("run").arg(&prog).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("division by zero"));
}

#[test]
fn usage_errors_exit_two() {
    let out = mram().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_one() {
    let out = mram()
        .args(["fmt", "/nonexistent/file.masm"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fmt_canonicalizes_source() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(
        dir.path(),
        "messy.masm",
        "loop:  add   [2],[2],#1 ; bump\n jnz [2],loop\nhalt\n",
    );
    let out = run_ok(mram().arg("fmt").arg(&prog));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, "loop:\nADD [2], [2], #1\nJNZ [2], loop\nHALT\n");
}

#[test]
fn parse_diagnostics_exit_one_and_name_lines() {
    let dir = tempfile::tempdir().unwrap();
    let prog = write(dir.path(), "bad.masm", "ADD [0]\nFROB\n");
    let out = mram().arg("fmt").arg(&prog).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn ndtm_validate_oracle_simulate_agree() {
    let out = run_ok(mram().args(["ndtm", "validate", guess_bit_json()]));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "ok");

    let oracle = run_ok(mram().args([
        "ndtm",
        "oracle",
        guess_bit_json(),
        "--space",
        "2",
        "--time",
        "2",
    ]));
    let oracle_stdout = String::from_utf8(oracle.stdout).unwrap();
    assert!(oracle_stdout.starts_with("accepted"), "{oracle_stdout}");
    assert!(
        oracle_stdout.contains("witness (2 configurations)"),
        "{oracle_stdout}"
    );

    let sim = run_ok(mram().args([
        "ndtm",
        "simulate",
        guess_bit_json(),
        "--space",
        "2",
        "--time",
        "2",
    ]));
    let sim_stdout = String::from_utf8(sim.stdout).unwrap();
    assert!(sim_stdout.starts_with("accepted"), "{sim_stdout}");
    assert!(sim_stdout.contains("iterations: 1"), "{sim_stdout}");
}

#[test]
fn invalid_machine_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"states":["s"],"tape_alphabet":["_"],"blank":"_","input_alphabet":[],
           "transitions":[],"start":"nowhere","accept":[],"reject":[]}"#,
    );
    let out = mram()
        .arg("ndtm")
        .arg("validate")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

/// The full pipeline: compile the guess-bit machine, seed the initial
/// configuration index (0 for the all-blank start), run the program on
/// the vm, and read the accept verdict from cell 0.
#[test]
fn compile_then_run_accepts_guess_bit() {
    let dir = tempfile::tempdir().unwrap();
    let masm = dir.path().join("guess.masm");
    let layout = dir.path().join("guess.layout.json");
    run_ok(mram().args([
        "ndtm",
        "compile",
        guess_bit_json(),
        "--space",
        "2",
        "--time",
        "2",
        "-o",
        masm.to_str().unwrap(),
        "--layout",
        layout.to_str().unwrap(),
    ]));

    let layout_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&layout).unwrap()).unwrap();
    assert_eq!(layout_json["output"], 0);
    assert_eq!(layout_json["input_index"], 2);

    // --input 0 puts the initial configuration index into cell 2
    let out = run_ok(mram().arg("run").arg(&masm).args(["--input", "0"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("output (cell 0): 1"), "{stdout}");
}

#[test]
fn sat_oracle_and_compile_work_from_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = write(dir.path(), "f.cnf", "c tiny\np cnf 2 2\n1 -2 0\n2 0\n");
    let out = run_ok(mram().arg("sat").arg("oracle").arg(&cnf));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("SAT x1=1 x2=1"), "{stdout}");

    let machine = dir.path().join("f.json");
    run_ok(
        mram()
            .arg("sat")
            .arg("compile")
            .arg(&cnf)
            .arg("-o")
            .arg(&machine),
    );
    run_ok(mram().arg("ndtm").arg("validate").arg(&machine));
}

#[test]
fn unsat_formula_reports_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = write(dir.path(), "u.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    let out = run_ok(mram().arg("sat").arg("oracle").arg(&cnf));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("UNSAT"));
}

#[test]
fn sort_emit_produces_a_runnable_program() {
    let dir = tempfile::tempdir().unwrap();
    let masm = dir.path().join("sort.masm");
    run_ok(
        mram()
            .args(["sort", "emit", "--n", "3", "--max-key", "5", "-o"])
            .arg(&masm),
    );
    let out = run_ok(mram().arg("run").arg(&masm).args(["--input", "3,1,2"]));
    assert!(out.status.success());
}

#[test]
fn bench_scaling_is_deterministic_modulo_wall_ms() {
    let dir = tempfile::tempdir().unwrap();
    let strip_wall = |csv: &str| -> String {
        csv.lines()
            .map(|l| format!("{}\n", l.rsplit_once(',').unwrap().0))
            .collect()
    };
    let mut csvs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let report = dir.path().join(name);
        run_ok(mram().args([
            "bench",
            "scaling",
            "--problem",
            "sat",
            "--sizes",
            "1..3",
            "--seed",
            "7",
            "--report",
            report.to_str().unwrap(),
        ]));
        csvs.push(strip_wall(&std::fs::read_to_string(&report).unwrap()));

        // the sidecar is real JSON and records the configuration
        let sidecar = report.with_extension("json");
        let value: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
        assert_eq!(value["config"]["seed"], 7);
        assert!(value["fit"]["metrics"].is_array());
    }
    assert_eq!(csvs[0], csvs[1]);

    let csv = &csvs[0];
    assert!(csv.starts_with("n,S,T,N_bits,oracle_nodes,executed,unit_cost,log_cost"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn bench_scaling_rejects_unknown_problem() {
    let out = mram()
        .args([
            "bench",
            "scaling",
            "--problem",
            "nonsense",
            "--sizes",
            "1..2",
            "--seed",
            "7",
            "--report",
            "/tmp/never.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
