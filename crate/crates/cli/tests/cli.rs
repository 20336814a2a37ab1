//! Binary-level contract tests: flag validation, exit codes, stdout lines,
//! and the artifact files each subcommand leaves behind.

use std::path::Path;
use std::process::Command;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_localcolor"))
        .args(args)
        .output()
        .expect("spawning the binary");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

#[test]
fn cover_free_reports_family_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, stderr) =
        run_cli(&["cover-free", "--m", "3", "--delta", "2", "--out", out]);
    assert_eq!(code, 0, "stdout: {stdout} stderr: {stderr}");
    assert!(stdout.contains("universe: 60"), "{stdout}");
    assert!(stdout.contains("bound: 62"), "{stdout}");
    assert!(stdout.contains("verification: exhaustive"), "{stdout}");
    assert!(stdout.contains("PASS"), "{stdout}");

    let family = read_json(&dir.path().join("family.json"));
    assert_eq!(family["family"]["sets"].as_array().unwrap().len(), 3);
    assert_eq!(family["verification"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn cover_free_rejects_degenerate_shapes() {
    let (code, _, stderr) = run_cli(&["cover-free", "--m", "2", "--delta", "2"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("cover-free needs"), "{stderr}");

    let (code, _, stderr) = run_cli(&["cover-free", "--m", "3", "--delta", "1"]);
    assert_eq!(code, 2, "{stderr}");
}

#[test]
fn run_rejects_bad_invocations() {
    let four_cycle = fixture("four_cycle.json");

    // Nonexistent instance file.
    let (code, _, stderr) =
        run_cli(&["run", "linial-lists", "--input", "no_such_instance.json"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("cannot read input"), "{stderr}");

    // Core overrides are all-or-nothing.
    let (code, _, stderr) =
        run_cli(&["run", "linial-lists", "--input", &four_cycle, "--tau", "1"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("must be given together"), "{stderr}");

    // Paper mode derives its own parameters.
    let (code, _, stderr) = run_cli(&[
        "run", "linial-lists", "--input", &four_cycle, "--mode", "paper", "--tau", "1",
        "--tau-prime", "2", "--k", "1", "--k-prime", "2", "--l0", "6",
    ]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("only apply to --mode desk"), "{stderr}");
}

#[test]
fn run_emits_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let four_cycle = fixture("four_cycle.json");
    let (code, stdout, stderr) = run_cli(&[
        "run", "linial-lists", "--input", &four_cycle, "--tau", "1", "--tau-prime", "2",
        "--k", "1", "--k-prime", "2", "--l0", "6", "--out", out,
    ]);
    assert_eq!(code, 0, "stdout: {stdout} stderr: {stderr}");
    assert!(stdout.contains("verdict: PASS"), "{stdout}");
    assert!(stdout.contains("rounds: 2"), "{stdout}");
    assert!(stdout.contains("max-bits-per-round: 19,1"), "{stdout}");

    let coloring = read_json(&dir.path().join("coloring.json"));
    let colors = coloring["colors"].as_array().unwrap();
    assert_eq!(colors.len(), 4);
    assert!(colors.iter().all(|c| c.is_u64()), "incomplete coloring: {colors:?}");

    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["verdict"], "PASS");
    assert_eq!(report["rounds"], 2);
    assert_eq!(report["instance"]["n"], 4);

    let trace = read_json(&dir.path().join("trace.json"));
    assert_eq!(trace["rounds"].as_array().unwrap().len(), 2);

    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("round,totalMessages,maxBitsPerNode"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn verify_lemmas_validates_budget_and_reports() {
    let (code, _, stderr) = run_cli(&["verify-lemmas", "--budget", "0"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("--budget must be positive"), "{stderr}");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, stderr) =
        run_cli(&["verify-lemmas", "--scope", "ld-ratio", "--out", out]);
    assert_eq!(code, 0, "stdout: {stdout} stderr: {stderr}");
    assert!(stdout.contains("[lemma]"), "{stdout}");
    assert!(stdout.contains("PASS"), "{stdout}");

    let doc = read_json(&dir.path().join("lemmas.json"));
    assert_eq!(doc["pass"], serde_json::Value::Bool(true));
    assert_eq!(doc["scope"], "ld-ratio");
}

#[test]
fn gen_feeds_the_pipeline() {
    let (code, _, stderr) = run_cli(&["gen", "--n", "0"]);
    assert_eq!(code, 2, "{stderr}");

    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("instance.json");
    let instance_str = instance.to_str().unwrap().to_owned();
    let (code, stdout, stderr) = run_cli(&[
        "gen", "--n", "10", "--max-degree", "3", "--seed", "7", "--out", &instance_str,
    ]);
    assert_eq!(code, 0, "stdout: {stdout} stderr: {stderr}");
    assert!(stdout.contains("wrote "), "{stdout}");

    let out_dir = dir.path().join("run");
    let out_str = out_dir.to_str().unwrap().to_owned();
    let (code, stdout, stderr) = run_cli(&[
        "run", "deg-plus-one", "--input", &instance_str, "--x-override", "1", "--tau", "1",
        "--tau-prime", "2", "--k", "1", "--k-prime", "2", "--l0", "6", "--out", &out_str,
    ]);
    assert_eq!(code, 0, "stdout: {stdout} stderr: {stderr}");
    assert!(stdout.contains("verdict: PASS"), "{stdout}");

    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["verdict"], "PASS");
    assert_eq!(report["instance"]["n"], 10);
}
