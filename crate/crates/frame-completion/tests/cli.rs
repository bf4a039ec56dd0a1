//! End-to-end tests of the command-line interface: exit codes, document
//! shapes, and exact rational round-trips.

use serde_json::{json, Value};

fn run_cli(args: &[&str], input: &str) -> (i32, Value, String) {
    let mut stdin = input.as_bytes();
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("frame-completion").chain(args.iter().copied());
    let code = frame_completion::cli::run(argv, &mut stdin, &mut stdout, &mut stderr);
    let stdout = String::from_utf8(stdout).expect("utf8 output");
    let doc = if stdout.trim().is_empty() {
        Value::Null
    } else {
        serde_json::from_str(&stdout).unwrap_or(Value::String(stdout))
    };
    (code, doc, String::from_utf8(stderr).expect("utf8 stderr"))
}

fn golden_doc() -> String {
    json!({
        "alpha": ["7/4", "3/4", "1/2", "1/2"],
        "mu": ["2", "1", "1/4", "1/4", "1/4"],
    })
    .to_string()
}

fn golden_doc_with(extra: &[(&str, Value)]) -> String {
    let mut doc: Value = serde_json::from_str(&golden_doc()).unwrap();
    for (key, value) in extra {
        doc.as_object_mut()
            .unwrap()
            .insert(key.to_string(), value.clone());
    }
    doc.to_string()
}

#[test]
fn check_accepts_the_golden_target() {
    let input = golden_doc_with(&[("lambda", json!(["5/2", "7/4", "3/2", "3/2"]))]);
    let (code, doc, _) = run_cli(&["check"], &input);
    assert_eq!(code, 0);
    assert_eq!(doc["feasible"], json!(true));
    assert_eq!(doc["equality_gap"], json!("0"));
    assert_eq!(doc["dominance_ok"], json!(true));
}

#[test]
fn check_rejects_a_trace_mismatch() {
    let input = json!({
        "alpha": ["1", "1"],
        "mu": ["1"],
        "lambda": ["3", "1"],
    })
    .to_string();
    let (code, doc, _) = run_cli(&["check"], &input);
    assert_eq!(code, 1);
    assert_eq!(doc["feasible"], json!(false));
    assert_eq!(doc["equality_gap"], json!("1"));
}

#[test]
fn check_reports_violated_tail_indices() {
    let input = json!({
        "alpha": ["0", "0"],
        "mu": ["2", "1"],
        "lambda": ["3/2", "3/2"],
    })
    .to_string();
    let (code, doc, _) = run_cli(&["check"], &input);
    assert_eq!(code, 1);
    assert_eq!(doc["violated_indices"], json!([2]));
}

#[test]
fn check_without_lambda_is_an_input_error() {
    let (code, _, stderr) = run_cli(&["check"], &golden_doc());
    assert_eq!(code, 2);
    assert!(stderr.contains("lambda"), "{stderr}");
}

#[test]
fn malformed_documents_are_input_errors() {
    let (code, _, _) = run_cli(&["check"], "{not json");
    assert_eq!(code, 2);
    // Entries out of order.
    let unsorted = json!({"alpha": ["1", "2"], "mu": []}).to_string();
    let (code, _, stderr) = run_cli(&["complete"], &unsorted);
    assert_eq!(code, 2);
    assert!(stderr.contains("nonincreasing") || stderr.contains("order"), "{stderr}");
    // Negative entry.
    let negative = json!({"alpha": ["-1"], "mu": []}).to_string();
    let (code, _, _) = run_cli(&["complete"], &negative);
    assert_eq!(code, 2);
    // Decimal notation is not a rational string.
    let decimal = json!({"alpha": ["1.5"], "mu": []}).to_string();
    let (code, _, _) = run_cli(&["complete"], &decimal);
    assert_eq!(code, 2);
    // Mismatched lambda length.
    let short = golden_doc_with(&[("lambda", json!(["5/2"]))]);
    let (code, _, _) = run_cli(&["check"], &short);
    assert_eq!(code, 2);
}

#[test]
fn complete_reports_the_golden_spectrum_from_both_paths() {
    let (code, doc, _) = run_cli(&["complete"], &golden_doc());
    assert_eq!(code, 0);
    assert_eq!(doc["beta"], json!(["5/2", "7/4", "3/2", "3/2"]));
    assert_eq!(doc["paths_agree"], json!(true));
    let levels = doc["trace"]["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 4);
    assert_eq!(levels[0]["k"], json!(4));
    assert_eq!(levels[0]["b_values"], json!(["29/16", "3/2", "3/2", "9/4"]));
    assert_eq!(levels[0]["binding_set"], json!([2, 3]));
    let js: Vec<&Value> = levels.iter().map(|l| &l["j_of_k"]).collect();
    assert_eq!(js, [&json!(2), &json!(2), &json!(2), &json!(1)]);
}

#[test]
fn complete_fast_only_omits_the_trace() {
    let (code, doc, _) = run_cli(&["complete", "--fast"], &golden_doc());
    assert_eq!(code, 0);
    assert_eq!(doc["beta"], json!(["5/2", "7/4", "3/2", "3/2"]));
    assert!(doc.get("trace").is_none());
    assert!(doc.get("paths_agree").is_none());
}

#[test]
fn complete_naive_only_keeps_the_trace() {
    let (code, doc, _) = run_cli(&["complete", "--naive"], &golden_doc());
    assert_eq!(code, 0);
    assert_eq!(doc["beta"], json!(["5/2", "7/4", "3/2", "3/2"]));
    assert!(doc.get("trace").is_some());
    assert!(doc.get("paths_agree").is_none());
}

#[test]
fn complete_flag_conflict_is_an_input_error() {
    let (code, _, stderr) = run_cli(&["complete", "--fast", "--naive"], &golden_doc());
    assert_eq!(code, 2);
    assert!(stderr.contains("--fast") || stderr.contains("--naive"), "{stderr}");
    let (code, _, _) = run_cli(&["complete", "--both", "--fast"], &golden_doc());
    assert_eq!(code, 2);
}

#[test]
fn complete_both_matches_the_default() {
    let (_, default_doc, _) = run_cli(&["complete"], &golden_doc());
    let (code, doc, _) = run_cli(&["complete", "--both"], &golden_doc());
    assert_eq!(code, 0);
    assert_eq!(doc, default_doc);
}

#[test]
fn rationals_are_normalized_on_output() {
    let input = json!({"alpha": ["4/8"], "mu": []}).to_string();
    let (code, doc, _) = run_cli(&["complete"], &input);
    assert_eq!(code, 0);
    assert_eq!(doc["alpha"], json!(["1/2"]));
    assert_eq!(doc["beta"], json!(["1/2"]));
}

#[test]
fn eigensteps_with_a_target_reports_rows_and_validation() {
    let input = golden_doc_with(&[("lambda", json!(["5/2", "7/4", "3/2", "3/2"]))]);
    let (code, doc, _) = run_cli(&["eigensteps"], &input);
    assert_eq!(code, 0);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], json!(["7/4", "3/4", "1/2", "1/2"]));
    assert_eq!(rows[5], json!(["5/2", "7/4", "3/2", "3/2"]));
    assert_eq!(doc["validation"]["interlacing"]["pass"], json!(true));
    assert!(doc.get("beta").is_none());
}

#[test]
fn eigensteps_computes_the_minimal_target_when_absent() {
    let (code, doc, _) = run_cli(&["eigensteps"], &golden_doc());
    assert_eq!(code, 0);
    assert_eq!(doc["beta"], json!(["5/2", "7/4", "3/2", "3/2"]));
    assert_eq!(doc["lambda"], doc["beta"]);
}

#[test]
fn eigensteps_rejects_an_infeasible_target() {
    let input = json!({
        "alpha": ["1", "1"],
        "mu": ["1"],
        "lambda": ["3/2", "3/2"],
    })
    .to_string();
    let (code, doc, _) = run_cli(&["eigensteps"], &input);
    assert_eq!(code, 1);
    assert_eq!(doc["feasible"], json!(false));
}

#[test]
fn synthesize_then_verify_round_trips() {
    let (code, doc, _) = run_cli(&["synthesize"], &golden_doc());
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["verification"]["pass"], json!(true));
    let vectors = doc["vectors"].as_array().unwrap();
    assert_eq!(vectors.len(), 5);
    assert!(vectors.iter().all(|v| v.as_array().unwrap().len() == 4));
    assert_eq!(doc["beta"], json!(["5/2", "7/4", "3/2", "3/2"]));
    assert_eq!(doc["eigensteps"].as_array().unwrap().len(), 6);

    // The output document is a valid input for verify.
    let (code, report, _) = run_cli(&["verify"], &doc.to_string());
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["pass"], json!(true));
}

#[test]
fn synthesize_accepts_an_explicit_matrix() {
    let a = json!([
        [1.75, 0.0, 0.0, 0.0],
        [0.0, 0.75, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.5]
    ]);
    let input = golden_doc_with(&[("A", a)]);
    let (code, doc, _) = run_cli(&["synthesize", "--seed", "7"], &input);
    assert_eq!(code, 0, "{doc}");
    assert_eq!(doc["verification"]["pass"], json!(true));
}

#[test]
fn synthesize_rejects_a_matrix_with_the_wrong_spectrum() {
    let a = json!([
        [2.25, 0.0, 0.0, 0.0],
        [0.0, 0.75, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.5]
    ]);
    let input = golden_doc_with(&[("A", a)]);
    let (code, _, stderr) = run_cli(&["synthesize"], &input);
    assert_eq!(code, 2);
    assert!(stderr.contains("eigenvalue"), "{stderr}");
}

#[test]
fn synthesize_rejects_an_asymmetric_matrix() {
    let a = json!([
        [1.75, 0.5, 0.0, 0.0],
        [0.0, 0.75, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.5]
    ]);
    let input = golden_doc_with(&[("A", a)]);
    let (code, _, stderr) = run_cli(&["synthesize"], &input);
    assert_eq!(code, 2);
    assert!(stderr.contains("symmetric"), "{stderr}");
}

#[test]
fn synthesize_reports_infeasible_targets() {
    let input = json!({
        "alpha": ["1", "1"],
        "mu": ["1"],
        "lambda": ["3/2", "3/2"],
    })
    .to_string();
    let (code, doc, _) = run_cli(&["synthesize"], &input);
    assert_eq!(code, 1);
    assert_eq!(doc["feasible"], json!(false));
}

#[test]
fn verify_flags_corrupted_vectors() {
    let (code, doc, _) = run_cli(&["synthesize"], &golden_doc());
    assert_eq!(code, 0);
    let mut doc = doc;
    let first = doc["vectors"][0].as_array().unwrap().clone();
    let scaled: Vec<Value> = first
        .iter()
        .map(|x| json!(x.as_f64().unwrap() * 2.0))
        .collect();
    doc["vectors"][0] = json!(scaled);
    let (code, report, _) = run_cli(&["verify"], &doc.to_string());
    assert_eq!(code, 4);
    assert_eq!(report["pass"], json!(false));
}

#[test]
fn verify_tolerance_flag_is_honored() {
    let (code, mut doc, _) = run_cli(&["synthesize"], &golden_doc());
    assert_eq!(code, 0);
    // Nudge the largest entry of the first vector so the squared length
    // moves by roughly 1e-6: visible at tol 1e-9, invisible at tol 1e-2.
    let entries = doc["vectors"][0].as_array().unwrap();
    let (idx, x) = entries
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.as_f64().unwrap()))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    doc["vectors"][0][idx] = json!(x + 1e-6);
    let input = doc.to_string();
    let (strict, _, _) = run_cli(&["verify", "--tol", "1e-9"], &input);
    assert_eq!(strict, 4);
    let (loose, report, _) = run_cli(&["verify", "--tol", "1e-2"], &input);
    assert_eq!(loose, 0, "{report}");
}

#[test]
fn verify_requires_vectors_and_a_target() {
    let (code, _, stderr) = run_cli(&["verify"], &golden_doc());
    assert_eq!(code, 2);
    assert!(stderr.contains("vectors"), "{stderr}");
    let with_vectors = golden_doc_with(&[("vectors", json!([]))]);
    let (code, _, stderr) = run_cli(&["verify"], &with_vectors);
    assert_eq!(code, 2);
    assert!(stderr.contains("lambda") || stderr.contains("beta"), "{stderr}");
}

#[test]
fn verify_counts_vectors_against_the_lengths() {
    let input = golden_doc_with(&[
        ("vectors", json!([[1.0, 0.0, 0.0, 0.0]])),
        ("lambda", json!(["5/2", "7/4", "3/2", "3/2"])),
    ]);
    let (code, _, stderr) = run_cli(&["verify"], &input);
    assert_eq!(code, 2);
    assert!(stderr.contains("dimension mismatch"), "{stderr}");
}

#[test]
fn input_and_output_files_are_supported() {
    let dir = tempfile::tempdir().unwrap();
    let input_path = dir.path().join("problem.json");
    let output_path = dir.path().join("answer.json");
    std::fs::write(&input_path, golden_doc()).unwrap();
    let (code, _, stderr) = run_cli(
        &[
            "complete",
            "--input",
            input_path.to_str().unwrap(),
            "--output",
            output_path.to_str().unwrap(),
        ],
        "",
    );
    assert_eq!(code, 0, "{stderr}");
    let written: Value =
        serde_json::from_str(&std::fs::read_to_string(&output_path).unwrap()).unwrap();
    assert_eq!(written["beta"], json!(["5/2", "7/4", "3/2", "3/2"]));
    // Missing input file.
    let (code, _, _) = run_cli(&["complete", "--input", "/nonexistent/p.json"], "");
    assert_eq!(code, 2);
}

#[test]
fn help_is_printed_to_stdout() {
    let mut stdin = "".as_bytes();
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = frame_completion::cli::run(
        ["frame-completion", "--help"],
        &mut stdin,
        &mut stdout,
        &mut stderr,
    );
    assert_eq!(code, 0);
    let text = String::from_utf8(stdout).unwrap();
    assert!(text.contains("synthesize"), "{text}");
    assert!(stderr.is_empty());
}

#[test]
fn unknown_subcommands_fail_with_usage() {
    let (code, _, stderr) = run_cli(&["frobnicate"], "");
    assert_eq!(code, 2);
    assert!(stderr.contains("Usage") || stderr.contains("usage"), "{stderr}");
}

#[test]
fn the_installed_binary_works_end_to_end() {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let mut child = Command::new(env!("CARGO_BIN_EXE_frame-completion"))
        .arg("complete")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(golden_doc().as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["beta"], json!(["5/2", "7/4", "3/2", "3/2"]));
}
