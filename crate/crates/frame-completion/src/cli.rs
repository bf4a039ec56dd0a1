//! JSON command-line interface. Every invocation reads one JSON document
//! (stdin or `--input`), writes one JSON document (stdout or `--output`),
//! and signals its verdict through the exit code.
//!
//! Exact quantities (spectra, squared lengths) travel as canonical rational
//! strings like `"7/4"`; matrices and vectors are arrays of floats.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::eigensteps::{eigensteps_sequence, validate_eigensteps};
use crate::optimizer::{optimal_completion, optimal_completion_fast};
use crate::spectrum::{completion_feasible, Spectrum};
use crate::synthesis::{
    complete_frame_seeded, sym_eigen, verify_completion, SymmetricMatrix, SynthesisError,
    VectorSet,
};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_PATH_DISAGREEMENT: i32 = 3;
pub const EXIT_VERIFICATION_FAILURE: i32 = 4;

/// Absolute tolerance when checking that a supplied matrix has the spectrum
/// its exact `alpha` field claims.
const MATRIX_SPECTRUM_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "frame-completion",
    version,
    about = "Exact feasibility, optimal spectra, and explicit vector constructions for frame completion problems"
)]
struct Cli {
    /// Read the input document from a file instead of stdin.
    #[arg(long, global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Write the output document to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Relative tolerance for numerical verification.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for the randomized fallback used during vector construction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether `lambda` is reachable from `alpha` by adding vectors
    /// with squared lengths `mu`.
    Check,
    /// Compute the minimal reachable spectrum (minimal in the majorization
    /// order, hence optimal for every Schur-convex cost).
    Complete {
        /// Run only the table-driven solver.
        #[arg(long, conflicts_with = "naive")]
        fast: bool,
        /// Run only the direct per-level solver and emit its trace.
        #[arg(long)]
        naive: bool,
        /// Run both solvers and cross-check them (the default).
        #[arg(long, conflicts_with_all = ["fast", "naive"])]
        both: bool,
    },
    /// Build the table of intermediate spectra leading to `lambda` (or to
    /// the minimal spectrum when `lambda` is absent).
    Eigensteps,
    /// Construct explicit completion vectors and verify them numerically.
    Synthesize,
    /// Check supplied vectors against the target spectrum and lengths.
    Verify,
}

#[derive(Debug, Deserialize)]
struct ProblemDoc {
    alpha: Spectrum,
    mu: Spectrum,
    #[serde(default)]
    lambda: Option<Spectrum>,
    #[serde(default)]
    beta: Option<Spectrum>,
    #[serde(default, rename = "A")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    vectors: Option<Vec<Vec<f64>>>,
}

struct Problem {
    alpha: Spectrum,
    mu: Spectrum,
    lambda: Option<Spectrum>,
    beta: Option<Spectrum>,
    a: SymmetricMatrix,
    vectors: Option<Vec<Vec<f64>>>,
}

impl Problem {
    fn from_doc(doc: ProblemDoc) -> Result<Problem, String> {
        let m_dim = doc.alpha.len();
        for (name, target) in [("lambda", &doc.lambda), ("beta", &doc.beta)] {
            if let Some(s) = target {
                if s.len() != m_dim {
                    return Err(format!(
                        "{name} has {} entries but alpha has {m_dim}",
                        s.len()
                    ));
                }
            }
        }
        let a = match &doc.a {
            None => SymmetricMatrix::diagonal(&doc.alpha.to_f64_vec()),
            Some(rows) => {
                if rows.len() != m_dim {
                    return Err(format!(
                        "A is {}x{} but alpha has {m_dim} entries",
                        rows.len(),
                        rows.first().map_or(0, Vec::len)
                    ));
                }
                let a = SymmetricMatrix::from_rows(rows).map_err(|e| format!("A: {e}"))?;
                let eig = sym_eigen(&a).map_err(|e| format!("A: {e}"))?;
                for (got, want) in eig.values.iter().zip(doc.alpha.iter()) {
                    if (got - want.to_f64()).abs() > MATRIX_SPECTRUM_TOL {
                        return Err(format!(
                            "A has eigenvalue {got} where alpha requires {want}"
                        ));
                    }
                }
                a
            }
        };
        if let Some(vectors) = &doc.vectors {
            for (n, phi) in vectors.iter().enumerate() {
                if phi.len() != m_dim {
                    return Err(format!(
                        "vector {} has {} entries but the dimension is {m_dim}",
                        n + 1,
                        phi.len()
                    ));
                }
            }
        }
        Ok(Problem {
            alpha: doc.alpha,
            mu: doc.mu,
            lambda: doc.lambda,
            beta: doc.beta,
            a,
            vectors: doc.vectors,
        })
    }
}

enum CmdOutcome {
    /// JSON document for the output stream plus the exit code.
    Document(Value, i32),
    /// Message for stderr plus the exit code.
    Failure(String, i32),
}

fn input_failure(msg: impl Into<String>) -> CmdOutcome {
    CmdOutcome::Failure(msg.into(), EXIT_INPUT_ERROR)
}

fn cmd_check(problem: &Problem) -> CmdOutcome {
    let Some(lambda) = &problem.lambda else {
        return input_failure("check requires a lambda field");
    };
    let report = completion_feasible(&problem.alpha, lambda, &problem.mu)
        .expect("lengths were validated");
    let code = if report.feasible {
        EXIT_SUCCESS
    } else {
        EXIT_INFEASIBLE
    };
    CmdOutcome::Document(json!(report), code)
}

fn cmd_complete(problem: &Problem, fast_only: bool, naive_only: bool) -> CmdOutcome {
    let fast = (!naive_only).then(|| optimal_completion_fast(&problem.alpha, &problem.mu));
    let naive = (!fast_only).then(|| optimal_completion(&problem.alpha, &problem.mu));
    let mut doc = json!({
        "alpha": problem.alpha,
        "mu": problem.mu,
    });
    let obj = doc.as_object_mut().expect("doc is an object");
    match (fast, naive) {
        (Some(fast), Some((beta, trace))) => {
            obj.insert("trace".into(), json!(trace));
            if fast == beta {
                obj.insert("beta".into(), json!(beta));
                obj.insert("paths_agree".into(), json!(true));
                CmdOutcome::Document(doc, EXIT_SUCCESS)
            } else {
                obj.insert("beta_fast".into(), json!(fast));
                obj.insert("beta_naive".into(), json!(beta));
                obj.insert("paths_agree".into(), json!(false));
                CmdOutcome::Document(doc, EXIT_PATH_DISAGREEMENT)
            }
        }
        (Some(fast), None) => {
            obj.insert("beta".into(), json!(fast));
            CmdOutcome::Document(doc, EXIT_SUCCESS)
        }
        (None, Some((beta, trace))) => {
            obj.insert("beta".into(), json!(beta));
            obj.insert("trace".into(), json!(trace));
            CmdOutcome::Document(doc, EXIT_SUCCESS)
        }
        (None, None) => unreachable!("flags conflict"),
    }
}

/// The spectrum to aim for: `lambda` when given (checked for feasibility),
/// otherwise the computed minimal spectrum. The flag says which happened.
fn resolve_target(problem: &Problem) -> Result<(Spectrum, bool), CmdOutcome> {
    match &problem.lambda {
        Some(lambda) => {
            let report = completion_feasible(&problem.alpha, lambda, &problem.mu)
                .expect("lengths were validated");
            if !report.feasible {
                return Err(CmdOutcome::Document(json!(report), EXIT_INFEASIBLE));
            }
            Ok((lambda.clone(), false))
        }
        None => Ok((
            optimal_completion_fast(&problem.alpha, &problem.mu),
            true,
        )),
    }
}

fn cmd_eigensteps(problem: &Problem) -> CmdOutcome {
    let (target, computed) = match resolve_target(problem) {
        Ok(t) => t,
        Err(outcome) => return outcome,
    };
    let table = match eigensteps_sequence(&problem.alpha, &target, &problem.mu) {
        Ok(t) => t,
        Err(e) => return input_failure(format!("cannot build intermediate spectra: {e}")),
    };
    let validation = validate_eigensteps(&table);
    let mut doc = json!({
        "alpha": problem.alpha,
        "mu": problem.mu,
        "lambda": target,
        "rows": table.rows(),
        "validation": validation,
    });
    if computed {
        doc.as_object_mut()
            .expect("doc is an object")
            .insert("beta".into(), json!(target));
    }
    CmdOutcome::Document(doc, EXIT_SUCCESS)
}

fn cmd_synthesize(problem: &Problem, seed: u64, tol: f64) -> CmdOutcome {
    let (target, computed) = match resolve_target(problem) {
        Ok(t) => t,
        Err(outcome) => return outcome,
    };
    let table = match eigensteps_sequence(&problem.alpha, &target, &problem.mu) {
        Ok(t) => t,
        Err(e) => return input_failure(format!("cannot build intermediate spectra: {e}")),
    };
    let vs = match complete_frame_seeded(&problem.a, &table, seed) {
        Ok(out) => out,
        Err(e @ SynthesisError::DimensionMismatch { .. }) => {
            return input_failure(format!("construction rejected the input: {e}"))
        }
        Err(e) => {
            return CmdOutcome::Failure(
                format!("construction failed: {e}"),
                EXIT_VERIFICATION_FAILURE,
            )
        }
    };
    let verification = match verify_completion(&problem.a, &vs, &target, tol) {
        Ok(report) => report,
        Err(e) => {
            return CmdOutcome::Failure(
                format!("verification failed to run: {e}"),
                EXIT_VERIFICATION_FAILURE,
            )
        }
    };
    let code = if verification.pass {
        EXIT_SUCCESS
    } else {
        EXIT_VERIFICATION_FAILURE
    };
    let mut doc = json!({
        "alpha": problem.alpha,
        "mu": problem.mu,
        "lambda": target,
        "A": problem.a.rows(),
        "eigensteps": table.rows(),
        "vectors": vs.vectors(),
        "verification": verification,
    });
    if computed {
        doc.as_object_mut()
            .expect("doc is an object")
            .insert("beta".into(), json!(target));
    }
    CmdOutcome::Document(doc, code)
}

fn cmd_verify(problem: &Problem, tol: f64) -> CmdOutcome {
    let Some(vectors) = &problem.vectors else {
        return input_failure("verify requires a vectors field");
    };
    let target = match (&problem.lambda, &problem.beta) {
        (Some(lambda), _) => lambda,
        (None, Some(beta)) => beta,
        (None, None) => return input_failure("verify requires a lambda or beta field"),
    };
    let vs = match VectorSet::new(vectors.clone(), problem.mu.clone()) {
        Ok(vs) => vs,
        Err(e) => return input_failure(format!("cannot verify: {e}")),
    };
    match verify_completion(&problem.a, &vs, target, tol) {
        Ok(report) => {
            let code = if report.pass {
                EXIT_SUCCESS
            } else {
                EXIT_VERIFICATION_FAILURE
            };
            CmdOutcome::Document(json!(report), code)
        }
        Err(e) => input_failure(format!("cannot verify: {e}")),
    }
}

fn read_input(path: &Option<PathBuf>, stdin: &mut dyn Read) -> Result<String, String> {
    match path {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display())),
        None => {
            let mut buf = String::new();
            stdin
                .read_to_string(&mut buf)
                .map_err(|e| format!("cannot read stdin: {e}"))?;
            Ok(buf)
        }
    }
}

fn write_document(
    value: &Value,
    path: &Option<PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).expect("documents serialize");
    text.push('\n');
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write stdout: {e}")),
    }
}

/// Full CLI entry point, wired to explicit streams so it can be driven
/// in-process. Returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_SUCCESS
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_INPUT_ERROR
                }
            };
        }
    };

    let raw = match read_input(&cli.input, stdin) {
        Ok(raw) => raw,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INPUT_ERROR;
        }
    };
    let doc: ProblemDoc = match serde_json::from_str(&raw) {
        Ok(doc) => doc,
        Err(e) => {
            let _ = writeln!(stderr, "error: invalid input document: {e}");
            return EXIT_INPUT_ERROR;
        }
    };
    let problem = match Problem::from_doc(doc) {
        Ok(problem) => problem,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INPUT_ERROR;
        }
    };

    let outcome = match cli.command {
        Command::Check => cmd_check(&problem),
        Command::Complete { fast, naive, both: _ } => cmd_complete(&problem, fast, naive),
        Command::Eigensteps => cmd_eigensteps(&problem),
        Command::Synthesize => cmd_synthesize(&problem, cli.seed, cli.tol),
        Command::Verify => cmd_verify(&problem, cli.tol),
    };
    match outcome {
        CmdOutcome::Document(value, code) => {
            if let Err(msg) = write_document(&value, &cli.output, stdout) {
                let _ = writeln!(stderr, "error: {msg}");
                return EXIT_INPUT_ERROR;
            }
            code
        }
        CmdOutcome::Failure(msg, code) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}
