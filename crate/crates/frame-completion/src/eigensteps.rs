//! Tables of intermediate spectra ("eigensteps"): row `P` is the spectrum of
//! the partial operator after the first `P` completion vectors have been
//! added. A valid table starts at `alpha`, ends at `lambda`, gains exactly
//! `mu_P` of trace at row `P`, and each row interlaces over the previous one.
//!
//! Tables are built backwards: from a feasible target `lambda`, each step
//! peels off the last vector by chopping `lambda` against `alpha` at some
//! index `p` and interpolating between consecutive chops to hit the required
//! trace.

use serde::Serialize;

use crate::ratio::Ratio;
use crate::spectrum::{completion_feasible, interlaces_over, Spectrum};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EigenstepsError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("chop index {p} out of range 1..={max}")]
    IndexRange { p: usize, max: usize },
    #[error("inputs violate the backward-step hypothesis (nonempty feasible completion)")]
    HypothesisViolated,
    #[error("target spectrum is not a feasible completion")]
    Infeasible,
}

/// The `p`-th chop of `lambda` against `alpha`:
///
/// ```text
/// eta_{p;m} = max(lambda_{m+1}, min(lambda_m, alpha_{m-p+1}))
/// ```
///
/// with the conventions `lambda_{M+1} = 0` and `alpha_i = +inf` for `i < 1`.
/// Valid `p` ranges over `1..=M+1`; `p = M+1` returns `lambda` itself.
pub fn chopped_spectrum(
    lambda: &Spectrum,
    alpha: &Spectrum,
    p: usize,
) -> Result<Spectrum, EigenstepsError> {
    let m_dim = lambda.len();
    if alpha.len() != m_dim {
        return Err(EigenstepsError::LengthMismatch {
            expected: m_dim,
            got: alpha.len(),
        });
    }
    if p < 1 || p > m_dim + 1 {
        return Err(EigenstepsError::IndexRange { p, max: m_dim + 1 });
    }
    let zero = Ratio::zero();
    let values: Vec<Ratio> = (1..=m_dim)
        .map(|m| {
            let lam = &lambda.values()[m - 1];
            let lam_next = lambda.values().get(m).unwrap_or(&zero);
            let inner = if m < p {
                lam // alpha index m - p + 1 falls off the left edge
            } else {
                lam.min(&alpha.values()[m - p])
            };
            inner.max(lam_next).clone()
        })
        .collect();
    Ok(Spectrum::new(values).expect("chops are nonincreasing and nonnegative"))
}

/// Result of one backward step: the chosen chop index, the two chops it
/// interpolates between, the interpolation parameter in `[0, 1]`, and the
/// previous row `kappa`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChopResult {
    pub p: usize,
    pub eta_p: Spectrum,
    pub eta_p_plus_1: Spectrum,
    pub kappa: Spectrum,
    pub interpolation_t: Ratio,
}

/// Removes the final vector: given that `lambda` is a feasible completion of
/// `(alpha, mu)` with `N >= 1`, produces the spectrum `kappa` one step
/// earlier. `kappa` has trace `sum(alpha) + mu_1 + ... + mu_{N-1}`, `lambda`
/// interlaces over it, and it stays a feasible completion target for the
/// first `N - 1` lengths; with `N = 1` it equals `alpha` exactly.
///
/// Among the valid chop indices the smallest is chosen, and ties in the
/// interpolation (`tau_{p+1} = tau_p`) resolve to `t = 0`.
pub fn backward_step(
    lambda: &Spectrum,
    alpha: &Spectrum,
    mu: &Spectrum,
) -> Result<ChopResult, EigenstepsError> {
    let m_dim = lambda.len();
    if alpha.len() != m_dim {
        return Err(EigenstepsError::LengthMismatch {
            expected: m_dim,
            got: alpha.len(),
        });
    }
    let n_dim = mu.len();
    if m_dim == 0 || n_dim == 0 {
        return Err(EigenstepsError::HypothesisViolated);
    }
    let report = completion_feasible(alpha, lambda, mu).expect("lengths checked");
    if !report.feasible {
        return Err(EigenstepsError::HypothesisViolated);
    }

    let sigma = alpha.sum() + mu.values()[..n_dim - 1].iter().sum::<Ratio>();
    let chops: Vec<Spectrum> = (1..=m_dim + 1)
        .map(|p| chopped_spectrum(lambda, alpha, p).expect("p in range"))
        .collect();
    let traces: Vec<Ratio> = chops.iter().map(Spectrum::sum).collect();
    // Chop traces grow with p and bracket sigma.
    for pair in traces.windows(2) {
        assert!(pair[0] <= pair[1], "chop traces must be nondecreasing");
    }
    assert!(
        traces[0] <= sigma && sigma <= traces[m_dim],
        "target trace must be bracketed by the chop traces"
    );
    // Smallest 1-based p with tau_p <= sigma <= tau_{p+1}.
    let p = (1..=m_dim)
        .find(|&p| traces[p] >= sigma)
        .expect("bracketing guarantees a match");
    let tau_p = &traces[p - 1];
    let tau_next = &traces[p];
    let t = if tau_next == tau_p {
        Ratio::zero()
    } else {
        (&sigma - tau_p) / &(tau_next - tau_p)
    };
    let values: Vec<Ratio> = chops[p - 1]
        .iter()
        .zip(chops[p].iter())
        .map(|(lo, hi)| lo + &(&(hi - lo) * &t))
        .collect();
    let kappa = Spectrum::new(values).expect("interpolants stay ordered");

    // Postconditions of the step; failures would be implementation bugs.
    assert_eq!(kappa.sum(), sigma, "interpolation must hit the trace");
    assert!(
        interlaces_over(lambda, &kappa).expect("lengths match"),
        "lambda must interlace over kappa"
    );
    assert!(
        kappa.iter().zip(alpha.iter()).all(|(k, a)| k >= a),
        "kappa must dominate alpha"
    );
    let reduced = Spectrum::new(mu.values()[..n_dim - 1].to_vec()).expect("prefix of a spectrum");
    assert!(
        completion_feasible(alpha, &kappa, &reduced)
            .expect("lengths match")
            .feasible,
        "kappa must stay feasible for the remaining lengths"
    );

    Ok(ChopResult {
        p,
        eta_p: chops[p - 1].clone(),
        eta_p_plus_1: chops[p].clone(),
        kappa,
        interpolation_t: t,
    })
}

/// Full table of intermediate spectra. Row `0` is `alpha` and row `N` is
/// `lambda`; see [`validate_eigensteps`] for the exact conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenstepsTable {
    alpha: Spectrum,
    lambda: Spectrum,
    mu: Spectrum,
    rows: Vec<Spectrum>,
}

impl EigenstepsTable {
    /// Shape-checks only; use [`validate_eigensteps`] to test the defining
    /// conditions.
    pub fn from_parts(
        alpha: Spectrum,
        lambda: Spectrum,
        mu: Spectrum,
        rows: Vec<Spectrum>,
    ) -> Result<EigenstepsTable, EigenstepsError> {
        if rows.len() != mu.len() + 1 {
            return Err(EigenstepsError::LengthMismatch {
                expected: mu.len() + 1,
                got: rows.len(),
            });
        }
        let m_dim = alpha.len();
        for row in std::iter::once(&lambda).chain(rows.iter()) {
            if row.len() != m_dim {
                return Err(EigenstepsError::LengthMismatch {
                    expected: m_dim,
                    got: row.len(),
                });
            }
        }
        Ok(EigenstepsTable {
            alpha,
            lambda,
            mu,
            rows,
        })
    }

    pub fn alpha(&self) -> &Spectrum {
        &self.alpha
    }

    pub fn lambda(&self) -> &Spectrum {
        &self.lambda
    }

    pub fn mu(&self) -> &Spectrum {
        &self.mu
    }

    /// Rows `0..=N` in order.
    pub fn rows(&self) -> &[Spectrum] {
        &self.rows
    }

    pub fn num_vectors(&self) -> usize {
        self.mu.len()
    }
}

/// Builds the table for a feasible target by repeated backward steps.
/// Deterministic; the first row is exactly `alpha`.
pub fn eigensteps_sequence(
    alpha: &Spectrum,
    lambda: &Spectrum,
    mu: &Spectrum,
) -> Result<EigenstepsTable, EigenstepsError> {
    let m_dim = alpha.len();
    if lambda.len() != m_dim {
        return Err(EigenstepsError::LengthMismatch {
            expected: m_dim,
            got: lambda.len(),
        });
    }
    let report = completion_feasible(alpha, lambda, mu).expect("lengths checked");
    if !report.feasible {
        return Err(EigenstepsError::Infeasible);
    }
    let n_dim = mu.len();
    let mut rows_rev = vec![lambda.clone()];
    if m_dim > 0 {
        for p in (1..=n_dim).rev() {
            let prefix = Spectrum::new(mu.values()[..p].to_vec()).expect("prefix of a spectrum");
            let step = backward_step(rows_rev.last().unwrap(), alpha, &prefix)?;
            rows_rev.push(step.kappa);
        }
    } else {
        // Zero-dimensional operators: every row is the empty spectrum.
        rows_rev.extend(std::iter::repeat_n(Spectrum::zeros(0), n_dim));
    }
    rows_rev.reverse();
    assert_eq!(rows_rev[0], *alpha, "backward steps must land on alpha");
    EigenstepsTable::from_parts(alpha.clone(), lambda.clone(), mu.clone(), rows_rev)
}

/// One defining condition of a table; `first_violation` holds the offending
/// `(row, entry)` pair with 1-based entry index, or entry `0` for conditions
/// about a whole row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionCheck {
    pub pass: bool,
    pub first_violation: Option<(usize, usize)>,
}

impl ConditionCheck {
    fn ok() -> ConditionCheck {
        ConditionCheck {
            pass: true,
            first_violation: None,
        }
    }

    fn fail(row: usize, entry: usize) -> ConditionCheck {
        ConditionCheck {
            pass: false,
            first_violation: Some((row, entry)),
        }
    }
}

/// Exact validation of the four defining conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Row `0` equals `alpha` entrywise.
    pub starts_at_alpha: ConditionCheck,
    /// Row `N` equals `lambda` entrywise.
    pub ends_at_lambda: ConditionCheck,
    /// Row `P` sums to `sum(alpha) + mu_1 + ... + mu_P`.
    pub trace_sums: ConditionCheck,
    /// Row `P` interlaces over row `P - 1`.
    pub interlacing: ConditionCheck,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.starts_at_alpha.pass
            && self.ends_at_lambda.pass
            && self.trace_sums.pass
            && self.interlacing.pass
    }
}

fn rows_equal(row: usize, got: &Spectrum, want: &Spectrum) -> ConditionCheck {
    for (m, (g, w)) in got.iter().zip(want.iter()).enumerate() {
        if g != w {
            return ConditionCheck::fail(row, m + 1);
        }
    }
    ConditionCheck::ok()
}

/// Checks all four conditions with exact arithmetic and reports the first
/// violation of each.
pub fn validate_eigensteps(table: &EigenstepsTable) -> ValidationReport {
    let rows = table.rows();
    let n_dim = table.num_vectors();

    let starts_at_alpha = rows_equal(0, &rows[0], table.alpha());
    let ends_at_lambda = rows_equal(n_dim, &rows[n_dim], table.lambda());

    let mut trace_sums = ConditionCheck::ok();
    let mut expected = table.alpha().sum();
    for (p, row) in rows.iter().enumerate() {
        if p > 0 {
            expected = expected + &table.mu().values()[p - 1];
        }
        if row.sum() != expected {
            trace_sums = ConditionCheck::fail(p, 0);
            break;
        }
    }

    let mut interlacing = ConditionCheck::ok();
    let zero = Ratio::zero();
    'outer: for p in 1..=n_dim {
        let (upper, lower) = (&rows[p], &rows[p - 1]);
        for m in 0..upper.len() {
            let next_upper = upper.values().get(m + 1).unwrap_or(&zero);
            let low = &lower.values()[m];
            if low > &upper.values()[m] || low < next_upper {
                interlacing = ConditionCheck::fail(p, m + 1);
                break 'outer;
            }
        }
    }

    ValidationReport {
        starts_at_alpha,
        ends_at_lambda,
        trace_sums,
        interlacing,
    }
}
