//! Water-filling solver for the minimal completion spectrum.
//!
//! Given a starting spectrum `alpha` (length `M`) and squared vector lengths
//! `mu` (length `N`), the levels `beta_M, ..., beta_1` are fixed one at a
//! time: `beta_k` is the largest water level `t` that keeps every tail
//! constraint
//!
//! ```text
//! f_{k;j}(t) = sum_{m=j..k} (t - alpha_{m-j+1})^+
//!            + sum_{m=k+1..M} (beta_m - alpha_{m-j+1})^+   <=   nu_j
//! ```
//!
//! satisfied for `j = 1..k`, where `nu_j = mu_j + ... + mu_N`. The resulting
//! spectrum is feasible and sits below every other feasible completion in the
//! majorization order, which makes it the minimizer of every Schur-convex
//! cost (frame potential, mean squared reconstruction error, ...).

use serde::Serialize;

use crate::ratio::Ratio;
use crate::spectrum::{completion_feasible, tail_sums, Spectrum};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OptimizerError {
    /// Signals an implementation bug: every constraint admits some level.
    #[error("internal solver error: {0}")]
    Internal(String),
}

/// One tail constraint `f_{k;j}(t) <= nu_j` as seen by the level-`k` solve.
/// `offset` is the fixed contribution of the already-computed higher levels.
#[derive(Debug, Clone)]
pub struct ConstraintFunction {
    k: usize,
    j: usize,
    alpha: Spectrum,
    beta_tail: Vec<Ratio>,
    offset: Ratio,
    nu_j: Ratio,
}

impl ConstraintFunction {
    /// `beta_tail` holds `beta_{k+1}..beta_M` in index order; `nu_j` is the
    /// tail sum `mu_j + ... + mu_N`. Indices `k` and `j` are 1-based.
    pub fn new(
        k: usize,
        j: usize,
        alpha: &Spectrum,
        beta_tail: &[Ratio],
        nu_j: Ratio,
    ) -> ConstraintFunction {
        assert!(1 <= j && j <= k && k <= alpha.len(), "bad constraint indices");
        assert_eq!(beta_tail.len(), alpha.len() - k, "tail must cover k+1..M");
        let offset: Ratio = beta_tail
            .iter()
            .enumerate()
            .map(|(idx, beta_m)| {
                let m = k + 1 + idx;
                (beta_m - &alpha.values()[m - j]).positive_part()
            })
            .sum();
        ConstraintFunction {
            k,
            j,
            alpha: alpha.clone(),
            beta_tail: beta_tail.to_vec(),
            offset,
            nu_j,
        }
    }

    /// Exact value of `f_{k;j}(t)`.
    pub fn value(&self, t: &Ratio) -> Ratio {
        let live: Ratio = (1..=self.k - self.j + 1)
            .map(|l| (t - &self.alpha.values()[l - 1]).positive_part())
            .sum();
        live + &self.offset
    }

    pub fn offset(&self) -> &Ratio {
        &self.offset
    }

    pub fn nu(&self) -> &Ratio {
        &self.nu_j
    }

    pub fn beta_tail(&self) -> &[Ratio] {
        &self.beta_tail
    }

    /// Largest `t` with `f_{k;j}(t) <= nu_j`, i.e. the right endpoint of the
    /// preimage. Walks the at most `k - j + 2` linear pieces in increasing
    /// `t` with exact arithmetic. Plateaus resolve to their right endpoint.
    pub fn max_feasible_level(&self) -> Result<Ratio, OptimizerError> {
        let n = self.k - self.j + 1;
        let alpha = self.alpha.values();
        let delta = &self.nu_j - &self.offset;
        if delta.is_negative() {
            return Err(OptimizerError::Internal(format!(
                "empty preimage at level {}, shift {}",
                self.k, self.j
            )));
        }
        // The variable part g(t) = sum_{l=1..n} (t - alpha_l)^+ vanishes for
        // t <= alpha_n and has slope n - i + 1 on [alpha_i, alpha_{i-1}).
        // Climb breakpoints until the next one overshoots delta.
        let mut i = n;
        let mut tail = alpha[n - 1].clone(); // alpha_i + ... + alpha_n
        while i > 1 {
            let count = Ratio::from_integer((n - i + 1) as i64);
            let g_at_next = &(&alpha[i - 2] * &count) - &tail;
            if g_at_next > delta {
                break;
            }
            i -= 1;
            tail = tail + &alpha[i - 1];
        }
        let count = Ratio::from_integer((n - i + 1) as i64);
        Ok((&delta + &tail) / count)
    }
}

/// Exact value of the tail constraint at `t`.
pub fn constraint_value(cf: &ConstraintFunction, t: &Ratio) -> Ratio {
    cf.value(t)
}

/// Record of one level solve. `b_values[j-1]` is the largest level allowed by
/// the shift-`j` constraint; `binding_set` lists the 1-based `j` attaining
/// the minimum and `j_of_k` is the smallest of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelTrace {
    pub k: usize,
    pub b_values: Vec<Ratio>,
    pub binding_set: Vec<usize>,
    pub j_of_k: usize,
}

/// Level traces in solve order, `k = M` down to `k = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimizerTrace {
    pub levels: Vec<LevelTrace>,
}

/// Solves level `k` given the already-fixed `beta_tail = beta_{k+1}..beta_M`:
/// returns `beta_k = min_j b_{k;j}` together with the per-shift record.
pub fn solve_level(
    k: usize,
    alpha: &Spectrum,
    mu: &Spectrum,
    beta_tail: &[Ratio],
) -> Result<(Ratio, LevelTrace), OptimizerError> {
    assert!(1 <= k && k <= alpha.len(), "level out of range");
    let nu = tail_sums(mu, k);
    let mut b_values = Vec::with_capacity(k);
    #[allow(clippy::needless_range_loop)]
    for j in 1..=k {
        let cf = ConstraintFunction::new(k, j, alpha, beta_tail, nu[j].clone());
        let b = cf.max_feasible_level()?;
        // The preimage endpoint always lands exactly on the bound.
        assert_eq!(cf.value(&b), nu[j], "boundary solve must be exact");
        b_values.push(b);
    }
    let beta_k = b_values.iter().min().expect("k >= 1").clone();
    let binding_set: Vec<usize> = b_values
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == beta_k)
        .map(|(idx, _)| idx + 1)
        .collect();
    let j_of_k = binding_set[0];
    Ok((
        beta_k,
        LevelTrace {
            k,
            b_values,
            binding_set,
            j_of_k,
        },
    ))
}

/// Minimal completion spectrum of `(alpha, mu)` with the full solve trace.
///
/// Always succeeds: the completion that adds `N` vectors of the prescribed
/// lengths exists for any inputs, and this routine returns the unique one
/// majorized by all others. Internal diagnostics are asserted on every run.
pub fn optimal_completion(alpha: &Spectrum, mu: &Spectrum) -> (Spectrum, OptimizerTrace) {
    let m_dim = alpha.len();
    let mut tail: Vec<Ratio> = Vec::new(); // beta_{k+1}..beta_M
    let mut levels = Vec::with_capacity(m_dim);
    for k in (1..=m_dim).rev() {
        let (beta_k, trace) =
            solve_level(k, alpha, mu, &tail).expect("level solve cannot fail on valid spectra");
        // The level never sinks below the alpha entry exposed by its binding
        // shift.
        assert!(
            alpha.values()[k - trace.j_of_k] <= beta_k,
            "level {} fell below its binding alpha",
            k
        );
        tail.insert(0, beta_k);
        // Constraints for shifts beyond the current level are not imposed by
        // the solve; they hold automatically. Probe them in debug builds.
        #[cfg(debug_assertions)]
        {
            let nu = tail_sums(mu, m_dim);
            #[allow(clippy::needless_range_loop)]
            for j in k + 1..=m_dim {
                let lhs: Ratio = (j..=m_dim)
                    .map(|m| (&tail[m - k] - &alpha.values()[m - j]).positive_part())
                    .sum();
                assert!(lhs <= nu[j], "trailing shift {j} violated at level {k}");
            }
        }
        levels.push(trace);
    }
    // Binding shifts move weakly left as the level index decreases.
    for pair in levels.windows(2) {
        assert!(
            pair[1].j_of_k <= pair[0].j_of_k,
            "binding shifts must be nondecreasing in k"
        );
    }
    let beta = Spectrum::new(tail).expect("water levels must be nonincreasing and nonnegative");
    let feasibility = completion_feasible(alpha, &beta, mu).expect("lengths match");
    assert!(feasibility.feasible, "computed spectrum must be feasible");
    (beta, OptimizerTrace { levels })
}

/// Precomputed data for [`optimal_completion_fast`]: `g` holds the variable
/// part of every constraint evaluated at every breakpoint,
/// `g[m-1][i-1] = sum_{l=1..m} (alpha_i - alpha_l)^+`, and `tail_mu[j-1]` is
/// `nu_j = mu_j + ... + mu_N` for `j = 1..M`.
#[derive(Debug, Clone)]
pub struct BreakpointTable {
    g: Vec<Vec<Ratio>>,
    tail_mu: Vec<Ratio>,
}

impl BreakpointTable {
    /// `g_m(alpha_i)` with 1-based `m, i`.
    pub fn g(&self, m: usize, i: usize) -> &Ratio {
        &self.g[m - 1][i - 1]
    }

    /// `nu_j` with 1-based `j <= M`.
    pub fn nu(&self, j: usize) -> &Ratio {
        &self.tail_mu[j - 1]
    }
}

/// Builds the breakpoint table in `O(M^2)` rational operations plus one
/// backward pass over `mu`.
pub fn build_breakpoint_table(alpha: &Spectrum, mu: &Spectrum) -> BreakpointTable {
    let m_dim = alpha.len();
    let mut g: Vec<Vec<Ratio>> = Vec::with_capacity(m_dim);
    for m in 1..=m_dim {
        let mut row = Vec::with_capacity(m_dim);
        for i in 1..=m_dim {
            let inc = (&alpha.values()[i - 1] - &alpha.values()[m - 1]).positive_part();
            row.push(if m == 1 {
                inc
            } else {
                &g[m - 2][i - 1] + &inc
            });
        }
        g.push(row);
    }
    let tail_mu = tail_sums(mu, m_dim)[1..].to_vec();
    BreakpointTable { g, tail_mu }
}

/// Minimal completion spectrum via the breakpoint table; bit-identical to
/// [`optimal_completion`] but with the per-constraint solve reduced to a
/// binary search plus one linear-piece evaluation.
pub fn optimal_completion_fast(alpha: &Spectrum, mu: &Spectrum) -> Spectrum {
    let m_dim = alpha.len();
    if m_dim == 0 {
        return Spectrum::zeros(0);
    }
    let table = build_breakpoint_table(alpha, mu);
    // prefix[i] = alpha_1 + ... + alpha_i
    let mut prefix = Vec::with_capacity(m_dim + 1);
    prefix.push(Ratio::zero());
    for a in alpha.iter() {
        let last = prefix.last().unwrap().clone();
        prefix.push(last + a);
    }
    // offsets[j-1] tracks sum_{m=k+1..M} (beta_m - alpha_{m-j+1})^+ for the
    // current k; each newly fixed level joins it incrementally.
    let mut offsets = vec![Ratio::zero(); m_dim];
    let mut beta_rev: Vec<Ratio> = Vec::with_capacity(m_dim);
    for k in (1..=m_dim).rev() {
        let mut beta_k: Option<Ratio> = None;
        for j in 1..=k {
            let n = k - j + 1;
            let delta = table.nu(j) - &offsets[j - 1];
            assert!(
                !delta.is_negative(),
                "empty preimage at level {k}, shift {j}"
            );
            // Smallest 1-based i with g_n(alpha_i) <= delta; the row of the
            // table is nonincreasing in i and ends at g_n(alpha_n) = 0.
            let row = &table.g[n - 1][..n];
            let i = row.partition_point(|gv| *gv > delta) + 1;
            assert!(i <= n, "search must land on a breakpoint");
            let count = Ratio::from_integer((n - i + 1) as i64);
            let t = (&delta + &(&prefix[n] - &prefix[i - 1])) / count;
            beta_k = Some(match beta_k {
                None => t,
                Some(b) => b.min(t),
            });
        }
        let beta_k = beta_k.expect("k >= 1");
        for j in 1..=k {
            let inc = (&beta_k - &alpha.values()[k - j]).positive_part();
            if !inc.is_zero() {
                offsets[j - 1] = &offsets[j - 1] + &inc;
            }
        }
        beta_rev.push(beta_k);
    }
    beta_rev.reverse();
    Spectrum::new(beta_rev).expect("water levels must be nonincreasing and nonnegative")
}
