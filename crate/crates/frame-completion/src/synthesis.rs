//! Numerical construction of completion vectors from a table of intermediate
//! spectra, plus the dense symmetric eigensolver used to verify the results.
//!
//! Each step appends one rank-one update `S + phi phi^T` whose spectrum moves
//! from one table row to the next. The squared projections of `phi` onto the
//! eigenspaces of `S` are forced by the two spectra (a partial-fraction
//! residue computation), so the construction is exact in principle; the
//! eigensolver is a plain cyclic Jacobi iteration, kept independent of the
//! construction so it can serve as an oracle for it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eigensteps::{validate_eigensteps, EigenstepsTable};
use crate::ratio::Ratio;
use crate::spectrum::{interlaces_over, Spectrum};

/// Largest tolerated asymmetry `|a_ij - a_ji|` relative to the matrix scale.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Jacobi stops when the off-diagonal Frobenius mass drops below this times
/// the matrix norm.
pub const JACOBI_EPS: f64 = 1e-14;
/// Jacobi sweep budget; exceeded only on pathological input.
pub const MAX_SWEEPS: usize = 64;
/// Relative tolerance for comparing computed spectra against exact targets.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-8;
/// Relative tolerance for squared vector lengths.
pub const NORM_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("eigensolver failed to converge")]
    NotConverged,
    #[error("matrix spectrum does not match the expected exact spectrum")]
    SpectrumMismatch,
    #[error("constructed update failed its spectrum check")]
    PostVerificationFailed,
    #[error("target spectrum does not interlace over the current one")]
    InterlacingViolated,
    #[error("table of intermediate spectra fails validation")]
    InvalidTable,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Accepts a square array that is symmetric up to [`SYMMETRY_TOL`]
    /// (relative to the largest entry) and stores its symmetric part.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<SymmetricMatrix, SynthesisError> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(SynthesisError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        let scale = rows
            .iter()
            .flatten()
            .fold(1.0_f64, |acc, x| acc.max(x.abs()));
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                if (rows[i][j] - rows[j][i]).abs() > SYMMETRY_TOL * scale {
                    return Err(SynthesisError::NotSymmetric);
                }
                data[i * dim + j] = 0.5 * (rows[i][j] + rows[j][i]);
            }
        }
        Ok(SymmetricMatrix { dim, data })
    }

    pub fn zeros(dim: usize) -> SymmetricMatrix {
        SymmetricMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn diagonal(values: &[f64]) -> SymmetricMatrix {
        let dim = values.len();
        let mut out = SymmetricMatrix::zeros(dim);
        for (i, v) in values.iter().enumerate() {
            out.data[i * dim + i] = *v;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].to_vec())
            .collect()
    }

    /// `self + phi phi^T`, exactly symmetric by construction.
    pub fn add_outer(&self, phi: &[f64]) -> SymmetricMatrix {
        assert_eq!(phi.len(), self.dim, "vector length must match dimension");
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.data[i * self.dim + j] += phi[i] * phi[j];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    sum += self.data[i * self.dim + j].powi(2);
                }
            }
        }
        sum.sqrt()
    }
}

/// Eigenvalues in nonincreasing order with matching orthonormal eigenvectors
/// (`vectors[i]` belongs to `values[i]`).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    /// A cheap operator-norm bound from the extreme eigenvalues.
    pub fn operator_norm(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(hi), Some(lo)) => hi.abs().max(lo.abs()),
            _ => 0.0,
        }
    }
}

/// Cyclic Jacobi eigensolver. Rotations zero one off-diagonal pair at a time;
/// sweeps repeat until the off-diagonal mass is below [`JACOBI_EPS`] times
/// the (rotation-invariant) Frobenius norm.
pub fn sym_eigen(s: &SymmetricMatrix) -> Result<EigenDecomposition, SynthesisError> {
    let n = s.dim;
    let mut a = s.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = JACOBI_EPS * a.frobenius_norm();

    let mut converged = a.off_diagonal_norm() <= threshold;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.data[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.data[q * n + q] - a.data[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                a.data[p * n + p] -= t * apq;
                a.data[q * n + q] += t * apq;
                a.data[p * n + q] = 0.0;
                a.data[q * n + p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a.data[k * n + p];
                        let akq = a.data[k * n + q];
                        a.data[k * n + p] = c * akp - sn * akq;
                        a.data[p * n + k] = a.data[k * n + p];
                        a.data[k * n + q] = sn * akp + c * akq;
                        a.data[q * n + k] = a.data[k * n + q];
                    }
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
        converged = a.off_diagonal_norm() <= threshold;
    }
    if !converged {
        return Err(SynthesisError::NotConverged);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.data[j * n + j]
            .partial_cmp(&a.data[i * n + i])
            .expect("eigenvalues are finite")
    });
    let values = order.iter().map(|&i| a.data[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&col| (0..n).map(|k| v[k * n + col]).collect())
        .collect();
    Ok(EigenDecomposition { values, vectors })
}

/// Squared eigenspace projections forced on the appended vector: for each
/// distinct value of `prev`, the residue of `-prod(x - next_m) / prod(x -
/// prev_l)` at that value. Zero when the multiplicity does not drop. The
/// values are nonnegative and sum to `sum(next) - sum(prev)` exactly.
pub fn residue_norms(
    prev: &Spectrum,
    next: &Spectrum,
) -> Result<BTreeMap<Ratio, Ratio>, SynthesisError> {
    if prev.len() != next.len() {
        return Err(SynthesisError::DimensionMismatch {
            expected: prev.len(),
            got: next.len(),
        });
    }
    if !interlaces_over(next, prev).expect("lengths match") {
        return Err(SynthesisError::InterlacingViolated);
    }

    let mut out = BTreeMap::new();
    let mut idx = 0;
    while idx < prev.len() {
        let value = &prev.values()[idx];
        let mult_prev = prev.iter().filter(|x| *x == value).count();
        let mult_next = next.iter().filter(|x| *x == value).count();
        debug_assert!(mult_next + 1 >= mult_prev, "interlacing bounds the drop");
        let residue = if mult_next >= mult_prev {
            Ratio::zero()
        } else {
            let numer: Ratio = next
                .iter()
                .filter(|x| *x != value)
                .map(|x| value - x)
                .fold(Ratio::one(), |acc, d| acc * d);
            let denom: Ratio = prev
                .iter()
                .filter(|x| *x != value)
                .map(|x| value - x)
                .fold(Ratio::one(), |acc, d| acc * d);
            -&(numer / denom)
        };
        assert!(
            !residue.is_negative(),
            "eigenspace projections must be nonnegative"
        );
        out.insert(value.clone(), residue);
        idx += mult_prev;
    }
    let total: Ratio = out.values().sum();
    assert_eq!(
        total,
        &next.sum() - &prev.sum(),
        "projections must account for the added trace"
    );
    Ok(out)
}

fn spectrum_matches(eig: &EigenDecomposition, target: &Spectrum) -> bool {
    let tol = SPECTRUM_MATCH_TOL * (1.0 + eig.operator_norm());
    eig.values
        .iter()
        .zip(target.iter())
        .all(|(got, want)| (got - want.to_f64()).abs() <= tol)
}

/// Unit vector inside the span of `columns`, chosen by attempt number:
/// the first basis vector, then the normalized diagonal direction, then a
/// seeded random combination.
fn eigenspace_direction(
    columns: &[&Vec<f64>],
    attempt: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let dim = columns[0].len();
    let coeffs: Vec<f64> = match attempt {
        0 => {
            let mut c = vec![0.0; columns.len()];
            c[0] = 1.0;
            c
        }
        1 => vec![1.0; columns.len()],
        _ => loop {
            let c: Vec<f64> = (0..columns.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if c.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
                break c;
            }
        },
    };
    let norm = coeffs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut u = vec![0.0; dim];
    for (col, coef) in columns.iter().zip(&coeffs) {
        for (uk, ck) in u.iter_mut().zip(col.iter()) {
            *uk += coef / norm * ck;
        }
    }
    u
}

/// Appends one vector to `s`, moving its spectrum from `prev` to `next`.
/// The eigenspace components of the vector are forced; within a degenerate
/// eigenspace any unit direction works, so a deterministic choice is made
/// first and alternatives (including a `seed`-driven random one) are tried
/// only if the numerical check of the result fails.
pub fn append_vector(
    s: &SymmetricMatrix,
    prev: &Spectrum,
    next: &Spectrum,
    seed: u64,
) -> Result<(Vec<f64>, SymmetricMatrix), SynthesisError> {
    if prev.len() != s.dim {
        return Err(SynthesisError::DimensionMismatch {
            expected: s.dim,
            got: prev.len(),
        });
    }
    let eig = sym_eigen(s)?;
    if !spectrum_matches(&eig, prev) {
        return Err(SynthesisError::SpectrumMismatch);
    }
    let residues = residue_norms(prev, next)?;

    // Runs of equal values in prev line up with the sorted eigenvectors.
    let mut groups: Vec<(Ratio, usize, usize)> = Vec::new(); // (value, start, len)
    let mut start = 0;
    while start < prev.len() {
        let value = prev.values()[start].clone();
        let len = prev.iter().skip(start).take_while(|x| **x == value).count();
        groups.push((value, start, len));
        start += len;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..3 {
        let mut phi = vec![0.0; s.dim];
        for (value, start, len) in &groups {
            let weight = residues[value].to_f64();
            if weight == 0.0 {
                continue;
            }
            let columns: Vec<&Vec<f64>> = eig.vectors[*start..start + len].iter().collect();
            let u = eigenspace_direction(&columns, attempt, &mut rng);
            let scale = weight.sqrt();
            for (pk, uk) in phi.iter_mut().zip(&u) {
                *pk += scale * uk;
            }
        }
        let s_new = s.add_outer(&phi);
        if spectrum_matches(&sym_eigen(&s_new)?, next) {
            return Ok((phi, s_new));
        }
        log::warn!(
            "appended vector missed its target spectrum on attempt {attempt}, retrying with a different eigenspace basis"
        );
    }
    Err(SynthesisError::PostVerificationFailed)
}

/// Completion vectors together with the exact squared lengths they are
/// supposed to have. Construction only checks shapes; the guarantee that the
/// actual lengths sit within [`NORM_MATCH_TOL`] of the targets is provided by
/// [`complete_frame`] for the sets it builds, and tested by
/// [`verify_completion`] for sets from anywhere else.
#[derive(Debug, Clone)]
pub struct VectorSet {
    vectors: Vec<Vec<f64>>,
    target_norms_sq: Spectrum,
}

impl VectorSet {
    pub fn new(vectors: Vec<Vec<f64>>, target_norms_sq: Spectrum) -> Result<VectorSet, SynthesisError> {
        if vectors.len() != target_norms_sq.len() {
            return Err(SynthesisError::DimensionMismatch {
                expected: target_norms_sq.len(),
                got: vectors.len(),
            });
        }
        Ok(VectorSet {
            vectors,
            target_norms_sq,
        })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn target_norms_sq(&self) -> &Spectrum {
        &self.target_norms_sq
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `a` plus the outer products of all vectors.
    pub fn completed_operator(&self, a: &SymmetricMatrix) -> SymmetricMatrix {
        self.vectors.iter().fold(a.clone(), |s, phi| s.add_outer(phi))
    }
}

/// Runs [`append_vector`] across all rows of a validated table, starting from
/// `a` (whose spectrum must match row zero). The returned set carries the
/// table's squared lengths as targets; each actual length is checked against
/// its target within [`NORM_MATCH_TOL`].
pub fn complete_frame_seeded(
    a: &SymmetricMatrix,
    table: &EigenstepsTable,
    seed: u64,
) -> Result<VectorSet, SynthesisError> {
    if a.dim() != table.alpha().len() {
        return Err(SynthesisError::DimensionMismatch {
            expected: table.alpha().len(),
            got: a.dim(),
        });
    }
    if !validate_eigensteps(table).pass() {
        return Err(SynthesisError::InvalidTable);
    }
    let mut s = a.clone();
    let mut vectors = Vec::with_capacity(table.num_vectors());
    for p in 1..=table.num_vectors() {
        let rows = table.rows();
        let (phi, s_new) = append_vector(&s, &rows[p - 1], &rows[p], seed.wrapping_add(p as u64))?;
        let norm_sq: f64 = phi.iter().map(|x| x * x).sum();
        let target = table.mu().values()[p - 1].to_f64();
        if (norm_sq - target).abs() > NORM_MATCH_TOL * target.max(1.0) {
            log::warn!("vector {p} has squared length {norm_sq}, expected {target}");
            return Err(SynthesisError::PostVerificationFailed);
        }
        s = s_new;
        vectors.push(phi);
    }
    VectorSet::new(vectors, table.mu().clone())
}

pub fn complete_frame(
    a: &SymmetricMatrix,
    table: &EigenstepsTable,
) -> Result<VectorSet, SynthesisError> {
    complete_frame_seeded(a, table, 0)
}

/// A completion problem recast as a construction from the zero operator:
/// every spectrum is shifted up by `shift` and the initial operator is built
/// vector by vector alongside the completion vectors.
#[derive(Debug, Clone)]
pub struct LiftedProblem {
    pub shift: Ratio,
    pub steps: EigenstepsTable,
}

impl LiftedProblem {
    /// Squared lengths of the full construction sequence: the shifted initial
    /// spectrum entries followed by the original lengths.
    pub fn lengths(&self) -> &Spectrum {
        self.steps.mu()
    }
}

/// Recasts a validated table over `(alpha, mu)` as one over `(0, nu)` where
/// `nu` prepends the entries of `alpha + shift` to `mu`. The shift
/// `max(0, mu_1 - alpha_M)` is the smallest that keeps `nu` nonincreasing.
pub fn lift_problem(table: &EigenstepsTable) -> Result<LiftedProblem, SynthesisError> {
    let m_dim = table.alpha().len();
    if m_dim == 0 {
        return Err(SynthesisError::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    if !validate_eigensteps(table).pass() {
        return Err(SynthesisError::InvalidTable);
    }
    let alpha = table.alpha();
    let mu = table.mu();
    let shift = if mu.is_empty() {
        Ratio::zero()
    } else {
        (&mu.values()[0] - &alpha.values()[m_dim - 1]).positive_part()
    };

    let mut lengths: Vec<Ratio> = alpha.iter().map(|a| a + &shift).collect();
    lengths.extend(mu.iter().cloned());
    let lengths = Spectrum::new(lengths).expect("shift keeps the lengths ordered");

    let mut rows = Vec::with_capacity(m_dim + table.num_vectors() + 1);
    for p in 0..=m_dim {
        let values: Vec<Ratio> = (1..=m_dim)
            .map(|m| {
                if m <= p {
                    &alpha.values()[m - 1] + &shift
                } else {
                    Ratio::zero()
                }
            })
            .collect();
        rows.push(Spectrum::new(values).expect("prefix rows stay ordered"));
    }
    for p in 1..=table.num_vectors() {
        let values: Vec<Ratio> = table.rows()[p].iter().map(|x| x + &shift).collect();
        rows.push(Spectrum::new(values).expect("shifted rows stay ordered"));
    }

    let lambda = rows.last().expect("at least one row").clone();
    let steps = EigenstepsTable::from_parts(Spectrum::zeros(m_dim), lambda, lengths, rows)
        .expect("shapes are consistent");
    debug_assert!(validate_eigensteps(&steps).pass());
    Ok(LiftedProblem { shift, steps })
}

/// Outcome of checking a proposed completion numerically. Deviations are
/// relative: the spectrum deviation is scaled by one plus the operator norm
/// and each squared-length deviation by `max(1, target)`.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub max_spectrum_deviation: f64,
    pub max_norm_deviation: f64,
    pub tolerance: f64,
}

/// Checks that `a` plus the outer products of the set's vectors has spectrum
/// `target` and that the squared vector lengths match the set's targets, both
/// within `tol` (relative, see [`VerificationReport`]).
pub fn verify_completion(
    a: &SymmetricMatrix,
    vs: &VectorSet,
    target: &Spectrum,
    tol: f64,
) -> Result<VerificationReport, SynthesisError> {
    if target.len() != a.dim() {
        return Err(SynthesisError::DimensionMismatch {
            expected: a.dim(),
            got: target.len(),
        });
    }
    for phi in vs.vectors() {
        if phi.len() != a.dim() {
            return Err(SynthesisError::DimensionMismatch {
                expected: a.dim(),
                got: phi.len(),
            });
        }
    }

    let eig = sym_eigen(&vs.completed_operator(a))?;
    let spectrum_scale = 1.0 + eig.operator_norm();
    let max_spectrum_deviation = eig
        .values
        .iter()
        .zip(target.iter())
        .map(|(got, want)| (got - want.to_f64()).abs() / spectrum_scale)
        .fold(0.0_f64, f64::max);
    let max_norm_deviation = vs
        .vectors()
        .iter()
        .zip(vs.target_norms_sq().iter())
        .map(|(phi, m)| {
            let norm_sq: f64 = phi.iter().map(|x| x * x).sum();
            let want = m.to_f64();
            (norm_sq - want).abs() / want.max(1.0)
        })
        .fold(0.0_f64, f64::max);
    Ok(VerificationReport {
        pass: max_spectrum_deviation <= tol && max_norm_deviation <= tol,
        max_spectrum_deviation,
        max_norm_deviation,
        tolerance: tol,
    })
}
