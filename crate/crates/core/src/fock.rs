//! Truncated two-mode Fock space: basis indexing, sparse ladder operators,
//! coherent states and density matrices.
//!
//! Basis states `|n_a, n_b⟩` with `0 ≤ n_a ≤ N_a`, `0 ≤ n_b ≤ N_b` are stored
//! row-major: `index = n_a·(N_b + 1) + n_b`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect};

/// Largest norm deficit `1 − ‖ψ_trunc‖²` tolerated for a coherent state.
pub const NORM_DEFICIT_TOL: f64 = 1e-12;

/// Per-mode cap of the automatic cutoff rule.
pub const MAX_AUTO_CUTOFF: usize = 40;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Highest retained Fock level of each mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cutoffs {
    pub na: usize,
    pub nb: usize,
}

impl Cutoffs {
    pub fn new(na: usize, nb: usize) -> Self {
        Self { na, nb }
    }

    /// Smallest `N > |z|² + 10|z| + 10` for each mode, capped at [`MAX_AUTO_CUTOFF`].
    pub fn for_amplitudes(alpha: Complex64, beta: Complex64) -> Self {
        Self::new(mode_cutoff(alpha.norm()), mode_cutoff(beta.norm()))
    }

    /// Smallest per-mode cutoffs whose Poisson tail beyond the cutoff is below
    /// `deficit`, capped at [`MAX_AUTO_CUTOFF`]. Tighter than [`Cutoffs::for_amplitudes`].
    pub fn minimal(alpha: Complex64, beta: Complex64, deficit: f64) -> Self {
        Self::new(minimal_mode_cutoff(alpha.norm_sqr(), deficit), minimal_mode_cutoff(beta.norm_sqr(), deficit))
    }

    pub fn dim(&self) -> usize {
        (self.na + 1) * (self.nb + 1)
    }

    pub fn index(&self, n_a: usize, n_b: usize) -> usize {
        n_a * (self.nb + 1) + n_b
    }

    /// Inverse of [`Cutoffs::index`].
    pub fn levels(&self, index: usize) -> (usize, usize) {
        (index / (self.nb + 1), index % (self.nb + 1))
    }

    /// Whether basis state `index` lies in the two highest retained levels of
    /// either mode (the highest only, for a mode truncated at N = 1). A mode with
    /// N = 0 is never counted.
    pub fn is_boundary(&self, index: usize) -> bool {
        let edge = |n: usize, top: usize| top >= 1 && n + 1 >= top.max(2);
        let (i, j) = self.levels(index);
        edge(i, self.na) || edge(j, self.nb)
    }

    /// Componentwise maximum.
    pub fn max(self, other: Cutoffs) -> Cutoffs {
        Cutoffs::new(self.na.max(other.na), self.nb.max(other.nb))
    }
}

fn mode_cutoff(r: f64) -> usize {
    let bound = r * r + 10.0 * r + 10.0;
    ((bound.floor() as usize) + 1).min(MAX_AUTO_CUTOFF)
}

fn minimal_mode_cutoff(mean: f64, deficit: f64) -> usize {
    // Poisson weights pₙ; tail(N) = Σ_{n>N} pₙ
    let mut weights = vec![(-mean).exp()];
    for n in 1..=4 * MAX_AUTO_CUTOFF {
        let next = weights[n - 1] * mean / n as f64;
        weights.push(next);
    }
    let mut tail: f64 = weights.iter().skip(MAX_AUTO_CUTOFF + 1).sum();
    for n in (0..MAX_AUTO_CUTOFF).rev() {
        tail += weights[n + 1];
        if tail >= deficit {
            return n + 1;
        }
    }
    0
}

/// Raw single-mode coefficients `e^{−|z|²/2} zⁿ/√n!` for `n = 0..=n_max`.
fn mode_coefficients(z: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * z / (n as f64).sqrt();
        out.push(c);
    }
    out
}

fn mode_deficit(coeffs: &[Complex64]) -> f64 {
    (1.0 - coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).max(0.0)
}

/// `1 − ‖P|α, β⟩‖²` for the projector `P` onto the truncated space.
pub fn coherent_norm_deficit(alpha: Complex64, beta: Complex64, cutoffs: Cutoffs) -> f64 {
    let da = mode_deficit(&mode_coefficients(alpha, cutoffs.na));
    let db = mode_deficit(&mode_coefficients(beta, cutoffs.nb));
    da + db - da * db
}

/// Projection of `|α, β⟩` onto the truncated space, without renormalization.
pub fn coherent_projection(alpha: Complex64, beta: Complex64, cutoffs: Cutoffs) -> DVector<Complex64> {
    let ca = mode_coefficients(alpha, cutoffs.na);
    let cb = mode_coefficients(beta, cutoffs.nb);
    DVector::from_fn(cutoffs.dim(), |k, _| {
        let (i, j) = cutoffs.levels(k);
        ca[i] * cb[j]
    })
}

/// Two-mode coherent state on the truncated space, renormalized to unit norm.
///
/// Fails with `TruncationTooSmall` if the discarded weight exceeds [`NORM_DEFICIT_TOL`].
pub fn coherent_state(alpha: Complex64, beta: Complex64, cutoffs: Cutoffs) -> Result<DVector<Complex64>> {
    let deficit = coherent_norm_deficit(alpha, beta, cutoffs);
    if deficit > NORM_DEFICIT_TOL {
        return Err(Error::TruncationTooSmall {
            what: "coherent-state norm deficit",
            value: deficit,
            limit: NORM_DEFICIT_TOL,
        });
    }
    let mut psi = coherent_projection(alpha, beta, cutoffs);
    let norm = psi.norm();
    psi /= Complex64::new(norm, 0.0);
    Ok(psi)
}

/// Sparse operator on the truncated space as a list of `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            *acc.entry((r, c)).or_insert(ZERO) += v;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, v)| *v != ZERO)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|k| (k, k, Complex64::ONE)))
    }

    /// Annihilation operator of mode a.
    pub fn annihilate_a(cutoffs: Cutoffs) -> Self {
        let mut t = Vec::new();
        for n_a in 1..=cutoffs.na {
            for n_b in 0..=cutoffs.nb {
                let v = Complex64::new((n_a as f64).sqrt(), 0.0);
                t.push((cutoffs.index(n_a - 1, n_b), cutoffs.index(n_a, n_b), v));
            }
        }
        Self::from_triplets(cutoffs.dim(), t)
    }

    /// Annihilation operator of mode b.
    pub fn annihilate_b(cutoffs: Cutoffs) -> Self {
        let mut t = Vec::new();
        for n_a in 0..=cutoffs.na {
            for n_b in 1..=cutoffs.nb {
                let v = Complex64::new((n_b as f64).sqrt(), 0.0);
                t.push((cutoffs.index(n_a, n_b - 1), cutoffs.index(n_a, n_b), v));
            }
        }
        Self::from_triplets(cutoffs.dim(), t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(r, c, v)| (r, c, v * s)))
    }

    pub fn add(&self, other: &SparseOp) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.entries.iter().chain(other.entries.iter()).copied())
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &SparseOp) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut by_row: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.dim];
        for &(r, c, v) in &other.entries {
            by_row[r].push((c, v));
        }
        let mut t = Vec::new();
        for &(r, k, v) in &self.entries {
            for &(c, w) in &by_row[k] {
                t.push((r, c, v * w));
            }
        }
        Self::from_triplets(self.dim, t)
    }

    /// `out += self · m` for a dense column-major `m`.
    pub fn mul_left_acc(&self, m: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n = self.dim;
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for j in 0..m.ncols() {
            let col = &src[j * n..(j + 1) * n];
            let out_col = &mut dst[j * n..(j + 1) * n];
            for &(r, c, v) in &self.entries {
                out_col[r] += v * col[c];
            }
        }
    }

    /// `out += m · self` for a dense column-major `m`.
    pub fn mul_right_acc(&self, m: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n = m.nrows();
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        for &(r, c, v) in &self.entries {
            let col = &src[r * n..(r + 1) * n];
            let out_col = &mut dst[c * n..(c + 1) * n];
            for (o, x) in out_col.iter_mut().zip(col) {
                *o += *x * v;
            }
        }
    }

    pub fn mul_left(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, m.ncols());
        self.mul_left_acc(m, &mut out);
        out
    }

    pub fn mul_right(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(m.nrows(), self.dim);
        self.mul_right_acc(m, &mut out);
        out
    }

    pub fn mul_vec(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.dim);
        for &(r, c, x) in &self.entries {
            out[r] += x * v[c];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

pub(crate) fn boundary_population(cutoffs: Cutoffs, rho: &DMatrix<Complex64>) -> f64 {
    (0..cutoffs.dim())
        .filter(|&k| cutoffs.is_boundary(k))
        .map(|k| rho[(k, k)].re)
        .sum()
}

/// Truncated two-mode density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    pub cutoffs: Cutoffs,
    pub entries: DMatrix<Complex64>,
}

/// Diagnostics of a density matrix against the physical-state invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateHealth {
    pub trace_error: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
}

impl FockDensityMatrix {
    pub fn new(cutoffs: Cutoffs, entries: DMatrix<Complex64>) -> Result<Self> {
        let d = cutoffs.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { cutoffs, entries })
    }

    pub fn vacuum(cutoffs: Cutoffs) -> Self {
        Self::fock(cutoffs, 0, 0)
    }

    /// `|n_a, n_b⟩⟨n_a, n_b|`.
    pub fn fock(cutoffs: Cutoffs, n_a: usize, n_b: usize) -> Self {
        let mut entries = DMatrix::zeros(cutoffs.dim(), cutoffs.dim());
        let k = cutoffs.index(n_a, n_b);
        entries[(k, k)] = Complex64::ONE;
        Self { cutoffs, entries }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(cutoffs: Cutoffs, psi: &DVector<Complex64>) -> Result<Self> {
        if psi.len() != cutoffs.dim() {
            return Err(Error::DimensionMismatch {
                expected: cutoffs.dim(),
                found: psi.len(),
            });
        }
        Ok(Self {
            cutoffs,
            entries: psi * psi.adjoint(),
        })
    }

    pub fn coherent(alpha: Complex64, beta: Complex64, cutoffs: Cutoffs) -> Result<Self> {
        Self::from_pure(cutoffs, &coherent_state(alpha, beta, cutoffs)?)
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.dim()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `Tr(ρ A)` for a sparse `A`.
    pub fn expect(&self, op: &SparseOp) -> Complex64 {
        op.entries
            .iter()
            .map(|&(r, c, v)| v * self.entries[(c, r)])
            .sum()
    }

    /// `(⟨a⟩, ⟨b⟩)`.
    pub fn mean_fields(&self) -> (Complex64, Complex64) {
        (
            self.expect(&SparseOp::annihilate_a(self.cutoffs)),
            self.expect(&SparseOp::annihilate_b(self.cutoffs)),
        )
    }

    /// Population at the truncation edge, see [`Cutoffs::is_boundary`].
    pub fn boundary_population(&self) -> f64 {
        boundary_population(self.cutoffs, &self.entries)
    }

    pub fn health(&self) -> Result<StateHealth> {
        let min_eigenvalue = hermitian_eigenvalues(&self.entries)?
            .first()
            .copied()
            .unwrap_or(0.0);
        Ok(StateHealth {
            trace_error: (self.trace() - Complex64::ONE).norm(),
            hermiticity_defect: hermiticity_defect(&self.entries),
            min_eigenvalue,
        })
    }
}
