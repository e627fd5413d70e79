//! Dense Hermitian eigensolver, backed by faer.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn to_faer(m: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

#[cfg(test)]
fn from_faer(m: &Mat<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
/// Only the lower triangle is read.
pub(crate) fn hermitian_eigen(m: &Mat<Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let values = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let f = to_faer(m);
    let values = f
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigen)?;
    Ok(values)
}

/// `max |M − M†|` over entries.
pub fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
