//! Small symmetric-matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOLERANCE: f64 = 1e-10;

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Internal(format!(
            "expected a square matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::Internal(format!(
            "matrix is not symmetric (max |H − Hᵀ| = {asym:e})"
        )));
    }
    Ok(())
}

/// Replaces every eigenvalue `λ` of `h` by `max(|λ|, floor)`.
pub fn regularize(h: &DMatrix<f64>, floor: f64) -> Result<DMatrix<f64>> {
    check_symmetric(h)?;
    let eig = SymmetricEigen::new(h.clone());
    let values = eig.eigenvalues.map(|l| l.abs().max(floor));
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&values) * eig.eigenvectors.transpose())
}

/// `regularize(h, floor)⁻¹ · rhs`, computed from one eigendecomposition.
pub fn regularized_solve(h: &DMatrix<f64>, floor: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    check_symmetric(h)?;
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut coeffs = v.transpose() * DVector::from_column_slice(rhs);
    for (c, l) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c /= l.abs().max(floor);
    }
    Ok((v * coeffs).as_slice().to_vec())
}

/// `exp(m)` for symmetric `m`.
pub fn expm_symmetric(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    let eig = SymmetricEigen::new(m.clone());
    let values = eig.eigenvalues.map(f64::exp);
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&values) * eig.eigenvectors.transpose())
}

/// `(a bᵀ + b aᵀ) / 2`.
pub fn symmetric_outer(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let d = a.len();
    DMatrix::from_fn(d, d, |i, j| (a[i] * b[j] + b[i] * a[j]) / 2.0)
}
