//! Small dense linear-algebra helpers used throughout the crate.
//!
//! Everything here operates on symmetric matrices of modest size (the
//! response dimension r), so plain eigendecompositions are cheap and
//! robustness matters more than asymptotic speed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue threshold below which a covariance matrix is
/// treated as singular.
pub const PD_RTOL: f64 = 1e-10;

/// Eigenvalue floor applied inside symmetric square roots.
pub const SQRT_FLOOR: f64 = 1e-12;

/// Log-determinant of a symmetric positive-definite matrix via Cholesky.
pub fn logdet_spd(m: &DMatrix<f64>, label: &str) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    match m.clone().cholesky() {
        Some(chol) => Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()),
        None => Err(Error::DegenerateCovariance(format!(
            "{label} is not positive definite (Cholesky failed)"
        ))),
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues sorted in
/// descending order and a deterministic sign convention on eigenvectors
/// (largest-magnitude component positive).
pub fn sym_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).clone_owned();
        let pivot = col
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        if pivot < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Checks the positive-definiteness contract: smallest eigenvalue must
/// exceed `PD_RTOL` times the largest.
pub fn check_spd(m: &DMatrix<f64>, label: &str) -> Result<()> {
    if m.nrows() == 0 {
        return Ok(());
    }
    let eig = m.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= PD_RTOL * max {
        return Err(Error::DegenerateCovariance(format!(
            "{label}: eigenvalue range [{min:.6e}, {max:.6e}] fails the relative threshold {PD_RTOL:.0e}"
        )));
    }
    Ok(())
}

/// Orthonormal basis of the orthogonal complement of span(g).
///
/// Computed from the eigenvectors of the projector I - gg' with
/// eigenvalue near one, which is robust for any semi-orthogonal g.
pub fn orthonormal_complement(g: &DMatrix<f64>) -> DMatrix<f64> {
    let r = g.nrows();
    let k = g.ncols();
    if k == 0 {
        return DMatrix::identity(r, r);
    }
    let proj = DMatrix::identity(r, r) - g * g.transpose();
    let (values, vectors) = sym_eigen_desc(&proj);
    let m = r - k;
    debug_assert!(values[m - 1] > 0.5, "complement eigenvalues separated");
    vectors.columns(0, m).clone_owned()
}

/// True when g'g is the identity within `tol` per entry.
pub fn is_semi_orthogonal(g: &DMatrix<f64>, tol: f64) -> bool {
    let gram = g.transpose() * g;
    let k = g.ncols();
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            if (gram[(i, j)] - target).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Principal angles (radians, ascending) between the column spans of two
/// semi-orthogonal matrices.
pub fn principal_angles(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let m = a.transpose() * b;
    let mut cosines = m.svd(false, false).singular_values.iter().cloned().collect::<Vec<_>>();
    cosines.sort_by(|x, y| y.total_cmp(x));
    cosines.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect()
}

/// Largest principal angle, a metric between subspaces of equal dimension.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    principal_angles(a, b).last().copied().unwrap_or(0.0)
}

/// Symmetric square root with eigenvalues floored at `SQRT_FLOOR`.
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_power(m, 0.5)
}

/// Symmetric inverse square root with eigenvalues floored at `SQRT_FLOOR`.
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_power(m, -0.5)
}

fn sym_power(m: &DMatrix<f64>, exponent: f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen_desc(m);
    let powered = DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| v.max(SQRT_FLOOR).powf(exponent)),
    );
    &vectors * DMatrix::from_diagonal(&powered) * vectors.transpose()
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

/// Column-major vectorization.
pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}
