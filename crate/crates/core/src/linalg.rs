//! Small dense linear-algebra helpers shared across the crate.
//!
//! Everything here operates on matrices of at most a few thousand rows;
//! callers are responsible for keeping dimensions desk-scale.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

/// Operator norm (largest singular value).
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Frobenius deviation from Hermiticity.
pub fn hermiticity_error(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

/// Frobenius deviation of M†M from the identity.
pub fn unitarity_error(m: &CMat) -> f64 {
    (m.adjoint() * m - identity(m.nrows())).norm()
}

/// Frobenius deviation from being an orthogonal projector (M² = M = M†).
pub fn projector_error(m: &CMat) -> f64 {
    let idem = (m * m - m).norm();
    idem.max(hermiticity_error(m))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so callers may pass matrices that are
/// Hermitian only up to roundoff.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let dim = m.nrows();
    let mut vectors = CMat::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eig_hermitian(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn max_eig_hermitian(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Kronecker product with `b` on the low bits: (a ⊗ b)[(i_a i_b), (j_a j_b)].
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra * rb, ca * cb);
    for ia in 0..ra {
        for ja in 0..ca {
            let v = a[(ia, ja)];
            if v == Complex64::ZERO {
                continue;
            }
            for ib in 0..rb {
                for jb in 0..cb {
                    out[(ia * rb + ib, ja * cb + jb)] = v * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// exp(iH) for Hermitian H via eigendecomposition.
pub fn exp_i_hermitian(h: &CMat) -> CMat {
    let (values, vectors) = hermitian_eigen(h);
    let dim = h.nrows();
    let mut phases = CMat::zeros(dim, dim);
    for (i, lam) in values.iter().enumerate() {
        phases[(i, i)] = Complex64::new(lam.cos(), lam.sin());
    }
    &vectors * phases * vectors.adjoint()
}

/// Hermitian logarithm generator of a unitary: H with U = exp(iH) and
/// eigenphases in (-π, π].
///
/// Diagonalizes the Hermitian part, then splits degenerate cos-clusters with
/// the skew part so ±λ pairs are resolved without a general complex
/// eigensolver.
pub fn log_unitary(u: &CMat) -> Result<CMat> {
    let dim = u.nrows();
    let err = unitarity_error(u);
    if err > 1e-10 {
        return Err(Error::NotUnitary(err));
    }
    let cos_part = (u + u.adjoint()) * Complex64::new(0.5, 0.0);
    let sin_part = (u - u.adjoint()) * Complex64::new(0.0, -0.5);
    let (cos_vals, basis) = hermitian_eigen(&cos_part);

    let mut h = CMat::zeros(dim, dim);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (cos_vals[end] - cos_vals[start]).abs() < 1e-8 {
            end += 1;
        }
        let r = end - start;
        let block = basis.columns(start, r).clone_owned();
        // Restrict the skew part to the cluster and rediagonalize.
        let k_small = block.adjoint() * &sin_part * &block;
        let (sin_vals, w) = hermitian_eigen(&k_small);
        let refined = &block * &w;
        for (t, sin_val) in sin_vals.iter().enumerate() {
            let lam = sin_val.atan2(cos_vals[start]);
            let v = refined.column(t);
            let outer = v * v.adjoint();
            h += outer * Complex64::new(lam, 0.0);
        }
        start = end;
    }
    Ok(h)
}
