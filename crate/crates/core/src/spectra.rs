//! Ground-energy computation: dense Hermitian diagonalization for small
//! registers and a matrix-free Lanczos solver with full reorthogonalization
//! for larger ones.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::LayeredHamiltonian;
use crate::rng;
use crate::state::StateVector;

/// Largest register accepted by the dense path.
pub const DENSE_QUBIT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GroundEnergyResult {
    pub value: f64,
    /// ‖Hv − λv‖ recomputed from scratch for the returned eigenpair.
    pub residual: f64,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
}

/// Smallest eigenvalue by dense Hermitian diagonalization
/// (tridiagonalization + implicit-shift iteration under the hood).
pub fn ground_energy_dense(h: &LayeredHamiltonian) -> Result<GroundEnergyResult> {
    if h.num_qubits() > DENSE_QUBIT_CAP {
        return Err(Error::CapExceeded {
            what: "dense diagonalization",
            got: h.num_qubits(),
            cap: DENSE_QUBIT_CAP,
        });
    }
    let dense = h.dense()?;
    let sym = (&dense + dense.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let (idx, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonzero dimension");
    let v = eig.eigenvectors.column(idx).clone_owned();
    let psi = StateVector::from_amplitudes(h.num_qubits(), v.iter().copied().collect())?;
    let residual = residual_norm(h, &psi, value)?;
    Ok(GroundEnergyResult { value, residual, method: Method::Dense, iterations: 0, converged: true })
}

fn residual_norm(h: &LayeredHamiltonian, v: &StateVector, lambda: f64) -> Result<f64> {
    let mut hv = h.matvec(v)?;
    hv.axpy(Complex64::new(-lambda, 0.0), v);
    Ok(hv.norm())
}

/// Smallest eigenvalue by Lanczos iteration with full reorthogonalization,
/// started from a seeded random vector. Non-convergence is reported in the
/// result, not an error.
pub fn ground_energy_iterative(
    h: &LayeredHamiltonian,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<GroundEnergyResult> {
    let n = h.num_qubits();
    let dim = 1usize << n;
    let mut rng = rng::stream(seed, "lanczos-start", 0);
    let start: Vec<Complex64> = (0..dim).map(|_| rng::complex_gaussian(&mut rng)).collect();
    let v0 = StateVector::from_amplitudes(n, start)?.normalize()?;

    let max_iter = max_iter.max(1).min(dim);
    let mut basis: Vec<StateVector> = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut best_value = f64::INFINITY;
    let mut ritz_in_basis: Vec<Complex64> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for k in 0..max_iter {
        iterations = k + 1;
        let vk = basis[k].clone();
        let mut w = h.matvec(&vk)?;
        if k > 0 {
            let beta_prev = betas[k - 1];
            w.axpy(Complex64::new(-beta_prev, 0.0), &basis[k - 1]);
        }
        let alpha = vk.inner(&w)?.re;
        alphas.push(alpha);
        w.axpy(Complex64::new(-alpha, 0.0), &vk);
        // Full reorthogonalization, two passes.
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.inner(&w)?;
                if overlap.norm() > 0.0 {
                    w.axpy(-overlap, b);
                }
            }
        }
        let beta = w.norm();

        // Ritz values of the current tridiagonal block.
        let (theta, s_min) = tridiagonal_ground(&alphas, &betas);
        best_value = theta;
        ritz_in_basis = s_min.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let est_residual = beta * s_min.last().copied().unwrap_or(1.0).abs();
        if est_residual <= tol.max(1e-14) || beta <= 1e-14 {
            converged = true;
            break;
        }
        betas.push(beta);
        let mut next = w;
        next.scale(Complex64::new(1.0 / beta, 0.0));
        basis.push(next);
    }

    // Assemble the Ritz vector and recompute the residual from scratch.
    let mut ritz = basis[0].zero_like();
    for (coeff, b) in ritz_in_basis.iter().zip(&basis) {
        ritz.axpy(*coeff, b);
    }
    let norm = ritz.norm();
    let (value, residual) = if norm > 0.0 {
        let ritz = ritz.normalize()?;
        (best_value, residual_norm(h, &ritz, best_value)?)
    } else {
        (best_value, f64::NAN)
    };
    Ok(GroundEnergyResult { value, residual, method: Method::Iterative, iterations, converged })
}

/// Ground eigenpair of the real symmetric tridiagonal matrix given by
/// `alphas` (diagonal) and `betas` (off-diagonal).
fn tridiagonal_ground(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonzero dimension");
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}
