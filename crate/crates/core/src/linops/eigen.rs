use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenpairs of a Hermitian matrix.
///
/// `values` are ascending. Column `k` of `vectors` is the eigenvector for
/// `values[k]`, with its phase fixed so that the largest-magnitude entry is
/// real and positive (lowest row index wins ties).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        let n = self.vectors.dim();
        (0..n).map(|r| self.vectors[(r, k)]).collect()
    }

    /// P diag(values) P^dagger
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d: Vec<C64> = self.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.vectors
            .matmul(&ComplexMatrix::from_diag(&d))
            .matmul(&self.vectors.adjoint())
    }

    /// Smallest gap between `values[k]` and any other eigenvalue.
    pub fn gap(&self, k: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, v)| (v - self.values[k]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest gap between any two adjacent eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn eig_hermitian(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let n = h.dim();
    let scale = h.max_abs();
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!(
            "eig_hermitian needs a Hermitian matrix (|A - A^dagger| = {defect:.3e})"
        )));
    }
    if !h.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }

    let sym = h.hermitian_part();
    let m = DMatrix::from_row_slice(n, n, sym.as_slice());
    let eig = m.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        let v: Vec<C64> = (0..n).map(|r| eig.eigenvectors[(r, k)]).collect();
        let v = fix_gauge(v);
        for (r, x) in v.into_iter().enumerate() {
            vectors[(r, col)] = x;
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Normalizes `v` and rotates its phase so the dominant entry is real positive.
fn fix_gauge(mut v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .position(|x| x.norm() >= max * (1.0 - 1e-10))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for x in v.iter_mut() {
        *x = *x * phase / norm;
    }
    v[pivot] = C64::new(v[pivot].re, 0.0);
    v
}
