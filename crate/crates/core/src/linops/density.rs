use num_complex::Complex64 as C64;

use super::eigen::eig_hermitian;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::Precondition(format!(
                "density matrix trace is {:.10}{:+.3e}i",
                tr.re, tr.im
            )));
        }
        if m.hermiticity_defect() > HERMITIAN_TOL {
            return Err(Error::Precondition("density matrix is not Hermitian".into()));
        }
        let eig = eig_hermitian(&m.hermitian_part())?;
        if eig.values[0] < -POSITIVITY_TOL {
            return Err(Error::Precondition(format!(
                "density matrix has negative eigenvalue {:.3e}",
                eig.values[0]
            )));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by the propagator, which maintains the invariants.
    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// |k><k| in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        Self(ComplexMatrix::unit(dim, k, k))
    }

    /// Normalized projector onto `psi`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::Precondition("state vector has zero norm".into()));
        }
        let v: Vec<C64> = psi.iter().map(|x| x / norm2.sqrt()).collect();
        Ok(Self(ComplexMatrix::projector(&v)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[(k, k)].re
    }

    pub fn purity(&self) -> f64 {
        self.0.matmul(&self.0).trace().re
    }
}

/// Overlap Tr(ρ_t ρ_f) with a pure target `rho_t`.
///
/// For a pure target this equals the squared Uhlmann fidelity; mixed targets
/// are rejected.
pub fn state_fidelity(rho_f: &DensityMatrix, rho_t: &DensityMatrix) -> Result<f64> {
    rho_f.matrix().check_dim(rho_t.dim())?;
    let purity = rho_t.purity();
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::NotPure { purity });
    }
    let f = rho_t.matrix().matmul(rho_f.matrix()).trace().re;
    Ok(f.clamp(0.0, 1.0))
}
