use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[r * dim + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from row-major complex entries; panics unless `data.len()` is a square.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "entry count must be dim^2");
        Self { dim, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |r, c| {
            assert_eq!(rows[r].len(), dim, "rows must be square");
            C64::new(rows[r][c], 0.0)
        })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// |row><col| in dimension `dim`.
    pub fn unit(dim: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(row, col)] = ONE;
        m
    }

    /// Outer product |a><b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |r, c| a[r] * b[c].conj())
    }

    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in axpy");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matmul");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |A - A^dagger|
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within `rel_tol` of max|A|.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs();
        self.hermiticity_defect() <= rel_tol * scale.max(f64::MIN_POSITIVE)
    }

    /// (A + A^dagger) / 2
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| 0.5 * (self[(r, c)] + self[(c, r)].conj()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Principal sub-block picked by `indices` (rows and columns).
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), |r, c| self[(indices[r], indices[c])])
    }

    /// Embeds `self` into a `dim`-dimensional zero matrix at the given indices.
    pub fn embed(&self, dim: usize, indices: &[usize]) -> Self {
        assert_eq!(indices.len(), self.dim);
        let mut out = Self::zeros(dim);
        for (r, &ir) in indices.iter().enumerate() {
            for (c, &ic) in indices.iter().enumerate() {
                out[(ir, ic)] = self[(r, c)];
            }
        }
        out
    }

    /// Nonzero entries as (row, col, value) triplets.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let n = self.dim;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(|(k, v)| (k / n, k % n, *v))
            .collect()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim == expected {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected,
                got: self.dim,
            })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in add");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        let mut out = self.clone();
        out.axpy(-ONE, rhs);
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Kronecker product, dimension `dim(a) * dim(b)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(na * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)])
}

pub mod pauli {
    use super::*;

    pub fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_vec(2, vec![ZERO, -I, I, ZERO])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_identity_is_identity() {
        let k = kron(&pauli::id(), &pauli::id());
        assert_eq!(k, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_x_on_first_factor_flips_high_bit() {
        let k = kron(&pauli::x(), &pauli::id());
        let ket00 = [ONE, ZERO, ZERO, ZERO];
        assert_eq!(k.apply(&ket00), vec![ZERO, ZERO, ONE, ZERO]);
    }

    #[test]
    fn kron_zz_diagonal() {
        let k = kron(&pauli::z(), &pauli::z());
        let d: Vec<f64> = k.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, -1.0, -1.0, 1.0]);
        assert_eq!(k.max_abs_diff(&ComplexMatrix::from_diag(&k.diagonal())), 0.0);
    }

    #[test]
    fn pauli_algebra() {
        let xy = pauli::x().matmul(&pauli::y());
        assert!(xy.max_abs_diff(&pauli::z().scale(I)) < 1e-15);
        assert!(pauli::y().is_hermitian(0.0));
        assert!(!ComplexMatrix::unit(2, 0, 1).is_hermitian(1e-12));
    }

    #[test]
    fn embed_then_submatrix_roundtrip() {
        let a = pauli::y();
        let big = a.embed(4, &[1, 3]);
        assert_eq!(big.submatrix(&[1, 3]), a);
        assert_eq!(big[(0, 0)], ZERO);
    }
}
