use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivots below this (relative to the largest diagonal entry) count as singular.
pub const PIVOT_TOL: f64 = 1e-14;
/// Relative residual accepted on every solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Symmetric pentadiagonal operator stored by bands.
///
/// `diag[i] = A[i][i]`, `off1[i] = A[i][i+1]`, `off2[i] = A[i][i+2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandedSystem {
    pub n: usize,
    pub diag: Vec<f64>,
    pub off1: Vec<f64>,
    pub off2: Vec<f64>,
}

impl BandedSystem {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            diag: vec![0.0; n],
            off1: vec![0.0; n.saturating_sub(1)],
            off2: vec![0.0; n.saturating_sub(2)],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (i, j) = if r <= c { (r, c) } else { (c, r) };
        match j - i {
            0 => self.diag[i],
            1 => self.off1[i],
            2 => self.off2[i],
            _ => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(2);
                let hi = (i + 2).min(n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Band LU without pivoting; fine for the (negative) definite systems built here.
    pub fn factor(&self) -> Result<BandedLu> {
        let n = self.n;
        // row i holds A[i][i-2..=i+2] at offsets 0..5
        let mut a = vec![[0.0f64; 5]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                let j = i as isize + k as isize - 2;
                if j >= 0 && (j as usize) < n {
                    *v = self.get(i, j as usize);
                }
            }
        }
        let scale = self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for k in 0..n {
            let pivot = a[k][2];
            if !(pivot.abs() >= PIVOT_TOL * scale) || scale == 0.0 {
                return Err(Error::SingularBanded { row: k, pivot });
            }
            for i in k + 1..(k + 3).min(n) {
                let off = i - k;
                let f = a[i][2 - off] / pivot;
                a[i][2 - off] = f;
                for j in 1..3 {
                    if k + j < n && 2 - off + j < 5 {
                        a[i][2 - off + j] -= f * a[k][2 + j];
                    }
                }
            }
        }
        Ok(BandedLu { system: self.clone(), lu: a })
    }
}

/// Factored [`BandedSystem`]; multipliers stored below the diagonal.
#[derive(Clone, Debug)]
pub struct BandedLu {
    system: BandedSystem,
    lu: Vec<[f64; 5]>,
}

impl BandedLu {
    /// Solves A x = b and checks the residual; returns x and ‖Ax − b‖∞ / ‖b‖∞.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = self.system.n;
        if b.len() != n {
            return Err(Error::Dimension { expected: n, got: b.len() });
        }
        let a = &self.lu;
        let mut y = b.to_vec();
        for i in 0..n {
            for off in 1..=2.min(i) {
                y[i] -= a[i][2 - off] * y[i - off];
            }
        }
        let mut x = y;
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in 1..3 {
                if i + j < n {
                    s -= a[i][2 + j] * x[i + j];
                }
            }
            x[i] = s / a[i][2];
        }
        let ax = self.system.matvec(&x);
        let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rnorm = ax.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        let rel = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };
        if rel > RESIDUAL_TOL {
            log::warn!("banded solve residual {rel:.3e} exceeds {RESIDUAL_TOL:.0e}");
        }
        Ok((x, rel))
    }
}
