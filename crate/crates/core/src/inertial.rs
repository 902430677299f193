//! Inertial-frame transformation and inertiality/adiabaticity diagnostics.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{eig_hermitian, ComplexMatrix, HermitianEigen, TimeGrid, I};
use crate::pulses::{first_derivative, ControlPulse, ThetaProfile};

/// Relative spectral gap below which a sample counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Lab Hamiltonians together with their eigenvector frame.
#[derive(Clone, Debug)]
pub struct FrameTrajectory {
    pub grid: TimeGrid,
    pub lab_h: Vec<ComplexMatrix>,
    /// P^dagger H P - i P^dagger dP/dt
    pub frame_h: Vec<ComplexMatrix>,
    pub p: Vec<ComplexMatrix>,
    /// Rescaled time built from the largest eigenvalue magnitude of H.
    pub tau: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InertialReport {
    pub chi: Vec<f64>,
    pub eta_i: Vec<f64>,
    pub eta_a: Vec<f64>,
    pub max_eta_i: f64,
    pub max_eta_a: f64,
    pub mean_eta_i: f64,
}

impl InertialReport {
    /// Diagnostics of a θ-parameterized two-level protocol with effective Rabi rate `omega`.
    pub fn from_protocol(theta: ThetaProfile, omega: &[f64], grid: &TimeGrid) -> Result<Self> {
        Self::from_chi(stirap_chi(theta, omega, grid)?, omega, grid)
    }

    /// Diagnostics of sampled pump/Stokes envelopes read as Ω₁ = Ω sin θ,
    /// Ω₂ = Ω cos θ, with θ̇ by finite differences.
    pub fn from_pulses(pump: &ControlPulse, stokes: &ControlPulse) -> Result<Self> {
        if pump.grid() != stokes.grid() {
            return Err(Error::GridMismatch);
        }
        let grid = pump.grid();
        let a = pump.magnitudes();
        let b = stokes.magnitudes();
        let omega: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.hypot(*y)).collect();
        if let Some(index) = omega.iter().position(|&o| !(o > 0.0 && o.is_finite())) {
            return Err(Error::ZeroField { index });
        }
        let theta: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.atan2(*y)).collect();
        let theta_dot = first_derivative(&theta, grid.dt());
        let chi: Vec<f64> = theta_dot.iter().zip(&omega).map(|(t, o)| t / o).collect();
        Self::from_chi(chi, &omega, grid)
    }

    fn from_chi(chi: Vec<f64>, omega: &[f64], grid: &TimeGrid) -> Result<Self> {
        let eta_i = eta_inertial(&chi, omega, grid)?;
        let eta_a = eta_adiabatic_2level(&chi);
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            max_eta_i: max(&eta_i),
            max_eta_a: max(&eta_a),
            mean_eta_i: eta_i.iter().sum::<f64>() / eta_i.len() as f64,
            chi,
            eta_i,
            eta_a,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_len(len: usize, grid: &TimeGrid) -> Result<()> {
    if len != grid.len() {
        return Err(Error::Dimension { expected: grid.len(), got: len });
    }
    Ok(())
}

fn checked_eig(h: &ComplexMatrix, index: usize) -> Result<HermitianEigen> {
    let eig = eig_hermitian(h)?;
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = eig.min_gap();
    if h.dim() > 1 && gap < DEGENERACY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Degenerate { index, gap });
    }
    Ok(eig)
}

/// Eigendecompositions along a trajectory with column signs aligned to the
/// previous sample.
fn aligned_eigs(hs: &[ComplexMatrix]) -> Result<Vec<HermitianEigen>> {
    let mut eigs: Vec<HermitianEigen> = hs
        .par_iter()
        .enumerate()
        .map(|(i, h)| checked_eig(h, i))
        .collect::<Result<_>>()?;
    for i in 1..eigs.len() {
        let (done, rest) = eigs.split_at_mut(i);
        let prev = &done[i - 1].vectors;
        let cur = &mut rest[0].vectors;
        let n = cur.dim();
        for k in 0..n {
            let overlap: C64 = (0..n).map(|r| prev[(r, k)].conj() * cur[(r, k)]).sum();
            if overlap.re < 0.0 {
                for r in 0..n {
                    cur[(r, k)] = -cur[(r, k)];
                }
            }
        }
    }
    Ok(eigs)
}

/// Central-difference time derivative of a matrix trajectory (second-order
/// one-sided stencils at the ends).
fn matrix_derivative(ms: &[ComplexMatrix], x: &[f64]) -> Vec<ComplexMatrix> {
    let n = ms.len();
    (0..n)
        .map(|i| {
            let (a, b, c, w) = if i == 0 {
                (0, 1, 2, [-3.0, 4.0, -1.0])
            } else if i == n - 1 {
                (n - 3, n - 2, n - 1, [1.0, -4.0, 3.0])
            } else {
                (i - 1, i, i + 1, [-1.0, 0.0, 1.0])
            };
            let h = if i == 0 || i == n - 1 {
                x[c] - x[a]
            } else {
                x[i + 1] - x[i - 1]
            };
            let mut d = ms[a].scale_real(w[0] / h);
            d.axpy(C64::new(w[1] / h, 0.0), &ms[b]);
            d.axpy(C64::new(w[2] / h, 0.0), &ms[c]);
            d
        })
        .collect()
}

pub fn to_inertial_frame(h: &[ComplexMatrix], grid: &TimeGrid) -> Result<FrameTrajectory> {
    check_len(h.len(), grid)?;
    let eigs = aligned_eigs(h)?;
    let p: Vec<ComplexMatrix> = eigs.iter().map(|e| e.vectors.clone()).collect();
    let dp = matrix_derivative(&p, &grid.times());
    let frame_h: Vec<ComplexMatrix> = (0..h.len())
        .into_par_iter()
        .map(|i| {
            let pd = p[i].adjoint();
            let mut m = pd.matmul(&h[i]).matmul(&p[i]);
            m.axpy(-I, &pd.matmul(&dp[i]));
            // the finite-difference connection term is anti-Hermitian only to O(dt^2)
            m.hermitian_part()
        })
        .collect();
    let spread: Vec<f64> = eigs
        .iter()
        .map(|e| e.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let tau = rescaled_time(&spread, grid);
    Ok(FrameTrajectory { grid: *grid, lab_h: h.to_vec(), frame_h, p, tau })
}

/// χ = θ̇/Ω with the analytic θ̇.
pub fn stirap_chi(theta: ThetaProfile, omega: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    check_len(omega.len(), grid)?;
    grid.times()
        .iter()
        .zip(omega)
        .enumerate()
        .map(|(i, (&t, &w))| {
            if w == 0.0 || !w.is_finite() {
                return Err(Error::ZeroField { index: i });
            }
            Ok(theta.theta_dot(t) / w)
        })
        .collect()
}

/// |χ̇ / (4Ω(4 + χ²))| pointwise.
pub fn eta_inertial(chi: &[f64], omega: &[f64], grid: &TimeGrid) -> Result<Vec<f64>> {
    check_len(chi.len(), grid)?;
    check_len(omega.len(), grid)?;
    let chi_dot = first_derivative(chi, grid.dt());
    chi_dot
        .iter()
        .zip(chi)
        .zip(omega)
        .enumerate()
        .map(|(i, ((&cd, &c), &w))| {
            if w == 0.0 {
                return Err(Error::ZeroField { index: i });
            }
            Ok((cd / (4.0 * w * (4.0 + c * c))).abs())
        })
        .collect()
}

pub fn eta_adiabatic_2level(chi: &[f64]) -> Vec<f64> {
    chi.iter().map(|c| 0.25 * c.abs()).collect()
}

/// max over m != n of |<m|dA/dx|n>| / (e_m - e_n)^2 at every sample.
fn escape_parameter(a: &[ComplexMatrix], x: &[f64], n: usize) -> Result<Vec<f64>> {
    if let Some(m) = a.first() {
        if n >= m.dim() {
            return Err(Error::Precondition(format!("eigenstate index {n} >= dimension {}", m.dim())));
        }
    }
    if a.len() < 3 {
        return Err(Error::Precondition("need at least three samples".into()));
    }
    let da = matrix_derivative(a, x);
    a.par_iter()
        .zip(da.par_iter())
        .enumerate()
        .map(|(i, (ai, dai))| {
            let eig = eig_hermitian(ai)?;
            let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let gap = eig.gap(n);
            if gap < DEGENERACY_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Degenerate { index: i, gap });
            }
            let vn = eig.vector(n);
            let dvn = dai.apply(&vn);
            let mut best = 0.0f64;
            for m in (0..ai.dim()).filter(|&m| m != n) {
                let vm = eig.vector(m);
                let elem: C64 = vm.iter().zip(&dvn).map(|(a, b)| a.conj() * b).sum();
                let de = eig.values[m] - eig.values[n];
                best = best.max(elem.norm() / (de * de));
            }
            Ok(best)
        })
        .collect()
}

/// Lab-frame adiabaticity parameter for eigenstate `n` (ascending order).
pub fn eta_adiabatic_general(h: &[ComplexMatrix], grid: &TimeGrid, n: usize) -> Result<Vec<f64>> {
    check_len(h.len(), grid)?;
    escape_parameter(h, &grid.times(), n)
}

/// Inertiality parameter for eigenstate `n` of M sampled on the rescaled time `tau`.
pub fn eta_inertial_general(m: &[ComplexMatrix], tau: &[f64], n: usize) -> Result<Vec<f64>> {
    if m.len() != tau.len() {
        return Err(Error::Dimension { expected: tau.len(), got: m.len() });
    }
    if tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("rescaled time must be strictly increasing".into()));
    }
    escape_parameter(m, tau, n)
}

/// τ(t) = ∫₀ᵗ Ω dt' by the trapezoidal rule.
pub fn rescaled_time(omega: &[f64], grid: &TimeGrid) -> Vec<f64> {
    grid.cumulative_integral(omega)
}

/// M(χ) = σz - (χ/2)σy
pub fn stirap_m(chi: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
    m[(0, 1)] = C64::new(0.0, 0.5 * chi);
    m[(1, 0)] = C64::new(0.0, -0.5 * chi);
    m
}

/// Ω(cos θ σz + sin θ σx)
pub fn two_level_h(omega: f64, theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    ComplexMatrix::from_real_rows(&[&[omega * c, omega * s], &[omega * s, -omega * c]])
}
