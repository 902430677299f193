//! Two-atom Rydberg CZ gate in the dispersive (non-blockaded) regime.
//!
//! Per-atom levels: 0 = |0⟩ (spectator), 1 = |1⟩, 2 = |p⟩, 3 = |r⟩. Two-atom
//! basis index is `4·a₁ + a₂`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::noise::{gaussian_beam_scale, NoiseSample};
use super::{hz, mhz};
use crate::error::{Error, Result};
use crate::linops::{kron, propagate_state, ComplexMatrix, LindbladGenerator, TimeGrid};
use crate::pulses::{gate_pair, ControlPulse, PulseShape};

pub const ATOM_DIM: usize = 4;
pub const CZ_DIM: usize = 16;
/// |00⟩, |01⟩, |10⟩, |11⟩ in the two-atom basis.
pub const QUBIT_INDICES: [usize; 4] = [0, 1, 4, 5];

const ONE: usize = 1;
const P: usize = 2;
const R: usize = 3;
const RR: usize = 4 * R + R;

/// Physical parameters of the CZ setup. Rates and shifts in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzParams {
    /// Detuning of |p⟩.
    pub delta: f64,
    /// Rydberg shift at the nominal separation.
    pub vr: f64,
    /// Van der Waals coefficient (rad/s·m⁶); zero means a geometry-independent `vr`.
    pub c6: f64,
    /// Nominal interatomic separation along x (m).
    pub separation: f64,
    pub gamma_p: f64,
    pub gamma_r: f64,
    pub gamma_dep: f64,
    /// Beam waist (m).
    pub waist: f64,
    /// Wavevectors of the lower and upper transitions, both along z (rad/m).
    pub k1: f64,
    pub k2: f64,
}

impl CzParams {
    /// Ω_max = Δ = 2π·100 MHz, r = 10 μm, V_R = 1.4·10⁷ rad/s,
    /// γ_p = 2π·6 MHz, γ_r = 2π·1 kHz, γ_d = 2π·10 kHz.
    pub fn table1() -> Self {
        let separation: f64 = 10e-6;
        let vr = 14e6;
        Self {
            delta: mhz(100.0),
            vr,
            c6: vr * separation.powi(6),
            separation,
            gamma_p: mhz(6.0),
            gamma_r: hz(1e3),
            gamma_dep: hz(10e3),
            waist: 1e-6,
            k1: 2.0 * PI / 780.24e-9,
            k2: 2.0 * PI / 479.8e-9,
        }
    }

    /// `table1` rates with Δ = 2π·50 MHz.
    pub fn fig3() -> Self {
        Self {
            delta: mhz(50.0),
            ..Self::table1()
        }
    }

    /// Same setup with a different Rydberg shift at the nominal separation.
    pub fn with_vr(self, vr: f64) -> Self {
        Self {
            vr,
            c6: vr * self.separation.powi(6),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [self.gamma_p, self.gamma_r, self.gamma_dep, self.vr, self.c6];
        if nonneg.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || !self.delta.is_finite() {
            return Err(Error::Config(format!("invalid CZ parameters {self:?}")));
        }
        if !(self.waist > 0.0) {
            return Err(Error::Config("beam waist must be positive".into()));
        }
        if self.c6 > 0.0 {
            if !(self.separation > 0.0) {
                return Err(Error::SingularInteraction);
            }
            let implied = self.c6 / self.separation.powi(6);
            if (implied - self.vr).abs() > 1e-6 * self.vr.max(implied) {
                return Err(Error::Config(format!(
                    "V_R = {:.6e} inconsistent with C6/r^6 = {implied:.6e}",
                    self.vr
                )));
            }
        }
        Ok(())
    }

    fn interaction(&self, sample: &NoiseSample, t: f64) -> Result<f64> {
        if self.c6 == 0.0 {
            return Ok(self.vr);
        }
        let [p1, p2] = sample.dpos;
        let [v1, v2] = sample.velocity;
        let d = [
            self.separation + p2[0] - p1[0] + (v2[0] - v1[0]) * t,
            p2[1] - p1[1] + (v2[1] - v1[1]) * t,
            p2[2] - p1[2] + (v2[2] - v1[2]) * t,
        ];
        let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        if !(r2 > 0.0) {
            return Err(Error::SingularInteraction);
        }
        Ok(self.c6 / (r2 * r2 * r2))
    }
}

fn on_atom(op: &ComplexMatrix, atom: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(ATOM_DIM);
    if atom == 0 {
        kron(op, &id)
    } else {
        kron(&id, op)
    }
}

fn unit(r: usize, c: usize) -> ComplexMatrix {
    ComplexMatrix::unit(ATOM_DIM, r, c)
}

/// CZ envelopes: the two-step gate profile without a phase flip.
pub fn cz_gate_pulses(shape: &PulseShape, omega_max: f64, grid: &TimeGrid) -> Result<(ControlPulse, ControlPulse)> {
    gate_pair(shape, omega_max, grid, false)
}

pub fn cz_target() -> ComplexMatrix {
    let d = [1.0, 1.0, 1.0, -1.0].map(|x| C64::new(x, 0.0));
    ComplexMatrix::from_diag(&d)
}

/// 16-level two-atom generator. Ω₁ drives |1⟩↔|p⟩, Ω₂ drives |p⟩↔|r⟩; each
/// atom sees the pulses scaled by the sample's amplitude factors, its
/// transverse beam profile and the plane-wave phase e^{i k_j z(t)}.
pub fn build_cz(
    p: &CzParams,
    omega1: &ControlPulse,
    omega2: &ControlPulse,
    sample: &NoiseSample,
) -> Result<LindbladGenerator> {
    p.validate()?;
    if omega1.grid() != omega2.grid() {
        return Err(Error::GridMismatch);
    }
    if p.c6 > 0.0 && !(p.separation > 0.0) {
        return Err(Error::SingularInteraction);
    }
    let delta = p.delta + sample.detuning_shift;
    let static_vr = sample.velocity[0] == sample.velocity[1];
    let v0 = p.interaction(sample, 0.0)?;

    let mut drift = ComplexMatrix::zeros(CZ_DIM);
    for atom in 0..2 {
        drift.axpy(C64::new(-delta, 0.0), &on_atom(&unit(P, P), atom));
    }
    if static_vr {
        drift[(RR, RR)] += C64::new(v0, 0.0);
    }
    let mut gen = LindbladGenerator::new(drift)?;
    if !static_vr {
        let params = *p;
        let s = *sample;
        p.interaction(sample, omega1.grid().tf())?;
        gen.set_time_dependent(Arc::new(move |t| {
            let mut m = ComplexMatrix::zeros(CZ_DIM);
            m[(RR, RR)] = C64::new(params.interaction(&s, t).unwrap_or(f64::INFINITY), 0.0);
            m
        }))?;
    }

    for atom in 0..2 {
        let [dx, dy, dz] = sample.dpos[atom];
        let vz = sample.velocity[atom][2];
        let beam = gaussian_beam_scale(dx, dy, p.waist);
        let dress = |pulse: &ControlPulse, scale: f64, k: f64, label: String| {
            let mut out = pulse.map(|t, z| z * scale * beam * C64::from_polar(1.0, k * (dz + vz * t)));
            out.label = label;
            out
        };
        let c1 = gen.add_channel(dress(omega1, sample.omega_scale_1, p.k1, format!("omega1_atom{atom}")))?;
        let c2 = gen.add_channel(dress(omega2, sample.omega_scale_2, p.k2, format!("omega2_atom{atom}")))?;
        gen.add_control(c1, on_atom(&unit(ONE, P), atom), C64::new(0.5, 0.0))?;
        gen.add_control(c2, on_atom(&unit(P, R), atom), C64::new(0.5, 0.0))?;
    }

    let deph = (0.5 * p.gamma_dep).sqrt();
    for atom in 0..2 {
        gen.add_jump(on_atom(&unit(ONE, P), atom).scale_real(p.gamma_p.sqrt()))?;
        gen.add_jump(on_atom(&unit(P, R), atom).scale_real(p.gamma_r.sqrt()))?;
        gen.add_jump(on_atom(&(&unit(P, P) - &unit(ONE, ONE)), atom).scale_real(deph))?;
        gen.add_jump(on_atom(&(&unit(R, R) - &unit(P, P)), atom).scale_real(deph))?;
    }
    Ok(gen)
}

/// Conditional phase arg(a₁₁a₀₀ / a₀₁a₁₀) ∈ (−π, π] after a jump-free run of duration `tf`.
pub fn conditional_phase(p: &CzParams, shape: &PulseShape, omega_max: f64, tf: f64, steps: usize) -> Result<f64> {
    let grid = TimeGrid::span(tf, steps + 1)?;
    let (o1, o2) = cz_gate_pulses(shape, omega_max, &grid)?;
    let gen = build_cz(p, &o1, &o2, &NoiseSample::ideal())?;
    let mut psi = vec![C64::new(0.0, 0.0); CZ_DIM];
    for &k in &QUBIT_INDICES {
        psi[k] = C64::new(0.5, 0.0);
    }
    let out = propagate_state(&gen, &psi, &grid, |_, _| {})?;
    let [a00, a01, a10, a11] = QUBIT_INDICES.map(|k| out[k]);
    Ok((a11 * a00 * (a01 * a10).conj()).arg())
}

fn wrap_near(x: f64, reference: f64) -> f64 {
    x + 2.0 * PI * ((reference - x) / (2.0 * PI)).round()
}

/// Gate duration giving a conditional phase of magnitude π.
///
/// Samples five durations across `bracket`, unwraps the phase between them,
/// and bisects the first interval where |φ| crosses π until |φ| is within
/// 1e−3 rad of π.
pub fn calibrate_cz_duration(
    p: &CzParams,
    shape: &PulseShape,
    omega_max: f64,
    bracket: (f64, f64),
    steps: usize,
) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Config(format!("invalid calibration bracket [{lo}, {hi}]")));
    }
    let phase = |tf: f64| conditional_phase(p, shape, omega_max, tf, steps);
    let ts: Vec<f64> = (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
    let mut phis = Vec::with_capacity(5);
    for &t in &ts {
        let raw = phase(t)?;
        let prev = phis.last().copied().unwrap_or(0.0);
        phis.push(wrap_near(raw, prev));
    }
    let diffs: Vec<f64> = phis.windows(2).map(|w| w[1] - w[0]).collect();
    if !(diffs.iter().all(|d| *d > 0.0) || diffs.iter().all(|d| *d < 0.0)) {
        log::warn!("conditional phase is not monotone across the calibration bracket: {phis:?}");
    }
    let excess = |phi: f64| phi.abs() - PI;
    let Some(k) = (0..4).find(|&k| excess(phis[k]) * excess(phis[k + 1]) <= 0.0 && phis[k] != phis[k + 1]) else {
        return Err(Error::CalibrationBracket { lo, hi });
    };
    let (mut a, mut b) = (ts[k], ts[k + 1]);
    let (mut fa, mut phi_a) = (excess(phis[k]), phis[k]);
    let mut best = (if excess(phis[k]).abs() < excess(phis[k + 1]).abs() { a } else { b }, fa.abs().min(excess(phis[k + 1]).abs()));
    for _ in 0..60 {
        if best.1 < 1e-3 {
            break;
        }
        let m = 0.5 * (a + b);
        let phi_m = wrap_near(phase(m)?, phi_a);
        let fm = excess(phi_m);
        if fm.abs() < best.1 {
            best = (m, fm.abs());
        }
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
            phi_a = phi_m;
        }
    }
    if best.1 >= 1e-3 {
        log::warn!("calibration stopped {:.3e} rad from pi", best.1);
    }
    Ok(best.0)
}
