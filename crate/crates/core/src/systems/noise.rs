use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{hz, mhz};
use crate::error::{Error, Result};

/// Standard deviations of the parameter noise applied to a CZ run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Detuning std (rad/s).
    pub sigma_delta: f64,
    /// Rabi-frequency std (rad/s), relative to `omega_ref`.
    pub sigma_omega: f64,
    /// Nominal peak Rabi frequency the amplitude noise refers to (rad/s).
    pub omega_ref: f64,
    /// Position std along the beam/tweezer axis (m).
    pub sigma_dz: f64,
    /// Transverse position std, each of x and y (m).
    pub sigma_dxy: f64,
    /// Thermal velocity std per Cartesian component (m/s).
    pub sigma_velocity: f64,
}

impl NoiseModel {
    pub fn none() -> Self {
        Self {
            sigma_delta: 0.0,
            sigma_omega: 0.0,
            omega_ref: mhz(100.0),
            sigma_dz: 0.0,
            sigma_dxy: 0.0,
            sigma_velocity: 0.0,
        }
    }

    /// σ_Δ = 2π·14 kHz, σ_Ω = 2π·2.5 MHz, σ_dz = 0.2 μm, σ_dx = σ_dy = 0.07 μm.
    pub fn fig2(omega_ref: f64) -> Self {
        Self {
            sigma_delta: hz(14e3),
            sigma_omega: mhz(2.5),
            omega_ref,
            sigma_dz: 0.2e-6,
            sigma_dxy: 0.07e-6,
            sigma_velocity: 0.0,
        }
    }

    /// `fig2` noise with the 10 μK Doppler width σ_Δ = 2π·43 kHz.
    pub fn thermal_10uk(omega_ref: f64) -> Self {
        Self {
            sigma_delta: hz(43e3),
            ..Self::fig2(omega_ref)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [
            self.sigma_delta,
            self.sigma_omega,
            self.sigma_dz,
            self.sigma_dxy,
            self.sigma_velocity,
        ];
        if sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("noise standard deviations must be non-negative: {self:?}")));
        }
        if !(self.omega_ref > 0.0) {
            return Err(Error::Config("noise reference Rabi frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_delta == 0.0
            && self.sigma_omega == 0.0
            && self.sigma_dz == 0.0
            && self.sigma_dxy == 0.0
            && self.sigma_velocity == 0.0
    }
}

/// One realization of the parameter noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub detuning_shift: f64,
    pub omega_scale_1: f64,
    pub omega_scale_2: f64,
    /// (dx, dy, dz) per atom, metres.
    pub dpos: [[f64; 3]; 2],
    /// Velocity per atom, m/s.
    pub velocity: [[f64; 3]; 2],
    pub seed: u64,
}

impl NoiseSample {
    pub fn ideal() -> Self {
        Self {
            detuning_shift: 0.0,
            omega_scale_1: 1.0,
            omega_scale_2: 1.0,
            dpos: [[0.0; 3]; 2],
            velocity: [[0.0; 3]; 2],
            seed: 0,
        }
    }
}

impl Default for NoiseSample {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Transverse amplitude factor of a Gaussian beam, exp(−(dx² + dy²)/w²).
pub fn gaussian_beam_scale(dx: f64, dy: f64, waist: f64) -> f64 {
    (-(dx * dx + dy * dy) / (waist * waist)).exp()
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("validated standard deviation")
}

/// Draws one sample; identical seeds give identical samples.
pub fn sample_noise(model: &NoiseModel, seed: u64) -> Result<NoiseSample> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |sigma: f64| normal(sigma).sample(&mut rng);
    let detuning_shift = draw(model.sigma_delta);
    let rel = model.sigma_omega / model.omega_ref;
    let omega_scale_1 = 1.0 + draw(rel);
    let omega_scale_2 = 1.0 + draw(rel);
    let mut dpos = [[0.0; 3]; 2];
    let mut velocity = [[0.0; 3]; 2];
    for atom in 0..2 {
        dpos[atom] = [draw(model.sigma_dxy), draw(model.sigma_dxy), draw(model.sigma_dz)];
        velocity[atom] = [
            draw(model.sigma_velocity),
            draw(model.sigma_velocity),
            draw(model.sigma_velocity),
        ];
    }
    Ok(NoiseSample {
        detuning_shift,
        omega_scale_1,
        omega_scale_2,
        dpos,
        velocity,
        seed,
    })
}
