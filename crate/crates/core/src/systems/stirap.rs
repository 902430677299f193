use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::mhz;
use crate::error::{Error, Result};
use crate::linops::{ComplexMatrix, LindbladGenerator};
use crate::pulses::ControlPulse;

/// Three-level Λ system: detuning of the intermediate level and its decay rates
/// into the two ground levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StirapParams {
    pub delta: f64,
    pub gamma_31: f64,
    pub gamma_32: f64,
}

impl StirapParams {
    /// Δ = 0, both decay rates 2π·3 MHz.
    pub fn fig1() -> Self {
        Self {
            delta: 0.0,
            gamma_31: mhz(3.0),
            gamma_32: mhz(3.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() || !(self.gamma_31 >= 0.0) || !(self.gamma_32 >= 0.0) {
            return Err(Error::Config(format!("invalid STIRAP parameters {self:?}")));
        }
        Ok(())
    }
}

/// H = ½[[0, Ω₁, 0], [Ω₁*, 2Δ, Ω₂], [0, Ω₂*, 0]] with decay from the middle level.
pub fn build_stirap3(p: &StirapParams, omega1: &ControlPulse, omega2: &ControlPulse) -> Result<LindbladGenerator> {
    p.validate()?;
    if omega1.grid() != omega2.grid() {
        return Err(Error::GridMismatch);
    }
    let mut drift = ComplexMatrix::zeros(3);
    drift[(1, 1)] = C64::new(p.delta, 0.0);
    let mut gen = LindbladGenerator::new(drift)?;
    let c1 = gen.add_channel(omega1.clone())?;
    let c2 = gen.add_channel(omega2.clone())?;
    gen.add_control(c1, ComplexMatrix::unit(3, 0, 1), C64::new(0.5, 0.0))?;
    gen.add_control(c2, ComplexMatrix::unit(3, 1, 2), C64::new(0.5, 0.0))?;
    gen.add_jump(ComplexMatrix::unit(3, 0, 1).scale_real(p.gamma_31.sqrt()))?;
    gen.add_jump(ComplexMatrix::unit(3, 2, 1).scale_real(p.gamma_32.sqrt()))?;
    Ok(gen)
}

/// Resonant two-level reduction H = ½[[Ω₁, Ω₂], [Ω₂, −Ω₁]] (real parts of the pulses).
pub fn build_effective2(omega1: &ControlPulse, omega2: &ControlPulse) -> Result<LindbladGenerator> {
    if omega1.grid() != omega2.grid() {
        return Err(Error::GridMismatch);
    }
    let mut gen = LindbladGenerator::new(ComplexMatrix::zeros(2))?;
    let c1 = gen.add_channel(omega1.map(|_, z| C64::new(z.re, 0.0)))?;
    let c2 = gen.add_channel(omega2.map(|_, z| C64::new(z.re, 0.0)))?;
    let sz = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
    gen.add_control(c1, sz, C64::new(0.25, 0.0))?;
    gen.add_control(c2, ComplexMatrix::unit(2, 0, 1), C64::new(0.5, 0.0))?;
    Ok(gen)
}
