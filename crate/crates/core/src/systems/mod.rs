//! Concrete Lindblad generators for the level schemes used in the benchmarks.

mod cz;
mod gates;
mod noise;
mod stirap;

pub use cz::{
    build_cz, calibrate_cz_duration, conditional_phase, cz_gate_pulses, cz_target, CzParams, ATOM_DIM, CZ_DIM,
    QUBIT_INDICES,
};
pub use gates::{
    build_hadamard_gate, build_phase_gate, hadamard_pulses, hadamard_target, phase_gate_target, HADAMARD_RATIO,
    TRIPOD_DIM, TRIPOD_QUBIT,
};
pub use noise::{gaussian_beam_scale, sample_noise, NoiseModel, NoiseSample};
pub use stirap::{build_effective2, build_stirap3, StirapParams};

use std::f64::consts::PI;

/// Converts a frequency in Hz to rad/s.
pub fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Converts MHz to rad/s.
pub fn mhz(f: f64) -> f64 {
    hz(f * 1e6)
}
