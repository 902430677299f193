use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pulses::PulseShape;

/// System and parameter set an experiment runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// STIRAP infidelity vs pulse area.
    Fig1a,
    /// STIRAP infidelity vs detuning at fixed duration.
    Fig1b,
    /// Krotov runs vs the smoothness weight λ₃.
    Fig1c,
    Fig3Phase,
    Fig3Hadamard,
    Fig3Cz,
    Table1,
    /// CZ noise ensemble.
    Fig2,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Fig1a,
        Preset::Fig1b,
        Preset::Fig1c,
        Preset::Fig3Phase,
        Preset::Fig3Hadamard,
        Preset::Fig3Cz,
        Preset::Table1,
        Preset::Fig2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1a => "fig1a",
            Preset::Fig1b => "fig1b",
            Preset::Fig1c => "fig1c",
            Preset::Fig3Phase => "fig3_phase",
            Preset::Fig3Hadamard => "fig3_hadamard",
            Preset::Fig3Cz => "fig3_cz",
            Preset::Table1 => "table1",
            Preset::Fig2 => "fig2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }

    fn allowed_sweeps(&self) -> &'static [SweepVariable] {
        use SweepVariable::*;
        match self {
            Preset::Fig1a => &[Area, Tf],
            Preset::Fig1b => &[Detuning],
            Preset::Fig1c => &[Lambda3],
            Preset::Fig3Phase | Preset::Fig3Hadamard | Preset::Fig3Cz => &[OmegaMax],
            Preset::Table1 => &[Perturbation],
            Preset::Fig2 => &[OmegaMax, NoiseSeed],
        }
    }
}

/// Quantity varied across the rows of one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Peak Rabi frequency, Hz (rad/s when `times_2pi` is false).
    OmegaMax,
    /// Protocol duration, seconds.
    Tf,
    /// Smoothness weight of the Krotov cost.
    Lambda3,
    /// Explicit noise seeds, one realization each.
    NoiseSeed,
    /// Effective pulse area Ω_max·t_f, radians.
    Area,
    /// Single-photon detuning, Hz (rad/s when `times_2pi` is false).
    Detuning,
    /// Fraction of each robustness row's range (−1 … 1).
    Perturbation,
}

impl SweepVariable {
    fn is_frequency(&self) -> bool {
        matches!(self, SweepVariable::OmegaMax | SweepVariable::Detuning)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePreset {
    #[default]
    None,
    /// σ_Δ = 2π·14 kHz, σ_Ω = 2π·2.5 MHz, σ_dz = 0.2 μm, σ_dxy = 0.07 μm.
    Fig2,
    /// As `fig2` with the 10 μK Doppler width σ_Δ = 2π·43 kHz.
    Thermal10uk,
}

fn default_true() -> bool {
    true
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_steps() -> usize {
    4000
}

fn default_samples() -> usize {
    100
}

/// One experiment, as read from a JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub shapes: Vec<PulseShape>,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    /// Frequency-valued sweeps are given in Hz and multiplied by 2π.
    #[serde(default = "default_true")]
    pub times_2pi: bool,
    #[serde(default)]
    pub noise: NoisePreset,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Integration steps per protocol.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Noise realizations per sweep point.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl ExperimentConfig {
    /// Built-in configuration for `preset`; the same files ship under `docs/presets`.
    pub fn preset(preset: Preset) -> Self {
        use PulseShape::*;
        let stirap_shapes = vec![Gaussian, SinSq, Cubic];
        let gate_shapes = vec![Gaussian, SinSq, Quartic];
        let omega_axis = vec![10e6, 20e6, 30e6, 40e6, 50e6, 75e6, 100e6];
        let (shapes, sweep, values, noise, steps) = match preset {
            Preset::Fig1a => (
                stirap_shapes,
                SweepVariable::Area,
                (0..=40).map(|k| 2.5 * k as f64).collect(),
                NoisePreset::None,
                4000,
            ),
            Preset::Fig1b => (
                stirap_shapes,
                SweepVariable::Detuning,
                (-10..=10).map(|k| 1e6 * k as f64).collect(),
                NoisePreset::None,
                4000,
            ),
            Preset::Fig1c => (vec![Cubic], SweepVariable::Lambda3, vec![0.0, 1.6e-7, 1.1e-6], NoisePreset::None, 800),
            Preset::Fig3Phase | Preset::Fig3Hadamard | Preset::Fig3Cz => {
                (gate_shapes, SweepVariable::OmegaMax, omega_axis, NoisePreset::None, 4000)
            }
            Preset::Table1 => (
                vec![Quartic, Gaussian],
                SweepVariable::Perturbation,
                vec![-1.0, -0.5, 0.5, 1.0],
                NoisePreset::None,
                4000,
            ),
            Preset::Fig2 => (gate_shapes, SweepVariable::OmegaMax, vec![50e6, 100e6], NoisePreset::Fig2, 4000),
        };
        Self {
            preset,
            shapes,
            sweep,
            values,
            times_2pi: true,
            noise,
            out: PathBuf::from("out").join(preset.name()),
            steps,
            seed: 0,
            samples: 100,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep values must not be empty".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("sweep value {v} is not finite")));
        }
        if self.shapes.is_empty() {
            return Err(Error::Config("at least one pulse shape is required".into()));
        }
        if !self.preset.allowed_sweeps().contains(&self.sweep) {
            return Err(Error::Config(format!(
                "preset {} cannot sweep {:?}",
                self.preset.name(),
                self.sweep
            )));
        }
        if self.steps < 10 {
            return Err(Error::Config(format!("steps must be at least 10, got {}", self.steps)));
        }
        let nonnegative = matches!(self.sweep, SweepVariable::Area | SweepVariable::Tf | SweepVariable::Lambda3);
        if nonnegative && self.values.iter().any(|v| *v < 0.0) {
            return Err(Error::Config(format!("{:?} values must be non-negative", self.sweep)));
        }
        if self.sweep == SweepVariable::OmegaMax && self.values.iter().any(|v| *v <= 0.0) {
            return Err(Error::Config("omega_max values must be positive".into()));
        }
        if self.sweep == SweepVariable::NoiseSeed && self.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            return Err(Error::Config("noise seeds must be non-negative integers".into()));
        }
        if self.preset == Preset::Fig2 && self.samples == 0 && self.sweep == SweepVariable::OmegaMax {
            return Err(Error::Config("samples must be positive".into()));
        }
        Ok(())
    }

    /// Sweep values in internal units (rad/s for frequencies).
    pub fn internal_values(&self) -> Vec<f64> {
        let scale = if self.sweep.is_frequency() && self.times_2pi {
            2.0 * std::f64::consts::PI
        } else {
            1.0
        };
        self.values.iter().map(|v| v * scale).collect()
    }
}

/// SHA-256 of the canonical JSON encoding of `cfg`, hex encoded.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
