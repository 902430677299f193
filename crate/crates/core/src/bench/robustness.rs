use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweeps::{calibrate_cz_auto, cz_fidelity};
use crate::error::Result;
use crate::pulses::PulseShape;
use crate::systems::{CzParams, NoiseSample};

/// Model parameter varied in one robustness row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    Detuning,
    Intensity,
    GammaP,
    GammaR,
    Dephasing,
    /// Interatomic separation at fixed C₆.
    Position,
}

impl Perturbation {
    pub const ALL: [Perturbation; 6] = [
        Perturbation::Detuning,
        Perturbation::Intensity,
        Perturbation::GammaP,
        Perturbation::GammaR,
        Perturbation::Dephasing,
        Perturbation::Position,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::Detuning => "detuning",
            Perturbation::Intensity => "intensity",
            Perturbation::GammaP => "gamma_p",
            Perturbation::GammaR => "gamma_r",
            Perturbation::Dephasing => "dephasing",
            Perturbation::Position => "position",
        }
    }

    /// Largest relative change scanned.
    pub fn range(&self) -> f64 {
        match self {
            Perturbation::Position => 0.02,
            _ => 0.2,
        }
    }

    /// Parameters and peak Rabi frequency with this parameter scaled by `1 + frac`.
    pub fn apply(&self, p: &CzParams, omega_max: f64, frac: f64) -> (CzParams, f64) {
        let s = 1.0 + frac;
        let mut q = *p;
        let mut omega = omega_max;
        match self {
            Perturbation::Detuning => q.delta *= s,
            Perturbation::Intensity => omega *= s,
            Perturbation::GammaP => q.gamma_p *= s,
            Perturbation::GammaR => q.gamma_r *= s,
            Perturbation::Dephasing => q.gamma_dep *= s,
            Perturbation::Position => {
                if frac != 0.0 {
                    q.separation *= s;
                    q.vr = q.c6 / q.separation.powi(6);
                }
            }
        }
        (q, omega)
    }
}

/// Fidelity change over a parameter range, in percentage points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub parameter: String,
    /// Signed percentages.
    pub delta_minus: f64,
    pub delta_plus: f64,
    pub f_min_change: f64,
    pub f_max_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub parameter: String,
    /// Relative parameter change.
    pub fraction: f64,
    pub fidelity: Option<f64>,
    /// 100·(F − F_nominal)
    pub change_pp: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Result {
    pub shape: String,
    /// Duration calibrated at the nominal parameters, kept for every perturbed run.
    pub tf: f64,
    pub nominal_fidelity: f64,
    pub rows: Vec<RobustnessRow>,
    pub scan: Vec<ScanPoint>,
}

/// Reruns the CZ pipeline with each parameter scaled by `1 + x·range` for
/// every `x` in `points` and reports the extreme fidelity changes.
pub fn run_table1(p: &CzParams, shape: &PulseShape, omega_max: f64, points: &[f64], steps: usize) -> Result<Table1Result> {
    let tf = calibrate_cz_auto(p, shape, omega_max, steps)?;
    let nominal = cz_fidelity(p, shape, omega_max, tf, steps, &NoiseSample::ideal())?;
    let jobs: Vec<(Perturbation, f64)> = Perturbation::ALL
        .iter()
        .flat_map(|&k| points.iter().map(move |&x| (k, x * k.range())))
        .collect();
    let scan: Vec<ScanPoint> = jobs
        .into_par_iter()
        .map(|(k, frac)| {
            let (q, omega) = k.apply(p, omega_max, frac);
            let r = cz_fidelity(&q, shape, omega, tf, steps, &NoiseSample::ideal());
            let (fidelity, error) = match r {
                Ok(f) => (Some(f), None),
                Err(e) => {
                    log::warn!("{} {frac:+}: {e}", k.name());
                    (None, Some(e.to_string()))
                }
            };
            ScanPoint {
                parameter: k.name().into(),
                fraction: frac,
                fidelity,
                change_pp: fidelity.map(|f| 100.0 * (f - nominal)),
                error,
            }
        })
        .collect();
    let rows = Perturbation::ALL
        .iter()
        .map(|k| {
            let changes: Vec<f64> = scan
                .iter()
                .filter(|s| s.parameter == k.name())
                .filter_map(|s| s.change_pp)
                .collect();
            let fold = |init: f64, f: fn(f64, f64) -> f64| changes.iter().copied().fold(init, f);
            RobustnessRow {
                parameter: k.name().into(),
                delta_minus: -100.0 * k.range(),
                delta_plus: 100.0 * k.range(),
                f_min_change: if changes.is_empty() { f64::NAN } else { fold(f64::INFINITY, f64::min) },
                f_max_change: if changes.is_empty() { f64::NAN } else { fold(f64::NEG_INFINITY, f64::max) },
            }
        })
        .collect();
    Ok(Table1Result {
        shape: shape.name().into(),
        tf,
        nominal_fidelity: nominal,
        rows,
        scan,
    })
}
