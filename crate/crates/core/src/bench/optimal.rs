use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweeps::{stirap_infidelity, STIRAP_OMEGA_MAX};
use crate::error::{Error, Result};
use crate::krotov::{optimize, CostWeights, KrotovReport, Problem, StopCriteria, StopReason};
use crate::linops::{DensityMatrix, TimeGrid};
use crate::pulses::{stirap_pair, ControlPulse, PulseShape};
use crate::systems::{build_stirap3, StirapParams};

/// Propagation steps per control interval. The control grid stays coarse so
/// that the smoothness system remains well conditioned.
pub const KROTOV_SUBSTEPS: usize = 8;

/// STIRAP transfer |1⟩ → |3⟩ with a cubic guess on `steps / KROTOV_SUBSTEPS` control intervals.
pub fn stirap_krotov_problem(tf: f64, omega_max: f64, steps: usize, weights: CostWeights) -> Result<(Problem, Vec<ControlPulse>)> {
    if steps % KROTOV_SUBSTEPS != 0 || steps < 4 * KROTOV_SUBSTEPS {
        return Err(Error::Config(format!(
            "Krotov runs need a multiple of {KROTOV_SUBSTEPS} steps (at least {}), got {steps}",
            4 * KROTOV_SUBSTEPS
        )));
    }
    let grid = TimeGrid::span(tf, steps / KROTOV_SUBSTEPS + 1)?;
    let (p1, p2) = stirap_pair(&PulseShape::Cubic, omega_max, &grid)?;
    let gen = build_stirap3(&StirapParams::fig1(), &p1, &p2)?;
    let problem = Problem::new(gen, DensityMatrix::basis(3, 0), DensityMatrix::basis(3, 2), weights)?
        .with_substeps(KROTOV_SUBSTEPS)?;
    Ok((problem, vec![p1, p2]))
}

/// Area Ω_max·t_f at which the cubic protocol first reaches `fidelity`
/// (bisection on t_f between 10 ns and 1 μs).
pub fn cubic_reference_area(fidelity: f64, steps: usize) -> Result<f64> {
    let p = StirapParams::fig1();
    let miss = |tf: f64| -> Result<f64> {
        Ok(1.0 - stirap_infidelity(&p, &PulseShape::Cubic, STIRAP_OMEGA_MAX, tf, steps)? - fidelity)
    };
    let (mut lo, mut hi) = (10e-9, 1e-6);
    if miss(lo)? >= 0.0 || miss(hi)? < 0.0 {
        return Err(Error::Config(format!("cubic fidelity {fidelity} is not bracketed by [{lo:e}, {hi:e}] s")));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if miss(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(STIRAP_OMEGA_MAX * hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1cRow {
    pub lambda3: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub final_fidelity: f64,
    pub pulse_area: f64,
    /// Area relative to the cubic protocol at the same fidelity goal.
    pub relative_area: f64,
    pub mean_eta_i: Option<f64>,
    pub max_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Fig1cRun {
    pub row: Fig1cRow,
    pub pulses: Vec<ControlPulse>,
    pub report: KrotovReport,
}

/// Krotov runs from the cubic guess, one per λ₃, each stopped at `goal`.
///
/// Weights are λ₁ = 0.1, λ₂ = 0 in microsecond units.
pub fn run_fig1c(lambda3s: &[f64], tf: f64, goal: f64, max_iter: usize, steps: usize) -> Result<Vec<Fig1cRun>> {
    let reference = cubic_reference_area(goal, steps)?;
    lambda3s
        .par_iter()
        .map(|&l3| {
            let (problem, guess) = stirap_krotov_problem(tf, STIRAP_OMEGA_MAX, steps, CostWeights::fig1().with_lambda3(l3))?;
            let stop = StopCriteria { max_iter, dj_tol: 0.0, fidelity_goal: Some(goal) };
            let (pulses, report) = optimize(&problem, guess, &stop)?;
            if report.stop_reason != StopReason::FidelityGoal {
                log::warn!("λ₃ = {l3:e}: goal {goal} not reached (F = {:.6})", report.final_fidelity);
            }
            let row = Fig1cRow {
                lambda3: l3,
                iterations: report.iterations,
                stop_reason: report.stop_reason,
                final_fidelity: report.final_fidelity,
                pulse_area: report.pulse_area,
                relative_area: report.pulse_area / reference,
                mean_eta_i: report.mean_eta_i,
                max_residual: report.max_residual,
            };
            Ok(Fig1cRun { row, pulses, report })
        })
        .collect()
}
