use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{propagate_final, DensityMatrix, TimeGrid};
use crate::pulses::{gate_pair, stirap_pair, PulseShape};
use crate::systems::{
    build_cz, build_hadamard_gate, build_phase_gate, build_stirap3, calibrate_cz_duration, conditional_phase,
    cz_gate_pulses, cz_target, hadamard_pulses, hadamard_target, mhz, phase_gate_target, CzParams, NoiseSample,
    StirapParams, QUBIT_INDICES, TRIPOD_QUBIT,
};
use crate::tomography::gate_fidelity;

/// Peak Rabi frequency of the STIRAP benchmark, 2π·50 MHz.
pub const STIRAP_OMEGA_MAX: f64 = 2.0 * PI * 50e6;
/// Duration of the detuning scan.
pub const FIG1B_TF: f64 = 0.25e-6;
/// Duration of the single-qubit tripod gates.
pub const GATE_TF: f64 = 1e-6;

/// Single-qubit gate decay rate, 2π·6 MHz.
fn gate_gamma() -> f64 {
    mhz(6.0)
}

/// One sweep point; a failed run keeps its row with the error text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub shape: String,
    pub value: f64,
    pub infidelity: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn from_result(shape: &PulseShape, value: f64, r: Result<f64>) -> Self {
        match r {
            Ok(x) => Self { shape: shape.name().into(), value, infidelity: Some(x), error: None },
            Err(e) => {
                log::warn!("{shape} at {value:e}: {e}");
                Self { shape: shape.name().into(), value, infidelity: None, error: Some(e.to_string()) }
            }
        }
    }
}

/// 1 − P₃ after a single STIRAP transfer from |1⟩.
pub fn stirap_infidelity(p: &StirapParams, shape: &PulseShape, omega_max: f64, tf: f64, steps: usize) -> Result<f64> {
    if tf == 0.0 {
        // nothing happens: the population stays in |1⟩
        return Ok(1.0);
    }
    let grid = TimeGrid::span(tf, steps + 1)?;
    let (o1, o2) = stirap_pair(shape, omega_max, &grid)?;
    let gen = build_stirap3(p, &o1, &o2)?;
    let rho = propagate_final(&gen, &DensityMatrix::basis(3, 0), &grid)?;
    Ok(1.0 - rho.population(2))
}

fn grid_points<'a, T: Sync>(shapes: &'a [PulseShape], values: &'a [T]) -> Vec<(&'a PulseShape, &'a T)> {
    shapes.iter().flat_map(|s| values.iter().map(move |v| (s, v))).collect()
}

/// Infidelity vs effective pulse area Ω_max·t_f at Ω_max = 2π·50 MHz, Δ = 0.
pub fn run_stirap_sweep(shapes: &[PulseShape], areas: &[f64], steps: usize) -> Vec<SweepRow> {
    let p = StirapParams::fig1();
    grid_points(shapes, areas)
        .into_par_iter()
        .map(|(shape, &area)| {
            let r = stirap_infidelity(&p, shape, STIRAP_OMEGA_MAX, area / STIRAP_OMEGA_MAX, steps);
            SweepRow::from_result(shape, area, r)
        })
        .collect()
}

/// Infidelity vs single-photon detuning (rad/s) at fixed duration `tf`.
pub fn run_stirap_detuning(shapes: &[PulseShape], deltas: &[f64], tf: f64, steps: usize) -> Vec<SweepRow> {
    grid_points(shapes, deltas)
        .into_par_iter()
        .map(|(shape, &delta)| {
            let p = StirapParams { delta, ..StirapParams::fig1() };
            SweepRow::from_result(shape, delta, stirap_infidelity(&p, shape, STIRAP_OMEGA_MAX, tf, steps))
        })
        .collect()
}

/// Shape ordering and area-doubling trend of an area sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StirapChecks {
    /// Smallest swept area at which the cubic infidelity is ≤ 1e-2.
    pub reference_area: Option<f64>,
    /// Infidelities (gaussian, sinsq, cubic) at the reference area.
    pub reference_infidelities: Option<[f64; 3]>,
    /// cubic < sinsq < gaussian at the reference area.
    pub ordering_holds: bool,
    /// (shape, area) pairs where doubling the area raised the infidelity by more than the band.
    pub trend_violations: Vec<(String, f64)>,
    pub trend_band: f64,
}

/// Allowed rise of the infidelity when the area doubles (oscillation band).
const TREND_BAND: f64 = 1e-2;

pub fn check_stirap_sweep(rows: &[SweepRow]) -> StirapChecks {
    let lookup = |shape: &str, area: f64| {
        rows.iter()
            .find(|r| r.shape == shape && r.value == area)
            .and_then(|r| r.infidelity)
    };
    let mut cubic: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.shape == "cubic")
        .filter_map(|r| r.infidelity.map(|x| (r.value, x)))
        .collect();
    cubic.sort_by(|a, b| a.0.total_cmp(&b.0));
    let reference_area = cubic.iter().find(|(_, x)| *x <= 1e-2).map(|(a, _)| *a);
    let reference_infidelities = reference_area.and_then(|a| {
        Some([lookup("gaussian", a)?, lookup("sinsq", a)?, lookup("cubic", a)?])
    });
    let ordering_holds = reference_infidelities.is_some_and(|[g, s, c]| c < s && s < g);

    let mut trend_violations = Vec::new();
    for r in rows {
        let (Some(x), a) = (r.infidelity, r.value) else { continue };
        if a > 0.0 {
            if let Some(x2) = lookup(&r.shape, 2.0 * a) {
                if x2 > x + TREND_BAND {
                    trend_violations.push((r.shape.clone(), a));
                }
            }
        }
    }
    StirapChecks {
        reference_area,
        reference_infidelities,
        ordering_holds,
        trend_violations,
        trend_band: TREND_BAND,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Phase,
    Hadamard,
    Cz,
}

impl Gate {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "phase" => Ok(Gate::Phase),
            "hadamard" => Ok(Gate::Hadamard),
            "cz" => Ok(Gate::Cz),
            other => Err(Error::Config(format!("unknown gate `{other}`"))),
        }
    }
}

/// Scan step for locating the first π crossing of the conditional phase.
const CALIBRATION_SCAN: f64 = 0.05e-6;
const CALIBRATION_MAX_TF: f64 = 5e-6;

/// Calibrates the CZ duration to the first t_f where the conditional phase reaches π.
///
/// Scans t_f on a coarse grid, unwrapping the phase, then bisects inside the
/// first interval that crosses π.
pub fn calibrate_cz_auto(p: &CzParams, shape: &PulseShape, omega_max: f64, steps: usize) -> Result<f64> {
    let mut prev_t = CALIBRATION_SCAN;
    let mut prev_phi = conditional_phase(p, shape, omega_max, prev_t, steps)?;
    let mut t = prev_t;
    while t < CALIBRATION_MAX_TF {
        t += CALIBRATION_SCAN;
        let raw = conditional_phase(p, shape, omega_max, t, steps)?;
        let phi = raw + 2.0 * PI * ((prev_phi - raw) / (2.0 * PI)).round();
        if (prev_phi.abs() - PI) * (phi.abs() - PI) <= 0.0 {
            return calibrate_cz_duration(p, shape, omega_max, (prev_t, t), steps);
        }
        prev_t = t;
        prev_phi = phi;
    }
    Err(Error::CalibrationBracket { lo: CALIBRATION_SCAN, hi: CALIBRATION_MAX_TF })
}

/// Runs the full tomography pipeline for one gate; returns (t_f, 1 − F).
///
/// Single-qubit gates use γ = 2π·6 MHz and t_f = 1 μs; the CZ gate uses
/// `cz` with a duration calibrated at the given Ω_max.
pub fn gate_infidelity(gate: Gate, shape: &PulseShape, omega_max: f64, steps: usize, cz: &CzParams) -> Result<(f64, f64)> {
    match gate {
        Gate::Phase => {
            let grid = TimeGrid::span(GATE_TF, steps + 1)?;
            let (o1, o2) = gate_pair(shape, omega_max, &grid, true)?;
            let gen = build_phase_gate(&o1, &o2, gate_gamma())?;
            let rep = gate_fidelity(&gen, &grid, &TRIPOD_QUBIT, &phase_gate_target())?;
            Ok((GATE_TF, 1.0 - rep.fidelity))
        }
        Gate::Hadamard => {
            let grid = TimeGrid::span(GATE_TF, steps + 1)?;
            let (o0, o1, o2) = hadamard_pulses(shape, omega_max, &grid)?;
            let gen = build_hadamard_gate(&o0, &o1, &o2, gate_gamma())?;
            let rep = gate_fidelity(&gen, &grid, &TRIPOD_QUBIT, &hadamard_target())?;
            Ok((GATE_TF, 1.0 - rep.fidelity))
        }
        Gate::Cz => {
            let tf = calibrate_cz_auto(cz, shape, omega_max, steps)?;
            let f = cz_fidelity(cz, shape, omega_max, tf, steps, &NoiseSample::ideal())?;
            Ok((tf, 1.0 - f))
        }
    }
}

/// Average CZ gate fidelity at a fixed duration.
pub(crate) fn cz_fidelity(
    p: &CzParams,
    shape: &PulseShape,
    omega_max: f64,
    tf: f64,
    steps: usize,
    sample: &NoiseSample,
) -> Result<f64> {
    let grid = TimeGrid::span(tf, steps + 1)?;
    let (o1, o2) = cz_gate_pulses(shape, omega_max, &grid)?;
    let gen = build_cz(p, &o1, &o2, sample)?;
    Ok(gate_fidelity(&gen, &grid, &QUBIT_INDICES, &cz_target())?.fidelity)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRow {
    pub shape: String,
    /// rad/s
    pub omega_max: f64,
    pub tf: Option<f64>,
    pub infidelity: Option<f64>,
    pub error: Option<String>,
}

/// Gate infidelity vs Ω_max. The CZ rows use the two-qubit parameters in `cz`.
pub fn run_gate_benchmark(gate: Gate, shapes: &[PulseShape], omegas: &[f64], steps: usize, cz: &CzParams) -> Vec<GateRow> {
    grid_points(shapes, omegas)
        .into_par_iter()
        .map(|(shape, &omega_max)| match gate_infidelity(gate, shape, omega_max, steps, cz) {
            Ok((tf, x)) => GateRow {
                shape: shape.name().into(),
                omega_max,
                tf: Some(tf),
                infidelity: Some(x),
                error: None,
            },
            Err(e) => {
                log::warn!("{gate:?} gate, {shape} at Ω = {omega_max:e}: {e}");
                GateRow { shape: shape.name().into(), omega_max, tf: None, infidelity: None, error: Some(e.to_string()) }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_area_means_no_transfer() {
        let rows = run_stirap_sweep(&[PulseShape::Cubic], &[0.0], 100);
        assert_eq!(rows[0].infidelity, Some(1.0));
    }

    #[test]
    fn quartic_stirap_row_reports_error() {
        let rows = run_stirap_sweep(&[PulseShape::Quartic], &[10.0], 100);
        assert!(rows[0].infidelity.is_none());
        assert!(rows[0].error.as_deref().unwrap().contains("quartic"));
    }

    #[test]
    fn sweep_rows_follow_input_order() {
        let a = run_stirap_sweep(&[PulseShape::Cubic], &[20.0, 5.0, 10.0], 400);
        let b = run_stirap_sweep(&[PulseShape::Cubic], &[5.0, 10.0, 20.0], 400);
        assert_eq!(a[0], b[2]);
        assert_eq!(a[1], b[0]);
        assert_eq!(a[2], b[1]);
    }

    #[test]
    fn ordering_check_on_synthetic_rows() {
        let row = |s: &str, a: f64, x: f64| SweepRow { shape: s.into(), value: a, infidelity: Some(x), error: None };
        let rows = vec![
            row("cubic", 10.0, 0.05),
            row("cubic", 20.0, 0.008),
            row("sinsq", 20.0, 0.02),
            row("gaussian", 20.0, 0.1),
            row("cubic", 40.0, 0.004),
        ];
        let c = check_stirap_sweep(&rows);
        assert_eq!(c.reference_area, Some(20.0));
        assert!(c.ordering_holds);
        assert!(c.trend_violations.is_empty());
        let mut bad = rows.clone();
        bad[4].infidelity = Some(0.5);
        bad[3].infidelity = Some(0.01);
        let c = check_stirap_sweep(&bad);
        assert!(!c.ordering_holds);
        assert_eq!(c.trend_violations, vec![("cubic".to_string(), 20.0)]);
    }

    #[test]
    fn ideal_phase_gate_limit() {
        // γ = 0 and a long, strong protocol approaches the ideal gate
        let grid = TimeGrid::span(2e-6, 8001).unwrap();
        let (o1, o2) = gate_pair(&PulseShape::Quartic, mhz(100.0), &grid, true).unwrap();
        let gen = build_phase_gate(&o1, &o2, 0.0).unwrap();
        let rep = gate_fidelity(&gen, &grid, &TRIPOD_QUBIT, &phase_gate_target()).unwrap();
        assert!(1.0 - rep.fidelity < 1e-3, "{}", 1.0 - rep.fidelity);
    }

    #[test]
    fn auto_calibration_needs_interaction() {
        let p = CzParams::table1().with_vr(0.0);
        let r = calibrate_cz_auto(&p, &PulseShape::Quartic, mhz(100.0), 4000);
        assert!(matches!(r, Err(Error::CalibrationBracket { .. })));
    }
}
