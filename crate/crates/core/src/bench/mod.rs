//! Experiment harness: STIRAP and gate sweeps, the CZ robustness table,
//! the noise ensemble and optimal-control runs, plus their file outputs.

mod config;
mod montecarlo;
mod optimal;
mod robustness;
mod runner;
mod sweeps;

pub use config::{config_hash, ExperimentConfig, NoisePreset, Preset, SweepVariable};
pub use montecarlo::{run_fig2_montecarlo, sample_seed, McMean, McRow, MonteCarloResult};
pub use optimal::{cubic_reference_area, run_fig1c, stirap_krotov_problem, Fig1cRow, Fig1cRun, KROTOV_SUBSTEPS};
pub use robustness::{run_table1, Perturbation, RobustnessRow, ScanPoint, Table1Result};
pub use runner::{run_experiment, Manifest};
pub use sweeps::{
    calibrate_cz_auto, check_stirap_sweep, gate_infidelity, run_gate_benchmark, run_stirap_detuning, run_stirap_sweep,
    stirap_infidelity, Gate, GateRow, StirapChecks, SweepRow, FIG1B_TF, GATE_TF, STIRAP_OMEGA_MAX,
};

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Writes serializable rows as CSV with a header line.
pub fn write_rows<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV text of `rows`, as written by [`write_rows`].
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
