use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{config_hash, ExperimentConfig, NoisePreset, Preset, SweepVariable};
use super::montecarlo::{run_fig2_montecarlo, sample_seed};
use super::optimal::run_fig1c;
use super::robustness::run_table1;
use super::sweeps::{
    check_stirap_sweep, run_gate_benchmark, run_stirap_detuning, run_stirap_sweep, Gate, FIG1B_TF, GATE_TF,
    STIRAP_OMEGA_MAX,
};
use super::write_rows;
use crate::error::Result;
use crate::krotov::CostWeights;
use crate::systems::{mhz, CzParams, NoiseModel, StirapParams};

const FIG1C_TF: f64 = 0.13e-6;
const FIG1C_GOAL: f64 = 0.99;
const FIG1C_MAX_ITER: usize = 50_000;

/// Record of one run, written next to its data files as `manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    pub preset: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub preset_values: Value,
    pub seed: u64,
    pub steps: usize,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
    pub checks: Value,
    pub elapsed_seconds: f64,
}

fn noise_model(preset: NoisePreset, omega_ref: f64) -> NoiseModel {
    match preset {
        NoisePreset::None => NoiseModel { omega_ref, ..NoiseModel::none() },
        NoisePreset::Fig2 => NoiseModel::fig2(omega_ref),
        NoisePreset::Thermal10uk => NoiseModel::thermal_10uk(omega_ref),
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Outputs<'_> {
    fn rows<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        write_rows(self.dir.join(name), rows)?;
        self.names.push(name.into());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        fs::write(self.dir.join(name), serde_json::to_string_pretty(value)?)?;
        self.names.push(name.into());
        Ok(())
    }
}

/// Runs the experiment described by `cfg`, writing CSV files and
/// `manifest.json` into `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    let start = Instant::now();
    fs::create_dir_all(&cfg.out)?;
    let mut out = Outputs { dir: &cfg.out, names: Vec::new() };
    let values = cfg.internal_values();
    let mut notes = Vec::new();
    let mut checks = Value::Null;
    let preset_values;

    match cfg.preset {
        Preset::Fig1a => {
            let areas: Vec<f64> = match cfg.sweep {
                SweepVariable::Tf => values.iter().map(|t| t * STIRAP_OMEGA_MAX).collect(),
                _ => values.clone(),
            };
            let rows = run_stirap_sweep(&cfg.shapes, &areas, cfg.steps);
            out.rows("stirap_area.csv", &rows)?;
            checks = serde_json::to_value(check_stirap_sweep(&rows))?;
            preset_values = json!({ "stirap": StirapParams::fig1(), "omega_max": STIRAP_OMEGA_MAX });
        }
        Preset::Fig1b => {
            let rows = run_stirap_detuning(&cfg.shapes, &values, FIG1B_TF, cfg.steps);
            out.rows("stirap_detuning.csv", &rows)?;
            notes.push("default detuning scan is Δ/2π from −10 to +10 MHz".into());
            notes.push("value column is the detuning in rad/s".into());
            preset_values = json!({ "stirap": StirapParams::fig1(), "omega_max": STIRAP_OMEGA_MAX, "tf": FIG1B_TF });
        }
        Preset::Fig1c => {
            let runs = run_fig1c(&values, FIG1C_TF, FIG1C_GOAL, FIG1C_MAX_ITER, cfg.steps)?;
            let rows: Vec<_> = runs.iter().map(|r| r.row.clone()).collect();
            out.rows("fig1c.csv", &rows)?;
            for (i, run) in runs.iter().enumerate() {
                for p in &run.pulses {
                    let name = format!("pulse_{i}_{}.csv", p.label);
                    p.write_csv(cfg.out.join(&name))?;
                    out.names.push(name);
                }
                out.json(&format!("krotov_{i}.json"), &run.report)?;
            }
            let areas: Vec<f64> = rows.iter().map(|r| r.pulse_area).collect();
            checks = json!({
                "all_reached_goal": rows.iter().all(|r| r.final_fidelity >= FIG1C_GOAL),
                "area_non_increasing": areas.windows(2).all(|w| w[1] <= w[0]),
                "areas": areas,
            });
            preset_values = json!({
                "weights": CostWeights::fig1(),
                "tf": FIG1C_TF,
                "omega_max": STIRAP_OMEGA_MAX,
                "fidelity_goal": FIG1C_GOAL,
                "max_iter": FIG1C_MAX_ITER,
            });
        }
        Preset::Fig3Phase | Preset::Fig3Hadamard | Preset::Fig3Cz => {
            let gate = match cfg.preset {
                Preset::Fig3Phase => Gate::Phase,
                Preset::Fig3Hadamard => Gate::Hadamard,
                _ => Gate::Cz,
            };
            let cz = CzParams::fig3();
            let rows = run_gate_benchmark(gate, &cfg.shapes, &values, cfg.steps, &cz);
            out.rows("gates.csv", &rows)?;
            preset_values = match gate {
                Gate::Cz => json!({ "cz": cz, "tf": "calibrated per point" }),
                _ => json!({ "gamma": mhz(6.0), "tf": GATE_TF }),
            };
            if gate != Gate::Cz {
                notes.push("single-qubit gates use t_f = 1 μs".into());
            }
        }
        Preset::Table1 => {
            let p = CzParams::table1();
            let omega = mhz(100.0);
            let mut summary = Vec::new();
            for shape in &cfg.shapes {
                let r = run_table1(&p, shape, omega, &values, cfg.steps)?;
                out.rows(&format!("table1_{}.csv", r.shape), &r.rows)?;
                out.rows(&format!("table1_{}_scan.csv", r.shape), &r.scan)?;
                summary.push(json!({ "shape": r.shape, "tf": r.tf, "nominal_fidelity": r.nominal_fidelity }));
            }
            checks = Value::Array(summary);
            preset_values = json!({ "cz": p, "omega_max": omega });
        }
        Preset::Fig2 => {
            let p = CzParams::fig3();
            let (omegas, seeds): (Vec<f64>, Vec<u64>) = match cfg.sweep {
                SweepVariable::NoiseSeed => (vec![mhz(50.0)], values.iter().map(|v| *v as u64).collect()),
                _ => (values.clone(), (0..cfg.samples).map(|i| sample_seed(cfg.seed, i)).collect()),
            };
            let noise = noise_model(cfg.noise, omegas[0]);
            let r = run_fig2_montecarlo(&p, &noise, &cfg.shapes, &omegas, &seeds, cfg.steps)?;
            out.rows("montecarlo_realizations.csv", &r.rows)?;
            out.rows("montecarlo_mean.csv", &r.means)?;
            let shape_means: Vec<Value> = cfg
                .shapes
                .iter()
                .map(|s| json!({ "shape": s.name(), "mean_infidelity": r.shape_mean(s.name()) }))
                .collect();
            checks = json!({ "shape_means": shape_means });
            preset_values = json!({ "cz": p, "noise": noise });
            notes.push("amplitude noise is σ_Ω relative to each point's Ω_max".into());
        }
    }

    let manifest = Manifest {
        program: "inertial".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        preset: cfg.preset.name().into(),
        config_hash: config_hash(cfg)?,
        config: cfg.clone(),
        preset_values,
        seed: cfg.seed,
        steps: cfg.steps,
        threads: rayon::current_num_threads(),
        outputs: out.names,
        notes,
        checks,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    fs::write(cfg.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::PulseShape;

    #[test]
    fn small_stirap_run_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            shapes: vec![PulseShape::Cubic, PulseShape::Gaussian],
            values: vec![0.0, 20.0, 40.0],
            steps: 400,
            out: dir.path().to_path_buf(),
            ..ExperimentConfig::preset(Preset::Fig1a)
        };
        let m = run_experiment(&cfg).unwrap();
        assert_eq!(m.outputs, vec!["stirap_area.csv".to_string()]);
        let csv = fs::read_to_string(dir.path().join("stirap_area.csv")).unwrap();
        assert_eq!(csv.lines().next().unwrap(), "shape,value,infidelity,error");
        assert_eq!(csv.lines().count(), 7);
        let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let back: Manifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back.config, cfg);
        assert_eq!(back.config_hash, config_hash(&cfg).unwrap());
    }
}
