use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use inertial::bench::{run_experiment, ExperimentConfig, Gate, Manifest, Preset};
use inertial::inertial::InertialReport;
use inertial::linops::TimeGrid;
use inertial::pulses::{stirap_pair, ControlPulse, PulseShape};
use inertial::systems::{
    build_cz, build_hadamard_gate, build_phase_gate, cz_gate_pulses, cz_target, hadamard_pulses, hadamard_target,
    hz, phase_gate_target, CzParams, NoiseSample, QUBIT_INDICES, TRIPOD_QUBIT,
};
use inertial::tomography::{gate_fidelity, ChiPart};

#[derive(Parser)]
#[command(name = "inertial", version, about = "Inertial-frame pulse analysis, optimal control and gate benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment JSON file (defaults to the subcommand's built-in preset).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Integration steps per protocol.
    #[arg(long)]
    steps: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Inertiality and adiabaticity of a pulse pair.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Built-in single-step shape (gaussian, sinsq, cubic).
        #[arg(long, default_value = "cubic")]
        shape: String,
        /// Protocol duration in seconds.
        #[arg(long, default_value_t = 1e-6)]
        tf: f64,
        /// Peak Rabi frequency in Hz (multiplied by 2π).
        #[arg(long, default_value_t = 50e6)]
        omega_max: f64,
        /// Pump pulse CSV (t, re, im); overrides --shape together with --stokes.
        #[arg(long, requires = "stokes")]
        pump: Option<PathBuf>,
        #[arg(long, requires = "pump")]
        stokes: Option<PathBuf>,
    },
    /// STIRAP transfer infidelity vs pulse area, or vs detuning with --detuning.
    Stirap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        detuning: bool,
    },
    /// Gate infidelity vs peak Rabi frequency.
    Gates {
        #[command(flatten)]
        common: Common,
        /// phase, hadamard or cz
        #[arg(long, default_value = "phase")]
        gate: String,
    },
    /// Krotov optimization of the STIRAP transfer for each smoothness weight.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// CZ robustness to ±20 % parameter changes.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// CZ infidelity over noisy parameter realizations.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Realizations per point.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Process tomography of a single gate run.
    Tomography {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "cz")]
        gate: String,
        #[arg(long, default_value = "quartic")]
        shape: String,
        /// Peak Rabi frequency in Hz (multiplied by 2π).
        #[arg(long, default_value_t = 100e6)]
        omega_max: f64,
        /// Duration in seconds.
        #[arg(long, default_value_t = 0.5074e-6)]
        tf: f64,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Analyze { common, .. }
            | Command::Stirap { common, .. }
            | Command::Gates { common, .. }
            | Command::Optimize { common }
            | Command::Table1 { common }
            | Command::Montecarlo { common, .. }
            | Command::Tomography { common, .. } => common,
        }
    }
}

fn load_config(common: &Common, preset: Preset) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::preset(preset),
    };
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(steps) = common.steps {
        cfg.steps = steps;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(common: &Common, preset: Preset, allowed: &[Preset], tweak: impl FnOnce(&mut ExperimentConfig)) -> Result<()> {
    let mut cfg = load_config(common, preset)?;
    if !allowed.contains(&cfg.preset) {
        bail!("config preset `{}` does not belong to this subcommand", cfg.preset.name());
    }
    tweak(&mut cfg);
    cfg.validate()?;
    let manifest = run_experiment(&cfg)?;
    report(&manifest, &cfg.out);
    Ok(())
}

fn report(m: &Manifest, dir: &Path) {
    println!("{} finished in {:.1} s; outputs in {}", m.preset, m.elapsed_seconds, dir.display());
    for f in &m.outputs {
        println!("  {f}");
    }
    if !m.checks.is_null() {
        println!("checks: {}", m.checks);
    }
}

fn out_dir(common: &Common, default: &str) -> Result<PathBuf> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("out").join(default));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn analyze(common: &Common, shape: &str, tf: f64, omega_max: f64, pump: Option<&Path>, stokes: Option<&Path>) -> Result<()> {
    let (p1, p2) = match (pump, stokes) {
        (Some(a), Some(b)) => (ControlPulse::read_csv(a, "omega1")?, ControlPulse::read_csv(b, "omega2")?),
        _ => {
            let grid = TimeGrid::span(tf, common.steps.unwrap_or(4000) + 1)?;
            stirap_pair(&PulseShape::parse(shape)?, hz(omega_max), &grid)?
        }
    };
    let r = InertialReport::from_pulses(&p1, &p2)?;
    let dir = out_dir(common, "analyze")?;
    fs::write(dir.join("inertial_report.json"), r.to_json()?)?;
    println!(
        "max eta_I = {:.4e}, mean eta_I = {:.4e}, max eta_A = {:.4e}; report in {}",
        r.max_eta_i,
        r.mean_eta_i,
        r.max_eta_a,
        dir.display()
    );
    Ok(())
}

fn tomography(common: &Common, gate: &str, shape: &str, omega_max: f64, tf: f64) -> Result<()> {
    let shape = PulseShape::parse(shape)?;
    let grid = TimeGrid::span(tf, common.steps.unwrap_or(4000) + 1)?;
    let omega = hz(omega_max);
    let rep = match Gate::parse(gate)? {
        Gate::Phase => {
            let (o1, o2) = inertial::pulses::gate_pair(&shape, omega, &grid, true)?;
            let gen = build_phase_gate(&o1, &o2, hz(6e6))?;
            gate_fidelity(&gen, &grid, &TRIPOD_QUBIT, &phase_gate_target())?
        }
        Gate::Hadamard => {
            let (o0, o1, o2) = hadamard_pulses(&shape, omega, &grid)?;
            let gen = build_hadamard_gate(&o0, &o1, &o2, hz(6e6))?;
            gate_fidelity(&gen, &grid, &TRIPOD_QUBIT, &hadamard_target())?
        }
        Gate::Cz => {
            let (o1, o2) = cz_gate_pulses(&shape, omega, &grid)?;
            let gen = build_cz(&CzParams::table1(), &o1, &o2, &NoiseSample::ideal())?;
            gate_fidelity(&gen, &grid, &QUBIT_INDICES, &cz_target())?
        }
    };
    let dir = out_dir(common, "tomography")?;
    fs::write(dir.join("chi.json"), rep.process.to_json()?)?;
    rep.process.write_heatmap_csv(fs::File::create(dir.join("chi_re.csv"))?, ChiPart::Re)?;
    rep.process.write_heatmap_csv(fs::File::create(dir.join("chi_im.csv"))?, ChiPart::Im)?;
    let summary = json!({
        "gate": gate,
        "shape": shape.name(),
        "omega_max": omega,
        "tf": tf,
        "steps": grid.len() - 1,
        "fidelity": rep.fidelity,
        "kraus_operators": rep.kraus.operators.len(),
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("average gate fidelity {:.6}; chi matrix in {}", rep.fidelity, dir.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.command.common().threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Analyze { common, shape, tf, omega_max, pump, stokes } => {
            analyze(common, shape, *tf, *omega_max, pump.as_deref(), stokes.as_deref())
        }
        Command::Stirap { common, detuning } => {
            let preset = if *detuning { Preset::Fig1b } else { Preset::Fig1a };
            experiment(common, preset, &[Preset::Fig1a, Preset::Fig1b], |_| {})
        }
        Command::Gates { common, gate } => {
            let preset = match Gate::parse(gate)? {
                Gate::Phase => Preset::Fig3Phase,
                Gate::Hadamard => Preset::Fig3Hadamard,
                Gate::Cz => Preset::Fig3Cz,
            };
            experiment(common, preset, &[Preset::Fig3Phase, Preset::Fig3Hadamard, Preset::Fig3Cz], |_| {})
        }
        Command::Optimize { common } => experiment(common, Preset::Fig1c, &[Preset::Fig1c], |_| {}),
        Command::Table1 { common } => experiment(common, Preset::Table1, &[Preset::Table1], |_| {}),
        Command::Montecarlo { common, samples } => experiment(common, Preset::Fig2, &[Preset::Fig2], |cfg| {
            if let Some(n) = samples {
                cfg.samples = *n;
            }
        }),
        Command::Tomography { common, gate, shape, omega_max, tf } => tomography(common, gate, shape, *omega_max, *tf),
    }
}
