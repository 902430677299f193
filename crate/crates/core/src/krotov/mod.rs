//! Krotov optimization with power, velocity and acceleration penalties on the
//! field updates.
//!
//! Weights are dimensionless once time is measured in `time_unit` seconds and
//! fields in rad per `time_unit`; with the default unit of 1 µs, λ₁ = 0.1 and
//! λ₃ ~ 1e-7 are the natural scale for STIRAP pulses of a few hundred ns.

mod banded;

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use banded::{BandedLu, BandedSystem, PIVOT_TOL, RESIDUAL_TOL};

use crate::error::{Error, Result};
use crate::inertial::InertialReport;
use crate::linops::{
    propagate_adjoint, propagate_final, propagate_with, state_fidelity, ComplexMatrix, DensityMatrix,
    LindbladGenerator, TimeGrid, I,
};
use crate::pulses::{first_derivative, pulse_derivatives, ControlPulse};

/// Maximum number of step halvings before an iteration is declared stagnant.
pub const MAX_HALVINGS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Seconds per time unit in which the weights are expressed.
    pub time_unit: f64,
}

impl CostWeights {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        let w = Self { lambda1, lambda2, lambda3, time_unit: 1e-6 };
        w.validate()?;
        Ok(w)
    }

    /// λ₁ = 0.1, λ₂ = 0, λ₃ = 1e-7.
    pub fn fig1() -> Self {
        Self { lambda1: 0.1, lambda2: 0.0, lambda3: 1e-7, time_unit: 1e-6 }
    }

    pub fn with_lambda3(mut self, lambda3: f64) -> Self {
        self.lambda3 = lambda3;
        self
    }

    pub fn with_time_unit(mut self, time_unit: f64) -> Self {
        self.time_unit = time_unit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 > 0.0) || !self.lambda1.is_finite() {
            return Err(Error::Config(format!("lambda1 must be positive, got {}", self.lambda1)));
        }
        if !(self.lambda2 >= 0.0 && self.lambda3 >= 0.0) {
            return Err(Error::Config("lambda2 and lambda3 must be nonnegative".into()));
        }
        if !(self.time_unit > 0.0) {
            return Err(Error::Config(format!("time unit must be positive, got {}", self.time_unit)));
        }
        Ok(())
    }

    /// λ₁∫|ε|² + λ₂∫|ε̇|² + λ₃∫|ε̈|² for SI samples, evaluated in the weight units.
    fn penalty(&self, grid: &TimeGrid, eps: &[C64], d1: &[C64], d2: &[C64]) -> f64 {
        let u = self.time_unit;
        let sq = |v: &[C64]| grid.integrate(&v.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
        let mut p = self.lambda1 * u * sq(eps);
        if self.lambda2 > 0.0 {
            p += self.lambda2 * u.powi(3) * sq(d1);
        }
        if self.lambda3 > 0.0 {
            p += self.lambda3 * u.powi(5) * sq(d2);
        }
        p
    }
}

fn pulse_penalty(w: &CostWeights, p: &ControlPulse) -> Result<f64> {
    let (d1, d2) = pulse_derivatives(p)?;
    Ok(w.penalty(p.grid(), p.samples(), &d1, &d2))
}

/// −Tr(ρ_t ρ_f) plus the power, velocity and acceleration penalties of every pulse.
pub fn functional_j(
    rho_f: &DensityMatrix,
    pulses: &[ControlPulse],
    target: &DensityMatrix,
    w: &CostWeights,
) -> Result<f64> {
    let mut j = -state_fidelity(rho_f, target)?;
    for p in pulses {
        j += pulse_penalty(w, p)?;
    }
    Ok(j)
}

/// ξ(t) with ξ̇ = −𝓛†ξ and ξ(t_f) = ρ_t, at every grid point.
pub fn backward_costate(gen: &LindbladGenerator, target: &DensityMatrix, grid: &TimeGrid) -> Result<Vec<ComplexMatrix>> {
    propagate_adjoint(gen, target.matrix(), grid)
}

/// −λ₁I + λ₂D₂ − λ₃D₄ on the grid (in weight units) with Δε pinned to zero at
/// both ends. Points outside the window are taken as zero, so the update also
/// leaves the end slopes untouched.
pub fn assemble_banded(w: &CostWeights, grid: &TimeGrid) -> Result<BandedSystem> {
    w.validate()?;
    let n = grid.len();
    let h = grid.dt() / w.time_unit;
    let c2 = w.lambda2 / (h * h);
    let c4 = w.lambda3 / h.powi(4);
    let mut s = BandedSystem::zeros(n);
    s.diag[0] = 1.0;
    s.diag[n - 1] = 1.0;
    let interior = |j: usize| j >= 1 && j + 1 < n;
    for i in 1..n - 1 {
        s.diag[i] = -w.lambda1 - 2.0 * c2 - 6.0 * c4;
        if interior(i + 1) {
            s.off1[i] = c2 + 4.0 * c4;
        }
        if interior(i + 2) {
            s.off2[i] = -c4;
        }
    }
    Ok(s)
}

/// Options that are not part of the cost functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrotovOptions {
    /// Corrector sweeps after the predictor; 1 is the standard scheme.
    pub sweeps: usize,
}

impl Default for KrotovOptions {
    fn default() -> Self {
        Self { sweeps: 1 }
    }
}

/// Optimization problem: a generator template whose channels are replaced by
/// the current pulses, an initial state and a pure target.
#[derive(Clone)]
pub struct Problem {
    pub template: LindbladGenerator,
    pub rho0: DensityMatrix,
    pub target: DensityMatrix,
    pub weights: CostWeights,
    pub options: KrotovOptions,
    /// RK4 steps per control interval; pulses are interpolated in between.
    pub substeps: usize,
}

impl Problem {
    pub fn new(template: LindbladGenerator, rho0: DensityMatrix, target: DensityMatrix, weights: CostWeights) -> Result<Self> {
        weights.validate()?;
        if template.channels().is_empty() {
            return Err(Error::Config("generator has no control channels".into()));
        }
        rho0.matrix().check_dim(template.dim())?;
        target.matrix().check_dim(template.dim())?;
        let purity = target.purity();
        if (purity - 1.0).abs() > 1e-8 {
            return Err(Error::NotPure { purity });
        }
        Ok(Self { template, rho0, target, weights, options: KrotovOptions::default(), substeps: 1 })
    }

    pub fn with_substeps(mut self, substeps: usize) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::Config("substeps must be at least 1".into()));
        }
        self.substeps = substeps;
        Ok(self)
    }

    /// Control grid (where pulses are sampled and updated).
    pub fn grid(&self) -> TimeGrid {
        *self.template.channels()[0].grid()
    }

    /// Propagation grid.
    pub fn fine_grid(&self) -> Result<TimeGrid> {
        let g = self.grid();
        g.resampled((g.len() - 1) * self.substeps + 1)
    }

    /// ρ(t) on the control grid.
    pub fn forward(&self, gen: &LindbladGenerator) -> Result<Vec<DensityMatrix>> {
        let s = self.substeps;
        let mut out = Vec::with_capacity(self.grid().len());
        propagate_with(gen, &self.rho0, &self.fine_grid()?, |i, m| {
            if i % s == 0 {
                out.push(DensityMatrix::from_trusted(m.clone()));
            }
        })?;
        Ok(out)
    }

    pub fn final_state(&self, gen: &LindbladGenerator) -> Result<DensityMatrix> {
        propagate_final(gen, &self.rho0, &self.fine_grid()?)
    }

    /// ξ(t) on the control grid.
    pub fn costate(&self, gen: &LindbladGenerator) -> Result<Vec<ComplexMatrix>> {
        let all = backward_costate(gen, &self.target, &self.fine_grid()?)?;
        Ok(all.into_iter().step_by(self.substeps).collect())
    }

    pub fn generator(&self, pulses: &[ControlPulse]) -> Result<LindbladGenerator> {
        self.template.with_channels(pulses.to_vec())
    }
}

#[derive(Clone, Debug)]
pub struct KrotovState {
    pub iteration: usize,
    pub pulses: Vec<ControlPulse>,
    pub forward: Vec<DensityMatrix>,
    pub costate: Vec<ComplexMatrix>,
    /// −𝓕 plus the penalty of the update that produced each iterate.
    pub j_history: Vec<f64>,
    pub fidelity_history: Vec<f64>,
    /// Largest relative banded-solve residual seen so far.
    pub max_residual: f64,
    /// Step scale accepted at each iteration (1, ½, ¼, ...).
    pub step_scales: Vec<f64>,
}

impl KrotovState {
    pub fn new(problem: &Problem, pulses: Vec<ControlPulse>) -> Result<Self> {
        let gen = problem.generator(&pulses)?;
        let forward = problem.forward(&gen)?;
        let fid = state_fidelity(forward.last().expect("grid has points"), &problem.target)?;
        Ok(Self {
            iteration: 0,
            pulses,
            forward,
            costate: Vec::new(),
            j_history: vec![-fid],
            fidelity_history: vec![fid],
            max_residual: 0.0,
            step_scales: Vec::new(),
        })
    }

    pub fn fidelity(&self) -> f64 {
        *self.fidelity_history.last().expect("history starts non-empty")
    }

    pub fn j(&self) -> f64 {
        *self.j_history.last().expect("history starts non-empty")
    }
}

/// Update per channel as (Δε_R, Δε_I) in SI units.
type Update = Vec<(Vec<f64>, Vec<f64>)>;

/// Solves the banded update equations with right-hand sides −½Tr[ξ ∂𝓛/∂ε ρ].
fn field_update(
    gen: &LindbladGenerator,
    xi: &[ComplexMatrix],
    rho: &[DensityMatrix],
    lu: &BandedLu,
    time_unit: f64,
) -> Result<(Update, f64)> {
    let n = xi.len();
    let mut out = Vec::with_capacity(gen.channels().len());
    let mut worst = 0.0f64;
    for c in 0..gen.channels().len() {
        let (d_re, d_im) = gen.control_gradient(c);
        let mut solve = |d: &ComplexMatrix| -> Result<Vec<f64>> {
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                let r = rho[i].matrix();
                // ∂𝓛/∂ε ρ = −i[D, ρ]
                let mut comm = d.matmul(r);
                comm.axpy(C64::new(-1.0, 0.0), &r.matmul(d));
                let g = (xi[i].matmul(&comm).trace() * (-I)).re;
                rhs[i] = -0.5 * g;
            }
            let (x, res) = lu.solve(&rhs)?;
            worst = worst.max(res);
            Ok(x.into_iter().map(|v| v / time_unit).collect())
        };
        let re = solve(&d_re)?;
        let im = solve(&d_im)?;
        out.push((re, im));
    }
    Ok((out, worst))
}

fn apply_update(pulses: &[ControlPulse], upd: &Update, scale: f64) -> Vec<ControlPulse> {
    pulses
        .iter()
        .zip(upd)
        .map(|(p, (re, im))| {
            let mut q = p.clone();
            for (i, z) in q.samples_mut().iter_mut().enumerate() {
                *z += C64::new(scale * re[i], scale * im[i]);
            }
            q
        })
        .collect()
}

fn update_penalty(w: &CostWeights, grid: &TimeGrid, upd: &Update, scale: f64) -> f64 {
    let dt = grid.dt();
    upd.iter()
        .map(|(re, im)| {
            let z: Vec<C64> = re.iter().zip(im).map(|(&a, &b)| C64::new(scale * a, scale * b)).collect();
            let d1 = first_derivative(&z, dt);
            let d2 = crate::pulses::second_derivative(&z, dt);
            w.penalty(grid, &z, &d1, &d2)
        })
        .sum()
}

/// One Krotov iteration: backward costate, predictor-corrector field update,
/// then halving until the functional does not increase.
pub fn krotov_step(problem: &Problem, state: &KrotovState) -> Result<KrotovState> {
    let grid = problem.grid();
    let w = &problem.weights;
    let gen = problem.generator(&state.pulses)?;
    let xi = problem.costate(&gen)?;
    let lu = assemble_banded(w, &grid)?.factor()?;

    let (predictor, mut worst) = field_update(&gen, &xi, &state.forward, &lu, w.time_unit)?;
    let mut corrected = predictor.clone();
    for _ in 0..problem.options.sweeps {
        let trial = apply_update(&state.pulses, &corrected, 1.0);
        let traj = problem.forward(&problem.generator(&trial)?)?;
        let (u, r) = field_update(&gen, &xi, &traj, &lu, w.time_unit)?;
        corrected = u;
        worst = worst.max(r);
    }

    let j_prev = state.j();
    let try_step = |upd: &Update, scale: f64| -> Result<(Vec<ControlPulse>, LindbladGenerator, f64, f64)> {
        let pulses = apply_update(&state.pulses, upd, scale);
        let trial_gen = problem.generator(&pulses)?;
        let fid = state_fidelity(&problem.final_state(&trial_gen)?, &problem.target)?;
        let j = -fid + update_penalty(w, &grid, upd, scale);
        Ok((pulses, trial_gen, fid, j))
    };
    let accept = |pulses: Vec<ControlPulse>, trial_gen: &LindbladGenerator, fid: f64, j: f64, scale: f64| -> Result<KrotovState> {
        let mut next = state.clone();
        next.iteration += 1;
        next.forward = problem.forward(trial_gen)?;
        next.pulses = pulses;
        next.costate = xi.clone();
        next.j_history.push(j);
        next.fidelity_history.push(fid);
        next.max_residual = state.max_residual.max(worst);
        next.step_scales.push(scale);
        Ok(next)
    };

    if problem.options.sweeps > 0 {
        let (pulses, trial_gen, fid, j) = try_step(&corrected, 1.0)?;
        if j <= j_prev {
            return accept(pulses, &trial_gen, fid, j, 1.0);
        }
    }
    // The corrector is only reliable near the predicted step; damp along the
    // predictor, which is the exact gradient direction.
    let mut scale = 1.0;
    let mut last_j = f64::NAN;
    for _ in 0..=MAX_HALVINGS {
        let (pulses, trial_gen, fid, j) = try_step(&predictor, scale)?;
        last_j = j;
        if j <= j_prev {
            return accept(pulses, &trial_gen, fid, j, scale);
        }
        scale *= 0.5;
    }
    Err(Error::Stagnation { attempts: MAX_HALVINGS, last_j })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopCriteria {
    pub max_iter: usize,
    /// Stop once |J_k − J_{k−1}| falls below this.
    pub dj_tol: f64,
    pub fidelity_goal: Option<f64>,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self { max_iter: 200, dj_tol: 1e-9, fidelity_goal: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    FidelityGoal,
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrotovReport {
    pub weights: CostWeights,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub j_history: Vec<f64>,
    pub fidelity_history: Vec<f64>,
    pub final_fidelity: f64,
    /// −Tr(ρ_t ρ_f) with the full-field penalties, for the final pulses.
    pub final_functional: f64,
    /// max_t (Σ|ε_c|²)^½ · t_f
    pub pulse_area: f64,
    pub mean_eta_i: Option<f64>,
    pub max_eta_i: Option<f64>,
    pub max_residual: f64,
}

impl KrotovReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }
}

/// Ω_max·t_f with Ω = (Σ_c |ε_c|²)^½.
pub fn pulse_area(pulses: &[ControlPulse]) -> f64 {
    let Some(first) = pulses.first() else { return 0.0 };
    let n = first.samples().len();
    let peak = (0..n)
        .map(|i| pulses.iter().map(|p| p.samples()[i].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    peak * first.grid().duration()
}

/// η_I of a pump/Stokes pair read as Ω₁ = Ω sin θ, Ω₂ = Ω cos θ.
/// Returns `None` when Ω vanishes somewhere.
pub fn pair_inertiality(pump: &ControlPulse, stokes: &ControlPulse) -> Option<Vec<f64>> {
    InertialReport::from_pulses(pump, stokes).ok().map(|r| r.eta_i)
}

/// Iterates [`krotov_step`] until a stop criterion holds.
pub fn optimize(problem: &Problem, guess: Vec<ControlPulse>, stop: &StopCriteria) -> Result<(Vec<ControlPulse>, KrotovReport)> {
    let mut state = KrotovState::new(problem, guess)?;
    let goal_met = |s: &KrotovState| stop.fidelity_goal.is_some_and(|g| s.fidelity() >= g);
    let mut reason = StopReason::MaxIterations;
    if goal_met(&state) {
        reason = StopReason::FidelityGoal;
    } else {
        while state.iteration < stop.max_iter {
            let next = krotov_step(problem, &state)?;
            let dj = (next.j() - state.j()).abs();
            state = next;
            log::debug!(
                "krotov iteration {}: J = {:.10}, F = {:.8}",
                state.iteration,
                state.j(),
                state.fidelity()
            );
            if goal_met(&state) {
                reason = StopReason::FidelityGoal;
                break;
            }
            if dj < stop.dj_tol {
                reason = StopReason::Converged;
                break;
            }
        }
    }
    let rho_f = state.forward.last().expect("grid has points");
    let eta = if state.pulses.len() == 2 {
        pair_inertiality(&state.pulses[0], &state.pulses[1])
    } else {
        None
    };
    let report = KrotovReport {
        weights: problem.weights,
        iterations: state.iteration,
        stop_reason: reason,
        final_fidelity: state.fidelity(),
        final_functional: functional_j(rho_f, &state.pulses, &problem.target, &problem.weights)?,
        pulse_area: pulse_area(&state.pulses),
        mean_eta_i: eta.as_ref().map(|e| e.iter().sum::<f64>() / e.len() as f64),
        max_eta_i: eta.as_ref().map(|e| e.iter().copied().fold(0.0, f64::max)),
        max_residual: state.max_residual,
        j_history: state.j_history,
        fidelity_history: state.fidelity_history,
    };
    Ok((state.pulses, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::pauli;
    use crate::linops::propagate_lindblad;
    use crate::pulses::{stirap_pair, PulseShape};
    use crate::systems::{build_stirap3, mhz, StirapParams};
    use nalgebra::{DMatrix, DVector};
    use std::f64::consts::PI;

    fn unit_weights(l1: f64, l2: f64, l3: f64) -> CostWeights {
        CostWeights { lambda1: l1, lambda2: l2, lambda3: l3, time_unit: 1.0 }
    }

    #[test]
    fn functional_examples() {
        let grid = TimeGrid::span(2.0, 201).unwrap();
        let rho = DensityMatrix::basis(2, 0);
        let zero = ControlPulse::zeros(grid, "z");
        let j = functional_j(&rho, &[zero], &rho, &unit_weights(0.3, 0.0, 0.0)).unwrap();
        assert!((j + 1.0).abs() < 1e-15);
        let c = ControlPulse::from_real_fn(grid, "c", |_| 1.5).unwrap();
        let j = functional_j(&rho, &[c], &rho, &unit_weights(0.3, 0.0, 0.0)).unwrap();
        assert!((j + 1.0 - 0.3 * 1.5 * 1.5 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn costate_examples() {
        let grid = TimeGrid::span(1.0, 401).unwrap();
        let target = DensityMatrix::basis(2, 1);
        let idle = LindbladGenerator::new(ComplexMatrix::zeros(2)).unwrap();
        let xi = backward_costate(&idle, &target, &grid).unwrap();
        assert!(xi.iter().all(|m| m.max_abs_diff(target.matrix()) < 1e-15));

        let mut gen = LindbladGenerator::new(pauli::x().scale_real(2.0)).unwrap();
        gen.add_channel(ControlPulse::from_real_fn(grid, "z", |t| (3.0 * t).cos()).unwrap()).unwrap();
        gen.add_control(0, pauli::z(), C64::new(0.5, 0.0)).unwrap();
        let xi = backward_costate(&gen, &target, &grid).unwrap();
        let purity0 = xi[0].matmul(&xi[0]).trace().re;
        assert!(xi.iter().all(|m| (m.matmul(m).trace().re - purity0).abs() < 1e-8));

        let rho0 = DensityMatrix::pure(&[C64::new(0.8, 0.0), C64::new(0.0, 0.6)]).unwrap();
        let fwd = propagate_lindblad(&gen, &rho0, &grid).unwrap();
        let pairing: Vec<f64> = xi.iter().zip(&fwd).map(|(x, r)| x.matmul(r.matrix()).trace().re).collect();
        assert!(pairing.iter().all(|p| (p - pairing[0]).abs() < 1e-6));
    }

    #[test]
    fn diagonal_system_is_pointwise_rule() {
        let grid = TimeGrid::span(1.0, 50).unwrap();
        let w = unit_weights(0.25, 0.0, 0.0);
        let lu = assemble_banded(&w, &grid).unwrap().factor().unwrap();
        let mut f: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        f[0] = 0.0;
        f[49] = 0.0;
        let (x, _) = lu.solve(&f).unwrap();
        for i in 0..50 {
            assert!((x[i] + f[i] / 0.25).abs() < 1e-12);
        }
        let (x, _) = lu.solve(&[0.0; 50]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn manufactured_solution() {
        let tf = 1.0;
        let n = 401;
        let grid = TimeGrid::span(tf, n).unwrap();
        let w = unit_weights(0.1, 1e-3, 1e-7);
        let sys = assemble_banded(&w, &grid).unwrap();
        let exact: Vec<f64> = grid.times().iter().map(|t| (PI * t / tf).sin()).collect();
        // right-hand side from an independent dense stencil operator
        let h = grid.dt();
        let dense = DMatrix::from_fn(n, n, |r, c| {
            if r == 0 || r == n - 1 || c == 0 || c == n - 1 {
                return if r == c { 1.0 } else { 0.0 };
            }
            let d2 = match r.abs_diff(c) {
                0 => -2.0,
                1 => 1.0,
                _ => 0.0,
            } / (h * h);
            let d4 = match r.abs_diff(c) {
                0 => 6.0,
                1 => -4.0,
                2 => 1.0,
                _ => 0.0,
            } / h.powi(4);
            let id = if r == c { 1.0 } else { 0.0 };
            -w.lambda1 * id + w.lambda2 * d2 - w.lambda3 * d4
        });
        for r in 0..n {
            for c in 0..n {
                assert_eq!(sys.get(r, c), dense[(r, c)]);
            }
        }
        let f = &dense * DVector::from_vec(exact.clone());
        let f: Vec<f64> = f.iter().copied().collect();
        let (x, res) = sys.factor().unwrap().solve(&f).unwrap();
        assert!(res < RESIDUAL_TOL);
        for (a, b) in x.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_lambda1_rejected() {
        let grid = TimeGrid::span(1.0, 10).unwrap();
        assert!(assemble_banded(&unit_weights(0.0, 1.0, 0.0), &grid).is_err());
        assert!(CostWeights::new(-1.0, 0.0, 0.0).is_err());
    }

    fn stirap_problem(tf: f64, omega_max: f64, n: usize, substeps: usize, w: CostWeights) -> (Problem, Vec<ControlPulse>) {
        let grid = TimeGrid::span(tf, n).unwrap();
        let (p1, p2) = stirap_pair(&PulseShape::Cubic, omega_max, &grid).unwrap();
        let gen = build_stirap3(&StirapParams::fig1(), &p1, &p2).unwrap();
        let problem = Problem::new(gen, DensityMatrix::basis(3, 0), DensityMatrix::basis(3, 2), w)
            .unwrap()
            .with_substeps(substeps)
            .unwrap();
        (problem, vec![p1, p2])
    }

    #[test]
    fn stationary_point_leaves_pulses() {
        // no coupling to the target level: every gradient vanishes
        let grid = TimeGrid::span(1e-7, 101).unwrap();
        let mut gen = LindbladGenerator::new(ComplexMatrix::zeros(3)).unwrap();
        gen.add_channel(ControlPulse::from_real_fn(grid, "a", |_| 1e7).unwrap()).unwrap();
        gen.add_control(0, ComplexMatrix::unit(3, 0, 1), C64::new(0.5, 0.0)).unwrap();
        let problem = Problem::new(gen, DensityMatrix::basis(3, 0), DensityMatrix::basis(3, 2), CostWeights::fig1()).unwrap();
        let state = KrotovState::new(&problem, problem.template.channels().to_vec()).unwrap();
        let next = krotov_step(&problem, &state).unwrap();
        assert_eq!(next.pulses, state.pulses);
    }

    #[test]
    fn goal_met_by_guess_needs_no_iterations() {
        let (problem, guess) = stirap_problem(1e-6, mhz(50.0), 101, 8, CostWeights::fig1());
        let stop = StopCriteria { fidelity_goal: Some(0.5), ..Default::default() };
        let (pulses, report) = optimize(&problem, guess.clone(), &stop).unwrap();
        assert_eq!(report.iterations, 0);
        assert_eq!(report.stop_reason, StopReason::FidelityGoal);
        assert_eq!(pulses, guess);
    }

    #[test]
    fn iterations_descend_and_pin_endpoints() {
        let (problem, guess) = stirap_problem(0.13e-6, mhz(50.0), 101, 8, CostWeights::fig1());
        let stop = StopCriteria { max_iter: 5, dj_tol: 0.0, fidelity_goal: None };
        let (pulses, report) = optimize(&problem, guess.clone(), &stop).unwrap();
        assert_eq!(report.iterations, 5);
        assert!(report.j_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(report.final_fidelity > report.fidelity_history[0]);
        assert!(report.max_residual < RESIDUAL_TOL, "{}", report.max_residual);
        for (p, g) in pulses.iter().zip(&guess) {
            let n = p.samples().len();
            assert_eq!(p.samples()[0], g.samples()[0]);
            assert_eq!(p.samples()[n - 1], g.samples()[n - 1]);
        }
        let v: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(v["iterations"], 5);
    }

    #[test]
    fn costate_gradient_matches_finite_difference() {
        let (problem, guess) = stirap_problem(0.1e-6, mhz(50.0), 101, 8, CostWeights::fig1());
        let gen = problem.generator(&guess).unwrap();
        let f = |g: &LindbladGenerator| problem.final_state(g).unwrap().population(2);
        let f0 = f(&gen);
        let rho = problem.forward(&gen).unwrap();
        let xi = problem.costate(&gen).unwrap();
        let (d_re, _) = gen.control_gradient(0);
        let dt = problem.grid().dt();
        for k in [20usize, 50, 80] {
            let r = rho[k].matrix();
            let mut comm = d_re.matmul(r);
            comm.axpy(C64::new(-1.0, 0.0), &r.matmul(&d_re));
            let adjoint = (xi[k].matmul(&comm).trace() * C64::new(0.0, -1.0)).re;
            let de = 1e4;
            let mut bumped = guess.clone();
            bumped[0].samples_mut()[k] += C64::new(de, 0.0);
            let fd = (f(&problem.generator(&bumped).unwrap()) - f0) / (de * dt);
            assert!((adjoint - fd).abs() < 1e-2 * fd.abs(), "k = {k}: {adjoint:e} vs {fd:e}");
        }
    }
}
