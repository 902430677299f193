//! Lindblad generators and fixed-step RK4 propagation.
//!
//! The Hamiltonian is `H(t) = H₀ + Σ_k [g_k ε_k(t) A_k + h.c.] + H_x(t)`,
//! a static drift, control terms driven by sampled pulses, and an optional
//! arbitrary time-dependent part. Jump operators carry √rate.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::density::DensityMatrix;
use super::grid::TimeGrid;
use super::matrix::{ComplexMatrix, I, ZERO};
use crate::error::{Error, Result};
use crate::pulses::ControlPulse;

/// Steps between Hermiticity/trace re-normalization.
pub const RENORMALIZE_EVERY: usize = 100;
/// Trace drift that aborts propagation.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;

pub type TimeDependentTerm = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

type Sparse = Vec<(usize, usize, C64)>;

/// `gain * ε_channel(t) * op + h.c.`
#[derive(Clone, Debug)]
pub struct ControlTerm {
    pub channel: usize,
    pub op: ComplexMatrix,
    pub gain: C64,
}

#[derive(Clone)]
pub struct LindbladGenerator {
    dim: usize,
    drift: ComplexMatrix,
    channels: Vec<ControlPulse>,
    controls: Vec<ControlTerm>,
    jumps: Vec<ComplexMatrix>,
    extra: Option<TimeDependentTerm>,
    control_nz: Vec<Sparse>,
    jump_nz: Vec<Sparse>,
    decay: ComplexMatrix,
}

impl std::fmt::Debug for LindbladGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LindbladGenerator")
            .field("dim", &self.dim)
            .field("channels", &self.channels.len())
            .field("controls", &self.controls.len())
            .field("jumps", &self.jumps.len())
            .field("time_dependent", &self.extra.is_some())
            .finish()
    }
}

impl LindbladGenerator {
    /// Generator with a static Hermitian drift and nothing else.
    pub fn new(drift: ComplexMatrix) -> Result<Self> {
        if !drift.is_hermitian(1e-12) {
            return Err(Error::Precondition("drift Hamiltonian is not Hermitian".into()));
        }
        let dim = drift.dim();
        Ok(Self {
            dim,
            drift,
            channels: Vec::new(),
            controls: Vec::new(),
            jumps: Vec::new(),
            extra: None,
            control_nz: Vec::new(),
            jump_nz: Vec::new(),
            decay: ComplexMatrix::zeros(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn channels(&self) -> &[ControlPulse] {
        &self.channels
    }

    pub fn controls(&self) -> &[ControlTerm] {
        &self.controls
    }

    pub fn jumps(&self) -> &[ComplexMatrix] {
        &self.jumps
    }

    /// Registers a control pulse; returns its channel index.
    pub fn add_channel(&mut self, pulse: ControlPulse) -> Result<usize> {
        if let Some(first) = self.channels.first() {
            if first.grid() != pulse.grid() {
                return Err(Error::GridMismatch);
            }
        }
        self.channels.push(pulse);
        Ok(self.channels.len() - 1)
    }

    pub fn add_control(&mut self, channel: usize, op: ComplexMatrix, gain: C64) -> Result<()> {
        op.check_dim(self.dim)?;
        if channel >= self.channels.len() {
            return Err(Error::Precondition(format!("unknown control channel {channel}")));
        }
        self.control_nz.push(op.nonzeros());
        self.controls.push(ControlTerm { channel, op, gain });
        Ok(())
    }

    /// Adds a jump operator with √rate already folded in. Zero operators are ignored.
    pub fn add_jump(&mut self, l: ComplexMatrix) -> Result<()> {
        l.check_dim(self.dim)?;
        if l.max_abs() == 0.0 {
            return Ok(());
        }
        self.decay += &l.adjoint().matmul(&l);
        self.jump_nz.push(l.nonzeros());
        self.jumps.push(l);
        Ok(())
    }

    pub fn set_time_dependent(&mut self, term: TimeDependentTerm) -> Result<()> {
        term(0.0).check_dim(self.dim)?;
        self.extra = Some(term);
        Ok(())
    }

    /// Same operators, new control pulses (one per existing channel).
    pub fn with_channels(&self, pulses: Vec<ControlPulse>) -> Result<Self> {
        if pulses.len() != self.channels.len() {
            return Err(Error::Dimension {
                expected: self.channels.len(),
                got: pulses.len(),
            });
        }
        if pulses.windows(2).any(|w| w[0].grid() != w[1].grid()) {
            return Err(Error::GridMismatch);
        }
        let mut g = self.clone();
        g.channels = pulses;
        Ok(g)
    }

    /// Drops all jump operators.
    pub fn closed(&self) -> Self {
        let mut g = self.clone();
        g.jumps.clear();
        g.jump_nz.clear();
        g.decay = ComplexMatrix::zeros(self.dim);
        g
    }

    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let mut h = self.drift.clone();
        let amps: Vec<C64> = self.channels.iter().map(|p| p.value_at(t)).collect();
        self.accumulate_controls(&mut h, &amps);
        if let Some(extra) = &self.extra {
            h += &extra(t);
        }
        h
    }

    /// Hamiltonian at grid sample `i` of the channel grid, using exact samples.
    pub fn hamiltonian_at_sample(&self, i: usize) -> ComplexMatrix {
        let mut h = self.drift.clone();
        let amps: Vec<C64> = self.channels.iter().map(|p| p.samples()[i]).collect();
        self.accumulate_controls(&mut h, &amps);
        if let Some(extra) = &self.extra {
            let t = self.channels.first().map(|p| p.grid().time(i)).unwrap_or(0.0);
            h += &extra(t);
        }
        h
    }

    fn accumulate_controls(&self, h: &mut ComplexMatrix, amps: &[C64]) {
        for (term, nz) in self.controls.iter().zip(&self.control_nz) {
            let a = term.gain * amps[term.channel];
            if a == ZERO {
                continue;
            }
            for &(r, c, v) in nz {
                let x = a * v;
                h[(r, c)] += x;
                h[(c, r)] += x.conj();
            }
        }
    }

    /// ∂H/∂(Re ε) and ∂H/∂(Im ε) for one channel.
    pub fn control_gradient(&self, channel: usize) -> (ComplexMatrix, ComplexMatrix) {
        let mut d_re = ComplexMatrix::zeros(self.dim);
        let mut d_im = ComplexMatrix::zeros(self.dim);
        for term in self.controls.iter().filter(|c| c.channel == channel) {
            let a = term.op.scale(term.gain);
            let ad = a.adjoint();
            d_re += &a;
            d_re += &ad;
            d_im.axpy(I, &a);
            d_im.axpy(-I, &ad);
        }
        (d_re, d_im)
    }

    /// Nonzeros of H(t) − (i/2) Σ L†L.
    fn effective(&self, t: f64) -> Sparse {
        let mut h = self.hamiltonian(t);
        h.axpy(C64::new(0.0, -0.5), &self.decay);
        h.nonzeros()
    }

    /// 𝓛ρ for a Hermitian ρ.
    pub fn apply(&self, t: f64, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        forward_rhs(self.dim, &self.effective(t), &self.jump_nz, rho.as_slice(), out.as_mut_slice());
        out
    }

    /// 𝓛†ξ for a Hermitian ξ.
    pub fn apply_adjoint(&self, t: f64, xi: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        adjoint_rhs(self.dim, &self.effective(t), &self.jump_nz, xi.as_slice(), out.as_mut_slice());
        out
    }
}

fn hermitize(n: usize, out: &mut [C64]) {
    for r in 0..n {
        for c in r..n {
            let s = out[r * n + c] + out[c * n + r].conj();
            out[r * n + c] = s;
            out[c * n + r] = s.conj();
        }
    }
}

/// out = −i Heff ρ + i ρ Heff† + Σ L ρ L† (ρ Hermitian)
fn forward_rhs(n: usize, heff: &Sparse, jumps: &[Sparse], rho: &[C64], out: &mut [C64]) {
    out.fill(ZERO);
    for &(r, k, v) in heff {
        let a = -I * v;
        let src = &rho[k * n..(k + 1) * n];
        let dst = &mut out[r * n..(r + 1) * n];
        for (d, s) in dst.iter_mut().zip(src) {
            *d += a * s;
        }
    }
    // diagonal doubles to 2 Re, which is what K + K† needs
    hermitize(n, out);
    for l in jumps {
        for &(a, b, l1) in l {
            for &(c, d, l2) in l {
                out[a * n + c] += l1 * l2.conj() * rho[b * n + d];
            }
        }
    }
}

/// out = i Heff† ξ − i ξ Heff + Σ L† ξ L (ξ Hermitian)
fn adjoint_rhs(n: usize, heff: &Sparse, jumps: &[Sparse], xi: &[C64], out: &mut [C64]) {
    out.fill(ZERO);
    for &(k, r, v) in heff {
        let a = I * v.conj();
        let src = &xi[k * n..(k + 1) * n];
        let dst = &mut out[r * n..(r + 1) * n];
        for (d, s) in dst.iter_mut().zip(src) {
            *d += a * s;
        }
    }
    hermitize(n, out);
    for l in jumps {
        for &(b, a, l1) in l {
            for &(d, c, l2) in l {
                out[a * n + c] += l1.conj() * l2 * xi[b * n + d];
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Adjoint,
}

struct Rk4 {
    n: usize,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = || vec![ZERO; n * n];
        Self {
            n,
            k: [z(), z(), z(), z()],
            tmp: z(),
        }
    }

    /// One step of size `h` (negative for backward time). `heff` holds the
    /// effective Hamiltonian at the start, middle and end of the step.
    fn step(&mut self, dir: Direction, heff: [&Sparse; 3], jumps: &[Sparse], h: f64, y: &mut [C64]) {
        let n = self.n;
        let rhs = |hs: &Sparse, x: &[C64], out: &mut [C64]| match dir {
            Direction::Forward => forward_rhs(n, hs, jumps, x, out),
            Direction::Adjoint => adjoint_rhs(n, hs, jumps, x, out),
        };
        let [k1, k2, k3, k4] = &mut self.k;
        rhs(heff[0], y, k1);
        for ((t, a), b) in self.tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
            *t = a + b * (0.5 * h);
        }
        rhs(heff[1], &self.tmp, k2);
        for ((t, a), b) in self.tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
            *t = a + b * (0.5 * h);
        }
        rhs(heff[1], &self.tmp, k3);
        for ((t, a), b) in self.tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
            *t = a + b * h;
        }
        rhs(heff[2], &self.tmp, k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn renormalize(n: usize, y: &mut [C64], time: f64, keep_trace: bool) {
    let before: Vec<C64> = y.to_vec();
    for r in 0..n {
        for c in r..n {
            let s = 0.5 * (y[r * n + c] + y[c * n + r].conj());
            y[r * n + c] = s;
            y[c * n + r] = s.conj();
        }
    }
    if keep_trace {
        let tr: f64 = (0..n).map(|i| y[i * n + i].re).sum();
        for x in y.iter_mut() {
            *x /= tr;
        }
    }
    let correction = before
        .iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if correction > 1e-9 {
        log::debug!("re-normalized state at t = {time:.6e} s (correction {correction:.3e})");
    }
}

fn check_state(n: usize, y: &[C64], time: f64) -> Result<()> {
    let tr: f64 = (0..n).map(|i| y[i * n + i].re).sum();
    let drift = (tr - 1.0).abs();
    let max = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !drift.is_finite() || !max.is_finite() || drift > MAX_TRACE_DRIFT {
        return Err(Error::StepTooLarge { time, drift });
    }
    if max > 1.0 + MAX_TRACE_DRIFT {
        return Err(Error::StepTooLarge {
            time,
            drift: max - 1.0,
        });
    }
    Ok(())
}

/// Forward propagation calling `observe(i, ρ(t_i))` at each grid point.
pub fn propagate_with(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    mut observe: impl FnMut(usize, &ComplexMatrix),
) -> Result<DensityMatrix> {
    rho0.matrix().check_dim(gen.dim)?;
    let n = gen.dim;
    let mut y = rho0.matrix().clone();
    observe(0, &y);
    let mut rk = Rk4::new(n);
    let mut h_start = gen.effective(grid.time(0));
    for i in 0..grid.len() - 1 {
        let t = grid.time(i);
        let t_next = grid.time(i + 1);
        let h_mid = gen.effective(t + 0.5 * (t_next - t));
        let h_end = gen.effective(t_next);
        rk.step(Direction::Forward, [&h_start, &h_mid, &h_end], &gen.jump_nz, t_next - t, y.as_mut_slice());
        if (i + 1) % RENORMALIZE_EVERY == 0 {
            renormalize(n, y.as_mut_slice(), t_next, true);
        }
        check_state(n, y.as_slice(), t_next)?;
        observe(i + 1, &y);
        h_start = h_end;
    }
    Ok(DensityMatrix::from_trusted(y))
}

/// Full trajectory ρ(t_i) on `grid`, starting from `rho0`.
pub fn propagate_lindblad(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Vec<DensityMatrix>> {
    let mut traj = Vec::with_capacity(grid.len());
    propagate_with(gen, rho0, grid, |_, m| traj.push(DensityMatrix::from_trusted(m.clone())))?;
    Ok(traj)
}

/// Final state only.
pub fn propagate_final(gen: &LindbladGenerator, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<DensityMatrix> {
    propagate_with(gen, rho0, grid, |_, _| {})
}

/// Solves ξ̇ = −𝓛†ξ backward from ξ(t_f) = `terminal`; returns ξ(t_i) for every grid point.
pub fn propagate_adjoint(
    gen: &LindbladGenerator,
    terminal: &ComplexMatrix,
    grid: &TimeGrid,
) -> Result<Vec<ComplexMatrix>> {
    terminal.check_dim(gen.dim)?;
    let n = gen.dim;
    let len = grid.len();
    let mut out = vec![ComplexMatrix::zeros(n); len];
    let mut y = terminal.clone();
    out[len - 1] = y.clone();
    let mut rk = Rk4::new(n);
    let mut h_start = gen.effective(grid.time(len - 1));
    for i in (1..len).rev() {
        let t = grid.time(i);
        let t_prev = grid.time(i - 1);
        let h_mid = gen.effective(t_prev + 0.5 * (t - t_prev));
        let h_end = gen.effective(t_prev);
        // dξ/ds = 𝓛†ξ with s = t_f − t
        rk.step(Direction::Adjoint, [&h_start, &h_mid, &h_end], &gen.jump_nz, t - t_prev, y.as_mut_slice());
        if (len - i) % RENORMALIZE_EVERY == 0 {
            renormalize(n, y.as_mut_slice(), t_prev, false);
        }
        if !y.is_finite() {
            return Err(Error::StepTooLarge {
                time: t_prev,
                drift: f64::INFINITY,
            });
        }
        out[i - 1] = y.clone();
        h_start = h_end;
    }
    Ok(out)
}

/// Closed-system propagation of a state vector under H(t); jumps are ignored.
///
/// `observe(i, ψ(t_i))` is called at every grid point. Returns ψ(t_f).
pub fn propagate_state(
    gen: &LindbladGenerator,
    psi0: &[C64],
    grid: &TimeGrid,
    mut observe: impl FnMut(usize, &[C64]),
) -> Result<Vec<C64>> {
    if psi0.len() != gen.dim {
        return Err(Error::Dimension {
            expected: gen.dim,
            got: psi0.len(),
        });
    }
    let n = gen.dim;
    let rhs = |h: &Sparse, x: &[C64], out: &mut [C64]| {
        out.fill(ZERO);
        for &(r, c, v) in h {
            out[r] += -I * v * x[c];
        }
    };
    let norm0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if !(norm0 > 0.0) {
        return Err(Error::Precondition("state vector has zero norm".into()));
    }
    let mut y = psi0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
    observe(0, &y);
    let mut h_start = gen.hamiltonian(grid.time(0)).nonzeros();
    for i in 0..grid.len() - 1 {
        let t = grid.time(i);
        let t_next = grid.time(i + 1);
        let h = t_next - t;
        let h_mid = gen.hamiltonian(t + 0.5 * h).nonzeros();
        let h_end = gen.hamiltonian(t_next).nonzeros();
        rhs(&h_start, &y, &mut k1);
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        rhs(&h_mid, &tmp, &mut k2);
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        rhs(&h_mid, &tmp, &mut k3);
        for j in 0..n {
            tmp[j] = y[j] + h * k3[j];
        }
        rhs(&h_end, &tmp, &mut k4);
        for j in 0..n {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let drift = (norm - norm0).abs() / norm0;
        if !drift.is_finite() || drift > MAX_TRACE_DRIFT {
            return Err(Error::StepTooLarge { time: t_next, drift });
        }
        if (i + 1) % RENORMALIZE_EVERY == 0 {
            let s = (norm0 / norm).sqrt();
            y.iter_mut().for_each(|z| *z *= s);
        }
        observe(i + 1, &y);
        h_start = h_end;
    }
    Ok(y)
}
