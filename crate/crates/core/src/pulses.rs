//! Analytic STIRAP pulse families and the control-pulse container.
//!
//! Parameterized shapes are built from a mixing angle θ(t):
//! `Ω₁ = Ω_max sin θ`, `Ω₂ = Ω_max cos θ`, so that θ = 0 leaves only the
//! Stokes field on and θ = π/2 only the pump. Gaussian envelopes are
//! evaluated literally and keep their truncated tails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::TimeGrid;

/// Sampled complex Rabi frequency (rad/s) on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPulse {
    grid: TimeGrid,
    samples: Vec<C64>,
    pub label: String,
}

impl ControlPulse {
    pub fn new(grid: TimeGrid, samples: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Precondition(format!("pulse sample {i} is not finite")));
        }
        Ok(Self {
            grid,
            samples,
            label: label.into(),
        })
    }

    pub fn from_fn(grid: TimeGrid, label: impl Into<String>, f: impl Fn(f64) -> C64) -> Result<Self> {
        let samples = grid.times().into_iter().map(f).collect();
        Self::new(grid, samples, label)
    }

    pub fn from_real_fn(grid: TimeGrid, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, label, |t| C64::new(f(t), 0.0))
    }

    pub fn zeros(grid: TimeGrid, label: impl Into<String>) -> Self {
        Self {
            grid,
            samples: vec![C64::new(0.0, 0.0); grid.len()],
            label: label.into(),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [C64] {
        &mut self.samples
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ∫|Ω(t)| dt
    pub fn area(&self) -> f64 {
        self.grid.integrate(&self.magnitudes())
    }

    /// ∫|Ω(t)|² dt
    pub fn energy(&self) -> f64 {
        let p: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        self.grid.integrate(&p)
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * s).collect(),
            label: self.label.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(f64, C64) -> C64) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, z)| f(self.grid.time(i), *z))
            .collect();
        Self {
            grid: self.grid,
            samples,
            label: self.label.clone(),
        }
    }

    /// Value at an arbitrary time: cubic Lagrange interpolation through the
    /// four nearest samples (exact at grid points, held constant outside the grid).
    pub fn value_at(&self, t: f64) -> C64 {
        let n = self.samples.len();
        let dt = self.grid.dt();
        let x = (t - self.grid.t0()) / dt;
        if x <= 0.0 {
            return self.samples[0];
        }
        if x >= (n - 1) as f64 {
            return self.samples[n - 1];
        }
        let nearest = x.round();
        if (x - nearest).abs() < 1e-9 {
            return self.samples[nearest as usize];
        }
        let i = x.floor() as usize;
        let start = i.saturating_sub(1).min(n - 4);
        let s = x - start as f64;
        // nodes at 0, 1, 2, 3 relative to `start`
        let w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
        let w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
        let w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
        let w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
        let p = &self.samples[start..start + 4];
        p[0] * w0 + p[1] * w1 + p[2] * w2 + p[3] * w3
    }

    /// Writes `t_seconds,re_rad_per_s,im_rad_per_s` rows with a header.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        self.write_csv_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_to<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        w.write_record(["t_seconds", "re_rad_per_s", "im_rad_per_s"])?;
        for (i, z) in self.samples.iter().enumerate() {
            w.write_record(&[
                format!("{:.17e}", self.grid.time(i)),
                format!("{:.17e}", z.re),
                format!("{:.17e}", z.im),
            ])?;
        }
        Ok(())
    }

    /// Reads the CSV layout written by [`ControlPulse::write_csv`]. Sample
    /// times must be uniformly spaced.
    pub fn read_csv(path: impl AsRef<Path>, label: impl Into<String>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv_from(file, label)
    }

    pub fn read_csv_from<R: std::io::Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = r.headers()?.clone();
        let expected = ["t_seconds", "re_rad_per_s", "im_rad_per_s"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
            return Err(Error::Config(format!(
                "pulse CSV header must be {}, got {:?}",
                expected.join(","),
                headers
            )));
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number `{}`: {e}", &rec[k])))
            };
            times.push(parse(0)?);
            samples.push(C64::new(parse(1)?, parse(2)?));
        }
        if times.len() < 3 {
            return Err(Error::Config("pulse CSV needs at least 3 rows".into()));
        }
        let grid = TimeGrid::new(times[0], *times.last().unwrap(), times.len())?;
        let tol = 1e-6 * grid.dt();
        if let Some(i) = times.iter().enumerate().position(|(i, t)| (t - grid.time(i)).abs() > tol) {
            return Err(Error::Config(format!("pulse CSV row {i} is off the uniform grid")));
        }
        Self::new(grid, samples, label)
    }
}

/// Pulse family selector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Gaussian,
    #[serde(alias = "sinsq")]
    SinSq,
    Cubic,
    Quartic,
    /// Explicit (pump, Stokes) samples.
    Custom { pump: Vec<C64>, stokes: Vec<C64> },
}

impl PulseShape {
    pub fn name(&self) -> &'static str {
        match self {
            PulseShape::Gaussian => "gaussian",
            PulseShape::SinSq => "sinsq",
            PulseShape::Cubic => "cubic",
            PulseShape::Quartic => "quartic",
            PulseShape::Custom { .. } => "custom",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(PulseShape::Gaussian),
            "sinsq" => Ok(PulseShape::SinSq),
            "cubic" => Ok(PulseShape::Cubic),
            "quartic" => Ok(PulseShape::Quartic),
            other => Err(Error::Config(format!("unknown pulse shape `{other}`"))),
        }
    }
}

impl std::fmt::Display for PulseShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Mixing-angle profile θ(t) on `[0, tf]` with analytic derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThetaProfile {
    /// θ = πt / 2t_f
    Linear { tf: f64 },
    /// Cubic with zero slope at both ends, θ(0) = 0, θ(t_f) = π/2.
    Cubic { tf: f64 },
    /// Even quartic about t_f/2 with θ(t_f/2) = π/2 and zero slope at 0, t_f/2, t_f.
    Quartic { tf: f64 },
    /// θ = πt/t_f up to t_f/2, then back down linearly.
    Triangle { tf: f64 },
}

impl ThetaProfile {
    pub fn tf(&self) -> f64 {
        match *self {
            ThetaProfile::Linear { tf }
            | ThetaProfile::Cubic { tf }
            | ThetaProfile::Quartic { tf }
            | ThetaProfile::Triangle { tf } => tf,
        }
    }

    /// (θ, θ̇, θ̈) at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            ThetaProfile::Linear { tf } => (PI * t / (2.0 * tf), PI / (2.0 * tf), 0.0),
            ThetaProfile::Cubic { tf } => {
                let (c2, c3) = cubic_coefficients(tf);
                (
                    c2 * t * t + c3 * t * t * t,
                    2.0 * c2 * t + 3.0 * c3 * t * t,
                    2.0 * c2 + 6.0 * c3 * t,
                )
            }
            ThetaProfile::Quartic { tf } => {
                let (c0, c2, c4) = quartic_coefficients(tf);
                let u = t - 0.5 * tf;
                (
                    c0 + c2 * u * u + c4 * u.powi(4),
                    2.0 * c2 * u + 4.0 * c4 * u.powi(3),
                    2.0 * c2 + 12.0 * c4 * u * u,
                )
            }
            ThetaProfile::Triangle { tf } => {
                if t <= 0.5 * tf {
                    (PI * t / tf, PI / tf, 0.0)
                } else {
                    (PI * (tf - t) / tf, -PI / tf, 0.0)
                }
            }
        }
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn theta_dot(&self, t: f64) -> f64 {
        self.eval(t).1
    }
}

fn cubic_coefficients(tf: f64) -> (f64, f64) {
    let c3 = -PI / tf.powi(3);
    let c2 = (FRAC_PI_2 - c3 * tf.powi(3)) / (tf * tf);
    (c2, c3)
}

fn quartic_coefficients(tf: f64) -> (f64, f64, f64) {
    (FRAC_PI_2, -4.0 * PI / (tf * tf), 8.0 * PI / tf.powi(4))
}

fn check_domain(t: f64, tf: f64) -> Result<()> {
    if !(tf > 0.0) {
        return Err(Error::Domain(format!("protocol duration {tf}")));
    }
    if !(0.0..=tf).contains(&t) {
        return Err(Error::Domain(format!("time {t} (window [0, {tf}])")));
    }
    Ok(())
}

/// Cubic mixing angle C₂t² + C₃t³ with C₃ = −π/t_f³ and C₂ = (π/2 − C₃t_f³)/t_f².
pub fn theta_cubic(t: f64, tf: f64) -> Result<f64> {
    check_domain(t, tf)?;
    Ok(ThetaProfile::Cubic { tf }.theta(t))
}

/// Quartic mixing angle C₀ + C₂(t − t_f/2)² + C₄(t − t_f/2)⁴.
pub fn theta_quartic(t: f64, tf: f64) -> Result<f64> {
    check_domain(t, tf)?;
    Ok(ThetaProfile::Quartic { tf }.theta(t))
}

fn from_theta(
    profile: ThetaProfile,
    omega_max: f64,
    grid: &TimeGrid,
) -> Result<(ControlPulse, ControlPulse)> {
    let t0 = grid.t0();
    let pump = ControlPulse::from_real_fn(*grid, "omega1", |t| omega_max * profile.theta(t - t0).sin())?;
    let stokes = ControlPulse::from_real_fn(*grid, "omega2", |t| omega_max * profile.theta(t - t0).cos())?;
    Ok((pump, stokes))
}

fn custom_pair(pump: &[C64], stokes: &[C64], grid: &TimeGrid) -> Result<(ControlPulse, ControlPulse)> {
    Ok((
        ControlPulse::new(*grid, pump.to_vec(), "omega1")?,
        ControlPulse::new(*grid, stokes.to_vec(), "omega2")?,
    ))
}

fn check_amplitude(omega_max: f64) -> Result<()> {
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::Precondition(format!("omega_max must be positive, got {omega_max}")));
    }
    Ok(())
}

/// Single-step STIRAP envelopes (pump Ω₁, Stokes Ω₂) in counterintuitive order.
pub fn stirap_pair(
    shape: &PulseShape,
    omega_max: f64,
    grid: &TimeGrid,
) -> Result<(ControlPulse, ControlPulse)> {
    check_amplitude(omega_max)?;
    let tf = grid.duration();
    let t0 = grid.t0();
    match shape {
        PulseShape::Gaussian => {
            let g = |t: f64, tj: f64| omega_max * (-4.0 * (t - t0 - tj).powi(2) / (tf * tf)).exp();
            let pump = ControlPulse::from_real_fn(*grid, "omega1", |t| g(t, tf))?;
            let stokes = ControlPulse::from_real_fn(*grid, "omega2", |t| g(t, 0.0))?;
            Ok((pump, stokes))
        }
        PulseShape::SinSq => from_theta(ThetaProfile::Linear { tf }, omega_max, grid),
        PulseShape::Cubic => from_theta(ThetaProfile::Cubic { tf }, omega_max, grid),
        PulseShape::Quartic => Err(Error::Shape {
            shape: "quartic".into(),
            reason: "the quartic profile is a two-step gate profile; use gate_pair".into(),
        }),
        PulseShape::Custom { pump, stokes } => custom_pair(pump, stokes, grid),
    }
}

/// Two back-to-back STIRAP steps (out to the auxiliary level and back).
///
/// With `phase_flip`, Ω₂ changes sign for t > t_f/2.
pub fn gate_pair(
    shape: &PulseShape,
    omega_max: f64,
    grid: &TimeGrid,
    phase_flip: bool,
) -> Result<(ControlPulse, ControlPulse)> {
    check_amplitude(omega_max)?;
    let tf = grid.duration();
    let t0 = grid.t0();
    let (pump, stokes) = match shape {
        PulseShape::Gaussian => {
            let half = 0.5 * tf;
            let g = |t: f64, tj: f64| omega_max * (-4.0 * (t - t0 - tj).powi(2) / (half * half)).exp();
            let pump = ControlPulse::from_real_fn(*grid, "omega1", |t| g(t, half))?;
            let stokes = ControlPulse::from_real_fn(*grid, "omega2", |t| g(t, 0.0) + g(t, tf))?;
            (pump, stokes)
        }
        PulseShape::SinSq => from_theta(ThetaProfile::Triangle { tf }, omega_max, grid)?,
        PulseShape::Quartic => from_theta(ThetaProfile::Quartic { tf }, omega_max, grid)?,
        PulseShape::Cubic => {
            return Err(Error::Shape {
                shape: "cubic".into(),
                reason: "the cubic profile is a single-step profile; use stirap_pair".into(),
            })
        }
        PulseShape::Custom { pump, stokes } => custom_pair(pump, stokes, grid)?,
    };
    let stokes = if phase_flip {
        let mid = t0 + 0.5 * tf;
        stokes.map(|t, z| if t > mid { -z } else { z })
    } else {
        stokes
    };
    Ok((pump, stokes))
}

/// Finite-difference first and second derivatives of a pulse.
///
/// Central differences inside the grid, second-order one-sided stencils at
/// the two ends. Real and imaginary parts are differentiated independently.
pub fn pulse_derivatives(p: &ControlPulse) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = p.samples.len();
    if n < 5 {
        return Err(Error::Precondition(format!("derivatives need at least 5 samples, got {n}")));
    }
    Ok((
        first_derivative(p.samples(), p.grid.dt()),
        second_derivative(p.samples(), p.grid.dt()),
    ))
}

pub(crate) fn first_derivative<T>(f: &[T], dt: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = f.len();
    let mut d = Vec::with_capacity(n);
    d.push((f[0] * -3.0 + f[1] * 4.0 - f[2]) * (0.5 / dt));
    for i in 1..n - 1 {
        d.push((f[i + 1] - f[i - 1]) * (0.5 / dt));
    }
    d.push((f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * (0.5 / dt));
    d
}

pub(crate) fn second_derivative<T>(f: &[T], dt: f64) -> Vec<T>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = f.len();
    let h2 = 1.0 / (dt * dt);
    let mut d = Vec::with_capacity(n);
    d.push((f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) * h2);
    for i in 1..n - 1 {
        d.push((f[i + 1] - f[i] * 2.0 + f[i - 1]) * h2);
    }
    d.push((f[n - 1] * 2.0 - f[n - 2] * 5.0 + f[n - 3] * 4.0 - f[n - 4]) * h2);
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::span(1e-6, n).unwrap()
    }

    #[test]
    fn cubic_boundary_values() {
        let tf = 0.37;
        assert_eq!(theta_cubic(0.0, tf).unwrap(), 0.0);
        assert!((theta_cubic(tf, tf).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((theta_cubic(0.5 * tf, tf).unwrap() - PI / 4.0).abs() < 1e-12);
        let p = ThetaProfile::Cubic { tf };
        assert_eq!(p.theta_dot(0.0), 0.0);
        assert!(p.theta_dot(tf).abs() < 1e-12);
    }

    #[test]
    fn quartic_values() {
        let tf = 2.0;
        assert!((theta_quartic(1.0, tf).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!(theta_quartic(0.0, tf).unwrap().abs() < 1e-12);
        assert!(theta_quartic(tf, tf).unwrap().abs() < 1e-12);
        let p = ThetaProfile::Quartic { tf };
        for t in [0.0, 1.0, 2.0] {
            assert!(p.theta_dot(t).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_domain_errors() {
        assert!(matches!(theta_cubic(-0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(theta_quartic(1.1, 1.0), Err(Error::Domain(_))));
        assert!(theta_cubic(0.5, 0.0).is_err());
    }

    #[test]
    fn cubic_pair_endpoints() {
        let g = grid(101);
        let (p, s) = stirap_pair(&PulseShape::Cubic, 3.0, &g).unwrap();
        assert_eq!(p.samples()[0].re, 0.0);
        assert_eq!(s.samples()[0].re, 3.0);
        assert!((p.samples()[100].re - 3.0).abs() < 1e-12);
        assert!(s.samples()[100].re.abs() < 1e-12);
    }

    #[test]
    fn gaussian_pair_endpoint() {
        let g = grid(101);
        let (p, s) = stirap_pair(&PulseShape::Gaussian, 2.0, &g).unwrap();
        assert!((p.samples()[100].re - 2.0).abs() < 1e-12);
        assert!((s.samples()[100].re - 2.0 * (-4.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn quartic_rejected_for_single_step_and_cubic_for_gate() {
        let g = grid(11);
        assert!(matches!(stirap_pair(&PulseShape::Quartic, 1.0, &g), Err(Error::Shape { .. })));
        assert!(matches!(gate_pair(&PulseShape::Cubic, 1.0, &g, false), Err(Error::Shape { .. })));
    }

    #[test]
    fn quartic_gate_pair_midpoint_and_ends() {
        let g = grid(201);
        let (p, s) = gate_pair(&PulseShape::Quartic, 5.0, &g, true).unwrap();
        assert!((p.samples()[100].re - 5.0).abs() < 1e-12);
        assert!(s.samples()[100].re.abs() < 1e-12);
        assert!(p.samples()[0].re.abs() < 1e-12 && p.samples()[200].re.abs() < 1e-12);
        assert!((s.samples()[0].re - 5.0).abs() < 1e-12);
        assert!((s.samples()[200].re + 5.0).abs() < 1e-12);
        let (_, s) = gate_pair(&PulseShape::Quartic, 5.0, &g, false).unwrap();
        assert!((s.samples()[200].re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn unflipped_stokes_is_symmetric() {
        let g = grid(301);
        for shape in [PulseShape::Quartic, PulseShape::SinSq, PulseShape::Gaussian] {
            let (p, s) = gate_pair(&shape, 1.0, &g, false).unwrap();
            for i in 0..301 {
                assert!((s.samples()[i] - s.samples()[300 - i]).norm() < 1e-12, "{shape}");
                assert!((p.samples()[i] - p.samples()[300 - i]).norm() < 1e-12, "{shape}");
            }
        }
    }

    #[test]
    fn derivatives_of_constant_and_ramp() {
        let g = grid(21);
        let c = ControlPulse::from_fn(g, "c", |_| C64::new(2.0, -1.0)).unwrap();
        let (d1, d2) = pulse_derivatives(&c).unwrap();
        assert!(d1.iter().chain(&d2).all(|z| z.norm() < 1e-6));
        let ramp = ControlPulse::from_fn(g, "r", |t| C64::new(3e6 * t, -2e6 * t)).unwrap();
        let (d1, d2) = pulse_derivatives(&ramp).unwrap();
        for z in &d1 {
            assert!((z - C64::new(3e6, -2e6)).norm() < 1e-10 * 3e6);
        }
        let scale = 3e6 / g.dt();
        assert!(d2.iter().all(|z| z.norm() < 1e-8 * scale));
    }

    #[test]
    fn derivative_of_sine_within_bound() {
        let g = TimeGrid::span(1.0, 1001).unwrap();
        let w = 0.01 / g.dt();
        let p = ControlPulse::from_real_fn(g, "s", |t| (w * t).sin()).unwrap();
        let (d1, _) = pulse_derivatives(&p).unwrap();
        let err = g
            .times()
            .iter()
            .zip(&d1)
            .map(|(t, d)| (d.re - w * (w * t).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4 * w, "err {err} vs w {w}");
    }

    #[test]
    fn too_few_samples_for_derivatives() {
        let g = TimeGrid::span(1.0, 4).unwrap();
        assert!(pulse_derivatives(&ControlPulse::zeros(g, "z")).is_err());
    }

    #[test]
    fn interpolation_exact_for_cubics() {
        let g = TimeGrid::span(1.0, 11).unwrap();
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let p = ControlPulse::from_real_fn(g, "p", f).unwrap();
        for t in [0.03, 0.45, 0.5, 0.97] {
            assert!((p.value_at(t).re - f(t)).abs() < 1e-12);
        }
        assert_eq!(p.value_at(0.3), p.samples()[3]);
    }

    #[test]
    fn csv_roundtrip_and_header_check() {
        let g = TimeGrid::span(2e-7, 9).unwrap();
        let p = ControlPulse::from_fn(g, "x", |t| C64::new(1e8 * t, -3e7)).unwrap();
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            p.write_csv_to(&mut w).unwrap();
        }
        let q = ControlPulse::read_csv_from(buf.as_slice(), "x").unwrap();
        assert_eq!(q.grid().len(), 9);
        for (a, b) in p.samples().iter().zip(q.samples()) {
            assert!((a - b).norm() < 1e-6);
        }
        let bad = "t,re,im\n0,1,0\n1,1,0\n2,1,0\n";
        assert!(ControlPulse::read_csv_from(bad.as_bytes(), "x").is_err());
    }
}
