use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling of `[t0, tf]` with `n` points (both ends included).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    tf: f64,
    n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("time grid needs n >= 3 samples, got {n}")));
        }
        if !(t0.is_finite() && tf.is_finite()) || tf <= t0 {
            return Err(Error::Config(format!(
                "time grid must be increasing and finite, got [{t0}, {tf}]"
            )));
        }
        Ok(Self { t0, tf, n })
    }

    /// `[0, tf]` with `n` samples.
    pub fn span(tf: f64, n: usize) -> Result<Self> {
        Self::new(0.0, tf, n)
    }

    #[inline]
    pub fn t0(&self) -> f64 {
        self.t0
    }

    #[inline]
    pub fn tf(&self) -> f64 {
        self.tf
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        (self.tf - self.t0) / (self.n - 1) as f64
    }

    pub fn duration(&self) -> f64 {
        self.tf - self.t0
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.tf
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.time(i)).collect()
    }

    /// Same span, different sample count.
    pub fn resampled(&self, n: usize) -> Result<Self> {
        Self::new(self.t0, self.tf, n)
    }

    /// Trapezoidal integral of samples on this grid.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        assert_eq!(samples.len(), self.n, "sample count must match grid");
        let dt = self.dt();
        let inner: f64 = samples[1..self.n - 1].iter().sum();
        dt * (inner + 0.5 * (samples[0] + samples[self.n - 1]))
    }

    /// Running trapezoidal integral starting at zero.
    pub fn cumulative_integral(&self, samples: &[f64]) -> Vec<f64> {
        assert_eq!(samples.len(), self.n, "sample count must match grid");
        let dt = self.dt();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.n);
        out.push(0.0);
        for w in samples.windows(2) {
            acc += 0.5 * dt * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }
}
