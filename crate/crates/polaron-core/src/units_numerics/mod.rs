//! Unit conventions and the numerical primitives shared by every engine.
//!
//! Internally all frequencies and rates are angular frequencies in rad/ps and
//! all times are in ps. Conversion to meV, µeV and Kelvin happens only at the
//! I/O boundary through the helpers below.

mod fourier;
mod ode;
mod quadrature;

pub use fourier::{
    complex_half_fourier, emission_transform, half_fourier, half_fourier_with_floor,
    DEFAULT_DECAY_FLOOR,
};
pub use ode::{integrate_ode, Rk4, Trajectory};
pub use quadrature::{integrate_adaptive, phonon_kernel_integral, KERNEL_CUTOFF_LIMIT_PS};

use crate::error::{PolaronError, Result};
use num_complex::Complex64;

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119569;
/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.08617333262;

pub fn mev_to_rad_ps(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_PS
}

pub fn rad_ps_to_mev(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

pub fn uev_to_rad_ps(energy_uev: f64) -> f64 {
    mev_to_rad_ps(energy_uev * 1e-3)
}

pub fn rad_ps_to_uev(omega: f64) -> f64 {
    rad_ps_to_mev(omega) * 1e3
}

/// k_B T / ħ in rad/ps.
pub fn thermal_frequency(temperature_k: f64) -> f64 {
    KB_MEV_PER_K * temperature_k / HBAR_MEV_PS
}

/// Uniform grid of rotating-frame detunings in rad/ps.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    start: f64,
    end: f64,
    len: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(PolaronError::EmptyGrid);
        }
        if len > 1 && !(end > start) {
            return Err(PolaronError::InvalidParameter {
                name: "grid.end",
                value: end,
            });
        }
        Ok(Self { start, end, len })
    }

    /// Grid specified in meV.
    pub fn from_mev(start_mev: f64, end_mev: f64, len: usize) -> Result<Self> {
        Self::new(mev_to_rad_ps(start_mev), mev_to_rad_ps(end_mev), len)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        if self.len < 2 {
            0.0
        } else {
            (self.end - self.start) / (self.len - 1) as f64
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + self.step() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }
}

/// Complex two-time correlation g(τ) sampled on a uniform grid starting at τ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace {
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl CorrelationTrace {
    pub fn new(dt: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(PolaronError::EmptyGrid);
        }
        if !(dt > 0.0) {
            return Err(PolaronError::InvalidParameter {
                name: "trace.dt",
                value: dt,
            });
        }
        Ok(Self { dt, values })
    }

    /// Samples `f` at τ = 0, dt, ..., up to and including `t_end`.
    pub fn from_fn(dt: f64, t_end: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let n = (t_end / dt).round() as usize + 1;
        Self::new(dt, (0..n).map(|i| f(i as f64 * dt)).collect())
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| i as f64 * self.dt)
    }

    pub fn t_end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }
}

/// Real spectrum sampled on a frequency grid (rad/ps).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(omega.len(), values.len());
        Self { omega, values }
    }

    pub fn from_fn(grid: &FrequencyGrid, f: impl Fn(f64) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let omega = grid.points();
        let values = omega.par_iter().map(|&w| f(w)).collect();
        Self { omega, values }
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy scaled so that the maximum equals one.
    pub fn normalized(&self) -> Spectrum {
        let peak = self.max_value();
        let scale = if peak != 0.0 { 1.0 / peak } else { 1.0 };
        Spectrum {
            omega: self.omega.clone(),
            values: self.values.iter().map(|v| v * scale).collect(),
        }
    }

    /// Linear interpolation at `w`; zero outside the sampled range.
    pub fn interpolate(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if n == 0 || w < self.omega[0] || w > self.omega[n - 1] {
            return 0.0;
        }
        let idx = self.omega.partition_point(|&x| x <= w);
        if idx == 0 {
            return self.values[0];
        }
        if idx >= n {
            return self.values[n - 1];
        }
        let (x0, x1) = (self.omega[idx - 1], self.omega[idx]);
        let t = (w - x0) / (x1 - x0);
        self.values[idx - 1] * (1.0 - t) + self.values[idx] * t
    }

    pub fn omega_mev(&self) -> Vec<f64> {
        self.omega.iter().map(|&w| rad_ps_to_mev(w)).collect()
    }

    /// Trapezoidal area under the spectrum.
    pub fn area(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }
}
