//! Longitudinal-acoustic phonon bath with deformation-potential coupling.

use crate::error::{PolaronError, Result};
use crate::units_numerics::{
    integrate_adaptive, mev_to_rad_ps, phonon_kernel_integral, HBAR_MEV_PS, KB_MEV_PER_K,
};
use num_complex::Complex64;
use rayon::prelude::*;

/// Coupling strength α_p (ps²), cutoff ω_p (rad/ps) and temperature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononBathParams {
    pub coupling_ps2: f64,
    pub cutoff: f64,
    pub temperature_k: f64,
}

impl PhononBathParams {
    pub fn new(coupling_ps2: f64, cutoff: f64, temperature_k: f64) -> Result<Self> {
        if !(coupling_ps2 >= 0.0) {
            return Err(PolaronError::InvalidParameter {
                name: "phonon.alpha_ps2",
                value: coupling_ps2,
            });
        }
        if !(cutoff > 0.0) {
            return Err(PolaronError::InvalidParameter {
                name: "phonon.omega_p",
                value: cutoff,
            });
        }
        if !(temperature_k >= 0.0) {
            return Err(PolaronError::InvalidParameter {
                name: "phonon.temperature_K",
                value: temperature_k,
            });
        }
        Ok(Self {
            coupling_ps2,
            cutoff,
            temperature_k,
        })
    }

    /// InAs dot values: α_p = 0.06 ps², ω_p = 1 meV.
    pub fn inas(temperature_k: f64) -> Self {
        Self {
            coupling_ps2: 0.06,
            cutoff: mev_to_rad_ps(1.0),
            temperature_k,
        }
    }

    /// Builds α_p = D² / (4π² ħ ρ c_s⁵) from bulk material constants in SI
    /// units: deformation-potential difference in eV, mass density in
    /// kg/m³ and sound velocity in m/s.
    pub fn from_deformation_potential(
        deformation_ev: f64,
        density_kg_m3: f64,
        sound_velocity_m_s: f64,
        cutoff: f64,
        temperature_k: f64,
    ) -> Result<Self> {
        const EV_J: f64 = 1.602176634e-19;
        const HBAR_J_S: f64 = 1.054571817e-34;
        if !(density_kg_m3 > 0.0) {
            return Err(PolaronError::InvalidParameter {
                name: "phonon.density",
                value: density_kg_m3,
            });
        }
        if !(sound_velocity_m_s > 0.0) {
            return Err(PolaronError::InvalidParameter {
                name: "phonon.sound_velocity",
                value: sound_velocity_m_s,
            });
        }
        let d = deformation_ev * EV_J;
        let alpha_s2 = d * d
            / (4.0
                * std::f64::consts::PI.powi(2)
                * HBAR_J_S
                * density_kg_m3
                * sound_velocity_m_s.powi(5));
        Self::new(alpha_s2 * 1e24, cutoff, temperature_k)
    }

    pub fn without_coupling(self) -> Self {
        Self {
            coupling_ps2: 0.0,
            ..self
        }
    }

    pub fn with_temperature(self, temperature_k: f64) -> Self {
        Self {
            temperature_k,
            ..self
        }
    }

    /// ω·coth(ħω/2k_BT), finite at ω → 0 and equal to |ω| at T = 0.
    fn thermal_weight(&self, omega: f64) -> f64 {
        if self.temperature_k == 0.0 {
            return omega;
        }
        let x = HBAR_MEV_PS * omega / (2.0 * KB_MEV_PER_K * self.temperature_k);
        if x.abs() < 1e-6 {
            omega / x * (1.0 + x * x / 3.0)
        } else {
            omega / x.tanh()
        }
    }

    /// Upper integration limit beyond which the Gaussian cutoff makes the
    /// spectral density negligible.
    fn omega_limit(&self) -> f64 {
        12.0 * self.cutoff
    }

    fn gaussian(&self, omega: f64) -> f64 {
        (-omega * omega / (2.0 * self.cutoff * self.cutoff)).exp()
    }
}

/// J(ω) = α_p ω³ e^{-ω²/2ω_p²} in ps⁻¹.
pub fn spectral_density(omega: f64, p: &PhononBathParams) -> Result<f64> {
    if omega < 0.0 {
        return Err(PolaronError::NegativeFrequency { omega });
    }
    Ok(p.coupling_ps2 * omega.powi(3) * p.gaussian(omega))
}

/// Bose-Einstein occupation of a mode at `omega` (rad/ps).
pub fn bose_occupation(omega: f64, temperature_k: f64) -> f64 {
    if temperature_k == 0.0 {
        return 0.0;
    }
    let x = HBAR_MEV_PS * omega / (KB_MEV_PER_K * temperature_k);
    1.0 / x.exp_m1()
}

fn quadrature_panels(p: &PhononBathParams, t: f64) -> usize {
    let oscillations = p.omega_limit() * t.abs() / std::f64::consts::PI;
    (oscillations.ceil() as usize).max(12)
}

fn phase_integral(t: f64, p: &PhononBathParams, derivative: bool) -> Complex64 {
    if p.coupling_ps2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let integrand = |w: f64| {
        let (s, c) = (w * t).sin_cos();
        let g = p.gaussian(w);
        let th = p.thermal_weight(w);
        if derivative {
            Complex64::new(-th * w * s, -w * w * c) * g
        } else {
            Complex64::new(th * c, -w * s) * g
        }
    };
    let scale = p.cutoff.powi(if derivative { 3 } else { 2 });
    let v = integrate_adaptive(
        integrand,
        0.0,
        p.omega_limit(),
        quadrature_panels(p, t),
        1e-11,
        1e-12 * scale,
    )
    .expect("smooth phonon integrand converges");
    v * p.coupling_ps2
}

/// φ(t) = ∫₀^∞ J(ω)/ω² [coth(ħω/2k_BT) cos ωt − i sin ωt] dω by direct
/// adaptive quadrature.
pub fn phase_function(t: f64, p: &PhononBathParams) -> Complex64 {
    phase_integral(t, p, false)
}

/// dφ/dt by direct quadrature.
pub fn phase_function_derivative(t: f64, p: &PhononBathParams) -> Complex64 {
    phase_integral(t, p, true)
}

/// C(t) = e^{φ(t) − φ(0)}.
pub fn bath_correlation(t: f64, p: &PhononBathParams) -> Complex64 {
    (phase_function(t, p) - phase_function(0.0, p)).exp()
}

/// ⟨B⟩ = e^{−φ(0)/2}.
pub fn displacement_average(p: &PhononBathParams) -> f64 {
    (-0.5 * phase_function(0.0, p).re).exp()
}

/// Δ_P = ∫₀^∞ J(ω)/ω dω in rad/ps.
pub fn polaron_shift(p: &PhononBathParams) -> f64 {
    if p.coupling_ps2 == 0.0 {
        return 0.0;
    }
    let v = integrate_adaptive(
        |w| Complex64::new(p.coupling_ps2 * w * w * p.gaussian(w), 0.0),
        0.0,
        p.omega_limit(),
        12,
        1e-12,
        0.0,
    )
    .expect("smooth integrand converges");
    v.re
}

/// Polaron Green functions (G_g, G_u) = ⟨B⟩²(cosh φ − 1, sinh φ).
pub fn polaron_green_functions(t: f64, p: &PhononBathParams) -> (Complex64, Complex64) {
    let phi0 = phase_function(0.0, p).re;
    green_from_phase(phase_function(t, p), (-phi0).exp())
}

fn green_from_phase(phi: Complex64, b_squared: f64) -> (Complex64, Complex64) {
    (b_squared * (phi.cosh() - 1.0), b_squared * phi.sinh())
}

/// Phonon bath with φ(t) tabulated for fast repeated evaluation.
///
/// The table stores φ and φ′ on a 5 fs grid and is interpolated with cubic
/// Hermite polynomials. Beyond the table end φ is either negligible (T > 0)
/// or follows its long-time asymptotic series (T = 0).
#[derive(Debug, Clone)]
pub struct PhononBath {
    params: PhononBathParams,
    phi0: f64,
    step: f64,
    values: Vec<Complex64>,
    slopes: Vec<Complex64>,
}

const TABLE_STEP: f64 = 0.005;
const ZERO_T_TABLE_END: f64 = 30.0;
const MAX_TABLE_END: f64 = 200.0;

impl PhononBath {
    pub fn new(params: PhononBathParams) -> Self {
        let phi0 = phase_function(0.0, &params).re;
        if params.coupling_ps2 == 0.0 {
            return Self {
                params,
                phi0,
                step: TABLE_STEP,
                values: vec![],
                slopes: vec![],
            };
        }
        let t_end = if params.temperature_k == 0.0 {
            ZERO_T_TABLE_END
        } else {
            let mut t: f64 = 5.0;
            while t < MAX_TABLE_END {
                let small = 1e-13 * phi0;
                if phase_function(t, &params).norm() < small
                    && phase_function(t + 2.0, &params).norm() < small
                {
                    break;
                }
                t += 5.0;
            }
            t.min(MAX_TABLE_END)
        };
        let n = (t_end / TABLE_STEP).round() as usize + 1;
        let (values, slopes) = (0..n)
            .into_par_iter()
            .map(|i| {
                let t = i as f64 * TABLE_STEP;
                (
                    phase_function(t, &params),
                    phase_function_derivative(t, &params),
                )
            })
            .unzip();
        Self {
            params,
            phi0,
            step: TABLE_STEP,
            values,
            slopes,
        }
    }

    pub fn params(&self) -> &PhononBathParams {
        &self.params
    }

    /// φ(0), real.
    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    pub fn table_end(&self) -> f64 {
        self.values.len().saturating_sub(1) as f64 * self.step
    }

    /// φ(t) for t ≥ 0.
    pub fn phi(&self, t: f64) -> Complex64 {
        if self.values.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let t = t.abs();
        let pos = t / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.tail(t);
        }
        let s = pos - i as f64;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        self.values[i] * h00
            + self.slopes[i] * (h10 * self.step)
            + self.values[i + 1] * h01
            + self.slopes[i + 1] * (h11 * self.step)
    }

    fn tail(&self, t: f64) -> Complex64 {
        if self.params.temperature_k > 0.0 {
            if t > MAX_TABLE_END {
                return phase_function(t, &self.params);
            }
            return Complex64::new(0.0, 0.0);
        }
        // Re φ = α ω_p² (1 − 2x D(x)) with D the Dawson function and
        // x = ω_p t/√2; the imaginary part is Gaussian-small here.
        let x = self.params.cutoff * t / std::f64::consts::SQRT_2;
        let inv = 1.0 / (x * x);
        let series = -inv * (0.5 + inv * (0.75 + inv * (1.875 + inv * 6.5625)));
        Complex64::new(
            self.params.coupling_ps2 * self.params.cutoff.powi(2) * series,
            0.0,
        )
    }

    /// e^{φ(t) − φ(0)}.
    pub fn correlation(&self, t: f64) -> Complex64 {
        (self.phi(t) - self.phi0).exp()
    }

    /// ⟨B⟩ = e^{−φ(0)/2}.
    pub fn mean_displacement(&self) -> f64 {
        (-0.5 * self.phi0).exp()
    }

    pub fn green_functions(&self, t: f64) -> (Complex64, Complex64) {
        green_from_phase(self.phi(t), (-self.phi0).exp())
    }

    pub fn polaron_shift(&self) -> f64 {
        polaron_shift(&self.params)
    }
}

impl PhononBath {
    /// ∫₀^∞ (e^{φ(τ)} − 1) e^{−iντ} dτ, the one-sided transform of the
    /// phonon-sideband part of the polarization correlation.
    pub fn sideband_transform(&self, nu: f64) -> Result<Complex64> {
        if self.params.coupling_ps2 == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        phonon_kernel_integral(|t| self.phi(t).exp() - 1.0, nu)
    }

    /// Sideband transform tabulated on a uniform ν grid for repeated use.
    pub fn sideband_table(&self, half_range: f64, step: f64) -> Result<SidebandTable> {
        let n = (half_range / step).ceil() as usize;
        let nodes: Vec<f64> = (0..=2 * n).map(|i| (i as f64 - n as f64) * step).collect();
        let values = nodes
            .par_iter()
            .map(|&nu| self.sideband_transform(nu))
            .collect::<Result<Vec<_>>>()?;
        let offset = (self.phi0).exp() - 1.0;
        Ok(SidebandTable {
            start: nodes[0],
            step,
            values,
            offset,
        })
    }
}

/// Tabulated sideband transform with four-point Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct SidebandTable {
    start: f64,
    step: f64,
    values: Vec<Complex64>,
    /// e^{φ(0)} − 1, the leading coefficient of the large-ν tail.
    offset: f64,
}

impl SidebandTable {
    pub fn eval(&self, nu: f64) -> Complex64 {
        let pos = (nu - self.start) / self.step;
        let n = self.values.len();
        if pos < 1.0 || pos > (n - 3) as f64 {
            // Leading term of the asymptotic expansion in 1/ν.
            return Complex64::new(0.0, -self.offset / nu);
        }
        let i = pos.floor() as usize;
        let s = pos - i as f64;
        let w = [
            -s * (s - 1.0) * (s - 2.0) / 6.0,
            (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0,
            (s + 1.0) * s * (s - 1.0) / 6.0,
        ];
        self.values[i - 1] * w[0]
            + self.values[i] * w[1]
            + self.values[i + 1] * w[2]
            + self.values[i + 2] * w[3]
    }
}

/// Discrete phonon modes on a uniform midpoint grid, for the hierarchy engine.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedPhononModes {
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub occupations: Vec<f64>,
}

impl DiscretizedPhononModes {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// φ(t) rebuilt from the discrete modes.
    pub fn phase_function(&self, t: f64) -> Complex64 {
        self.frequencies
            .iter()
            .zip(&self.couplings)
            .zip(&self.occupations)
            .map(|((&w, &l), &n)| {
                let (s, c) = (w * t).sin_cos();
                Complex64::new((2.0 * n + 1.0) * c, -s) * (l * l / (w * w))
            })
            .sum()
    }
}

/// Splits (0, ω_max] into `n` equal cells with λ̃_q² = J(ω_q) Δω at the
/// cell midpoints.
pub fn discretize_modes(
    p: &PhononBathParams,
    n: usize,
    omega_max: f64,
) -> Result<DiscretizedPhononModes> {
    if n < 10 {
        return Err(PolaronError::InsufficientModes { n });
    }
    if omega_max < 4.0 * p.cutoff {
        return Err(PolaronError::InvalidParameter {
            name: "phonon.omega_max",
            value: omega_max,
        });
    }
    let dw = omega_max / n as f64;
    let frequencies: Vec<f64> = (0..n).map(|q| (q as f64 + 0.5) * dw).collect();
    let couplings = frequencies
        .iter()
        .map(|&w| (spectral_density(w, p).expect("positive grid") * dw).sqrt())
        .collect();
    let occupations = frequencies
        .iter()
        .map(|&w| bose_occupation(w, p.temperature_k))
        .collect();
    Ok(DiscretizedPhononModes {
        frequencies,
        couplings,
        occupations,
    })
}
