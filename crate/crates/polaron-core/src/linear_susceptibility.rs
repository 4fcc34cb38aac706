//! Semiclassical linear-susceptibility model: the dot polarization decays as
//! e^{−Γ_x t/2} times the normalized phonon phase e^{φ(t)−φ(0)}, and the
//! cavity enters only through its classical response.

use crate::error::{PolaronError, Result};
use crate::phonon_bath::PhononBath;
use crate::photonic_reservoir::LorentzianCavity;
use crate::reservoir_me::ZplRates;
use crate::units_numerics::{
    complex_half_fourier, mev_to_rad_ps, CorrelationTrace, FrequencyGrid, Spectrum,
};
use num_complex::Complex64 as C64;

/// Photon energy of the dot used to turn detunings into absolute frequencies.
pub const DEFAULT_EXCITON_MEV: f64 = 1440.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityParams {
    /// Absolute polaron-shifted exciton frequency ω_x′ (rad/ps).
    pub exciton_frequency: f64,
    /// Γ_x = γ₀ + γ_d (rad/ps).
    pub dephasing: f64,
    pub cavity: LorentzianCavity,
}

impl SusceptibilityParams {
    /// Γ_x from the radiative and pure-dephasing ZPL rates; the pump plays no
    /// part in this model.
    pub fn new(cavity: LorentzianCavity, zpl: &ZplRates) -> Result<Self> {
        let dephasing = zpl.radiative + zpl.dephasing;
        if !(dephasing > 0.0) {
            return Err(PolaronError::ZeroLinewidth);
        }
        Ok(Self {
            exciton_frequency: mev_to_rad_ps(DEFAULT_EXCITON_MEV),
            dephasing,
            cavity,
        })
    }
}

/// Complex response sampled on a detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Susceptibility {
    pub omega: Vec<f64>,
    pub values: Vec<C64>,
}

impl Susceptibility {
    pub fn absorption(&self) -> Spectrum {
        Spectrum::new(
            self.omega.clone(),
            self.values.iter().map(|v| v.im).collect(),
        )
    }
}

/// (e^{φ(t)−φ(0)} − e^{−φ(0)}) e^{−Γt/2}, the part of the seed beyond the
/// zero-phonon exponential.
fn sideband_trace(bath: &PhononBath, gamma: f64) -> Result<CorrelationTrace> {
    const DT: f64 = 0.005;
    const MAX_T: f64 = 300.0;
    let phi0 = bath.phi0();
    let f = |t: f64| ((bath.phi(t) - phi0).exp() - (-phi0).exp()) * (-0.5 * gamma * t).exp();
    let peak = f(0.0).norm();
    let mut t_end: f64 = 5.0;
    while t_end < MAX_T && (f(t_end).norm() > 1e-8 * peak || f(t_end + 1.0).norm() > 1e-8 * peak) {
        t_end += 1.0;
    }
    CorrelationTrace::from_fn(DT, t_end, f)
}

/// χ(δ) = i ∫₀^∞ e^{iδt − Γ_x t/2} e^{φ(t)−φ(0)} dt, which reduces to
/// 1/(−δ − iΓ_x/2) without phonons.
pub fn bare_susceptibility(
    grid: &FrequencyGrid,
    bath: &PhononBath,
    s: &SusceptibilityParams,
) -> Result<Susceptibility> {
    if !(s.dephasing > 0.0) {
        return Err(PolaronError::ZeroLinewidth);
    }
    let points = grid.points();
    let zpl_weight = (-bath.phi0()).exp();
    let mut values: Vec<C64> = points
        .iter()
        .map(|&d| C64::new(0.5 * s.dephasing, -d).inv() * zpl_weight)
        .collect();
    if bath.params().coupling_ps2 != 0.0 {
        let side = complex_half_fourier(&sideband_trace(bath, s.dephasing)?, grid)?;
        for (v, w) in values.iter_mut().zip(side) {
            *v += w;
        }
    }
    values.iter_mut().for_each(|v| *v *= C64::i());
    Ok(Susceptibility {
        omega: points,
        values,
    })
}

/// Σ_ph(ω) obtained by matching the seed to 2ω′/(ω′² − ω² − iωΓ_x − ωΣ)
/// around its own phonon-free limit, so that Σ vanishes without phonons.
pub fn self_energy(chi: &Susceptibility, s: &SusceptibilityParams) -> Vec<C64> {
    let wx = s.exciton_frequency;
    chi.omega
        .iter()
        .zip(&chi.values)
        .map(|(&d, &c)| (C64::new(-d, -0.5 * s.dephasing) - c.inv()) * (2.0 * wx / (wx + d)))
        .collect()
}

/// ω′² − ω² − iωΓ_x − ωΣ(ω), evaluated without forming Σ explicitly.
fn dot_denominator(delta: f64, chi: C64, s: &SusceptibilityParams) -> C64 {
    let wx = s.exciton_frequency;
    let w = wx + delta;
    let bare = C64::new(-delta * (2.0 * wx + delta), -w * s.dephasing);
    bare - (C64::new(-delta, -0.5 * s.dephasing) - chi.inv()) * (2.0 * wx)
}

/// ω_c² − ω² − iωκ.
fn cavity_denominator(delta: f64, s: &SusceptibilityParams) -> C64 {
    let wx = s.exciton_frequency;
    let c = &s.cavity;
    let w = wx + delta;
    C64::new(
        (c.detuning - delta) * (2.0 * wx + c.detuning + delta),
        -w * c.kappa,
    )
}

/// Dot susceptibility dressed by the cavity, full non-rotating-wave form.
pub fn cavity_dressed_susceptibility(
    grid: &FrequencyGrid,
    bath: &PhononBath,
    s: &SusceptibilityParams,
) -> Result<Susceptibility> {
    let chi = bare_susceptibility(grid, bath, s)?;
    let wx = s.exciton_frequency;
    let wc = wx + s.cavity.detuning;
    let g = s.cavity.coupling;
    let values = chi
        .omega
        .iter()
        .zip(&chi.values)
        .map(|(&d, &c)| {
            let den = dot_denominator(d, c, s) - 4.0 * g * g * wx * wc / cavity_denominator(d, s);
            C64::new(2.0 * wx, 0.0) / den
        })
        .collect();
    Ok(Susceptibility {
        omega: chi.omega,
        values,
    })
}

/// Cavity-emitted spectrum κ|2gω_c(ω+ω′)/(ω_c²−ω²−iωκ) / (D_x − 4g²ω′ω_c/(ω_c²−ω²−iωκ))|²,
/// peak normalized.
pub fn cavity_spectrum(
    grid: &FrequencyGrid,
    bath: &PhononBath,
    s: &SusceptibilityParams,
) -> Result<Spectrum> {
    let chi = bare_susceptibility(grid, bath, s)?;
    let wx = s.exciton_frequency;
    let wc = wx + s.cavity.detuning;
    let g = s.cavity.coupling;
    let mut values = Vec::with_capacity(chi.omega.len());
    for (&d, &c) in chi.omega.iter().zip(&chi.values) {
        let cav = cavity_denominator(d, s);
        let den = dot_denominator(d, c, s) - 4.0 * g * g * wx * wc / cav;
        if den.norm() < 1e-300 || cav.norm() < 1e-300 {
            return Err(PolaronError::SingularDenominator { omega: d });
        }
        let amp = C64::new(2.0 * g * wc * (2.0 * wx + d), 0.0) / cav / den;
        values.push(s.cavity.kappa * amp.norm_sqr());
    }
    Ok(Spectrum::new(chi.omega, values).normalized())
}
