//! Photon-reservoir polaron master equation: phonon-dressed spontaneous
//! emission into a structured reservoir and the resulting spectra.

use crate::error::{PolaronError, Result};
use crate::phonon_bath::{PhononBath, SidebandTable};
use crate::photonic_reservoir::PhotonReservoir;
use crate::units_numerics::{
    emission_transform, half_fourier, mev_to_rad_ps, phonon_kernel_integral, uev_to_rad_ps,
    CorrelationTrace, FrequencyGrid, Spectrum,
};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Incoherent zero-phonon-line rates in rad/ps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZplRates {
    pub radiative: f64,
    pub dephasing: f64,
    pub pump: f64,
}

impl ZplRates {
    pub fn from_uev(radiative: f64, dephasing: f64, pump: f64) -> Self {
        Self {
            radiative: uev_to_rad_ps(radiative),
            dephasing: uev_to_rad_ps(dephasing),
            pump: uev_to_rad_ps(pump),
        }
    }

    pub fn total(&self) -> f64 {
        self.radiative + self.dephasing + self.pump
    }
}

/// Spontaneous-emission rate into the reservoir with and without phonons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeRateResult {
    /// Phonon-dressed rate γ̃.
    pub rate: f64,
    pub lamb_shift: f64,
    /// Phonon-free rate γ.
    pub bare_rate: f64,
}

impl SeRateResult {
    /// χ = γ̃/γ.
    pub fn modification(&self) -> f64 {
        self.rate / self.bare_rate
    }
}

/// Which emission rate broadens the zero-phonon line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateModel {
    #[default]
    PhononDressed,
    PhononFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectrumOptions {
    pub rate_model: RateModel,
    /// Shift the zero-phonon line by the reservoir Lamb shift.
    pub include_lamb_shift: bool,
}

const SIDEBAND_TABLE_RANGE_MEV: f64 = 30.0;
const SIDEBAND_TABLE_STEP_MEV: f64 = 0.01;

/// Rate evaluator that caches the phonon sideband transform across
/// reservoir placements.
pub struct RateEvaluator<'a> {
    bath: &'a PhononBath,
    table: OnceLock<SidebandTable>,
}

impl<'a> RateEvaluator<'a> {
    pub fn new(bath: &'a PhononBath) -> Self {
        Self {
            bath,
            table: OnceLock::new(),
        }
    }

    fn table(&self) -> Result<&SidebandTable> {
        if let Some(t) = self.table.get() {
            return Ok(t);
        }
        let t = self.bath.sideband_table(
            mev_to_rad_ps(SIDEBAND_TABLE_RANGE_MEV),
            mev_to_rad_ps(SIDEBAND_TABLE_STEP_MEV),
        )?;
        Ok(self.table.get_or_init(|| t))
    }

    /// γ̃ = 2Re∫₀^∞ C(τ)J_ph(τ)dτ and Δ_Lamb = Im∫₀^∞ C(τ)J_ph(τ)dτ.
    ///
    /// C(τ) = ⟨B⟩²[1 + (e^{φ(τ)} − 1)] splits the integral into the
    /// long-lived Markov part and a sideband part that decays with φ.
    pub fn se_rate(&self, reservoir: &PhotonReservoir) -> Result<SeRateResult> {
        let markov = reservoir.markov_integral()?;
        let b2 = self.bath.mean_displacement().powi(2);
        let sideband = match reservoir {
            PhotonReservoir::Cavity(c) => {
                if self.bath.params().coupling_ps2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let half = 0.5 * c.kappa;
                    c.coupling.powi(2)
                        * phonon_kernel_integral(
                            |t| (self.bath.phi(t).exp() - 1.0) * (-half * t).exp(),
                            c.detuning,
                        )?
                }
            }
            PhotonReservoir::Crow(_) => {
                if self.bath.params().coupling_ps2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let table = self.table()?;
                    reservoir.weighted_integral(|nu| table.eval(nu), 0.0, 1e-8)?
                }
            }
        };
        let dressed = (markov + sideband) * b2;
        Ok(SeRateResult {
            rate: 2.0 * dressed.re,
            lamb_shift: dressed.im,
            bare_rate: 2.0 * markov.re,
        })
    }
}

/// Phonon-dressed spontaneous-emission rate for a single placement.
pub fn se_rate(reservoir: &PhotonReservoir, bath: &PhononBath) -> Result<SeRateResult> {
    RateEvaluator::new(bath).se_rate(reservoir)
}

struct LineShape {
    width: f64,
    center: f64,
}

fn line_shape(zpl: &ZplRates, se: &SeRateResult, options: &SpectrumOptions) -> Result<LineShape> {
    let rate = match options.rate_model {
        RateModel::PhononDressed => se.rate,
        RateModel::PhononFree => se.bare_rate,
    };
    let width = rate + zpl.total();
    if !(width > 0.0) {
        return Err(PolaronError::ZeroLinewidth);
    }
    let center = if options.include_lamb_shift {
        se.lamb_shift
    } else {
        0.0
    };
    Ok(LineShape { width, center })
}

/// (e^{φ(τ)} − 1) e^{−Γτ/2} sampled until it has decayed by eight orders.
fn sideband_trace(
    bath: &PhononBath,
    line: &LineShape,
    conjugate_phase: bool,
) -> Result<CorrelationTrace> {
    const DT: f64 = 0.005;
    const MAX_T: f64 = 300.0;
    let envelope = |t: f64| {
        let rot = if conjugate_phase {
            -line.center
        } else {
            line.center
        };
        (bath.phi(t).exp() - 1.0) * Complex64::new(-0.5 * line.width * t, rot * t).exp()
    };
    let peak = envelope(0.0).norm();
    let mut t_end: f64 = 5.0;
    while t_end < MAX_T
        && (envelope(t_end).norm() > 1e-8 * peak || envelope(t_end + 1.0).norm() > 1e-8 * peak)
    {
        t_end += 1.0;
    }
    CorrelationTrace::from_fn(DT, t_end, envelope)
}

fn lorentzian(delta: f64, line: &LineShape) -> f64 {
    let hw = 0.5 * line.width;
    hw / ((delta - line.center).powi(2) + hw * hw)
}

/// Lab-frame polarization spectrum S₀(δ) = Re∫₀^∞ e^{−Γτ/2} e^{φ(τ)} e^{−iδτ} dτ.
///
/// The zero-phonon Lorentzian is added in closed form; only the sideband
/// part is transformed numerically.
pub fn polarization_spectrum(
    zpl: &ZplRates,
    se: &SeRateResult,
    bath: &PhononBath,
    grid: &FrequencyGrid,
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    let line = line_shape(zpl, se, options)?;
    let mut s = if bath.params().coupling_ps2 == 0.0 {
        Spectrum::new(grid.points(), vec![0.0; grid.len()])
    } else {
        emission_transform(&sideband_trace(bath, &line, false)?, grid)?
    };
    for (v, &w) in s.values.iter_mut().zip(&s.omega) {
        *v += lorentzian(w, &line);
    }
    Ok(s)
}

/// Linear absorption Im χ(δ) ∝ Re∫₀^∞ e^{−Γτ/2} e^{φ(τ)} e^{+iδτ} dτ, the
/// mirror image of the emission about the zero-phonon line.
pub fn absorption_spectrum(
    zpl: &ZplRates,
    se: &SeRateResult,
    bath: &PhononBath,
    grid: &FrequencyGrid,
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    let line = line_shape(zpl, se, options)?;
    let mut s = if bath.params().coupling_ps2 == 0.0 {
        Spectrum::new(grid.points(), vec![0.0; grid.len()])
    } else {
        half_fourier(&sideband_trace(bath, &line, true)?, grid)?
    };
    for (v, &w) in s.values.iter_mut().zip(&s.omega) {
        *v += lorentzian(w, &line);
    }
    Ok(s)
}

/// Detector spectrum S^G(δ) = α_prop(δ) S₀(δ), normalized to unit peak.
#[derive(Debug, Clone)]
pub struct ProjectedSpectrum {
    pub spectrum: Spectrum,
    pub polarization: Spectrum,
    pub rates: SeRateResult,
}

pub fn emission_spectrum_projected(
    reservoir: &PhotonReservoir,
    zpl: &ZplRates,
    bath: &PhononBath,
    grid: &FrequencyGrid,
    options: &SpectrumOptions,
) -> Result<ProjectedSpectrum> {
    let rates = se_rate(reservoir, bath)?;
    project(reservoir, zpl, bath, grid, options, rates)
}

/// Same as [`emission_spectrum_projected`] with precomputed rates.
pub fn project(
    reservoir: &PhotonReservoir,
    zpl: &ZplRates,
    bath: &PhononBath,
    grid: &FrequencyGrid,
    options: &SpectrumOptions,
    rates: SeRateResult,
) -> Result<ProjectedSpectrum> {
    let polarization = polarization_spectrum(zpl, &rates, bath, grid, options)?;
    let values = polarization
        .omega
        .iter()
        .zip(&polarization.values)
        .map(|(&w, &s)| reservoir.propagator(w) * s)
        .collect();
    let spectrum = Spectrum::new(polarization.omega.clone(), values).normalized();
    Ok(ProjectedSpectrum {
        spectrum,
        polarization,
        rates,
    })
}
