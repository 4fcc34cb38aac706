//! Cavity-QED polaron master equation for a dot coupled to one lossy mode.
//!
//! Frequencies are measured from the polaron-shifted exciton ω_x′; the
//! cavity sits at `detuning` = ω_c − ω_x′.

mod master_equation;

pub use master_equation::{
    build_liouvillian, cavity_lowering, exciton_lowering, DensityMatrix, Liouvillian, Operator,
    BASIS_DIM,
};

use crate::error::{PolaronError, Result};
use crate::phonon_bath::PhononBath;
use crate::photonic_reservoir::LorentzianCavity;
use crate::reservoir_me::ZplRates;
use crate::units_numerics::{phonon_kernel_integral, FrequencyGrid, Spectrum};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Phonon-mediated scattering rates and couplings of the weak-excitation
/// master equation, all in rad/ps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    /// Exciton → cavity scattering Γ^{a†σ⁻}.
    pub to_cavity: f64,
    /// Cavity → exciton scattering Γ^{σ⁺a}.
    pub to_exciton: f64,
    /// Lamb shift Δ^{a†σ⁻} paired with `to_cavity`.
    pub to_cavity_shift: f64,
    /// Lamb shift Δ^{σ⁺a} paired with `to_exciton`.
    pub to_exciton_shift: f64,
    pub cross_dephasing: Complex64,
    pub m1: Complex64,
    pub m2: Complex64,
    /// g′ = ⟨B⟩g.
    pub dressed_coupling: f64,
    /// Ω = √(Δ² + 4g′²).
    pub rabi: f64,
}

/// Weak-coupling limit of the scattering rates and shifts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakCouplingRates {
    pub to_cavity: f64,
    pub to_exciton: f64,
    pub to_cavity_shift: f64,
    pub to_exciton_shift: f64,
}

/// Damping rates and complex couplings of the linear equations for ⟨a⟩, ⟨σ⁻⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveBlochCoefficients {
    pub cavity_damping: f64,
    pub exciton_damping: f64,
    pub cavity_coupling: Complex64,
    pub exciton_coupling: Complex64,
}

impl EffectiveBlochCoefficients {
    pub fn new(rates: &RateSet, cav: &LorentzianCavity, zpl: &ZplRates) -> Self {
        let g = rates.dressed_coupling;
        Self {
            cavity_damping: cav.kappa + rates.to_exciton,
            exciton_damping: zpl.total() + rates.to_cavity,
            cavity_coupling: I * g - rates.m1 - rates.m2,
            exciton_coupling: I * g + rates.m1 - rates.m2,
        }
    }
}

/// One-sided transforms of the four phonon kernels built from φ(τ).
struct PhononKernels<'a> {
    bath: &'a PhononBath,
}

#[derive(Clone, Copy)]
enum Kernel {
    /// e^{φ} − 1
    Emission,
    /// e^{−φ} − 1
    Reversed,
    /// cosh φ − 1
    Even,
    /// sinh φ
    Odd,
}

impl PhononKernels<'_> {
    /// ∫₀^∞ k(τ) e^{−iδτ} dτ.
    fn transform(&self, kind: Kernel, delta: f64) -> Result<Complex64> {
        if self.bath.params().coupling_ps2 == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let bath = self.bath;
        match kind {
            Kernel::Emission => phonon_kernel_integral(|t| bath.phi(t).exp() - 1.0, delta),
            Kernel::Reversed => phonon_kernel_integral(|t| (-bath.phi(t)).exp() - 1.0, delta),
            Kernel::Even => phonon_kernel_integral(|t| bath.phi(t).cosh() - 1.0, delta),
            Kernel::Odd => phonon_kernel_integral(|t| bath.phi(t).sinh(), delta),
        }
    }

    /// (∫k, ∫k cos Ωτ, ∫k sin Ωτ).
    fn moments(&self, kind: Kernel, rabi: f64) -> Result<(Complex64, Complex64, Complex64)> {
        let zero = self.transform(kind, 0.0)?;
        let plus = self.transform(kind, rabi)?;
        let minus = self.transform(kind, -rabi)?;
        Ok((zero, 0.5 * (plus + minus), (minus - plus) / (2.0 * I)))
    }
}

/// Scattering rates, Lamb shifts, cross dephasing and M couplings for a
/// dot in a single-mode cavity.
pub fn scattering_rates(cav: &LorentzianCavity, bath: &PhononBath) -> Result<RateSet> {
    let g = bath.mean_displacement() * cav.coupling;
    let delta = cav.detuning;
    let rabi = (delta * delta + 4.0 * g * g).sqrt();
    if !(rabi > 0.0) {
        return Err(PolaronError::InvalidParameter {
            name: "rabi_frequency",
            value: rabi,
        });
    }
    if g == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        return Ok(RateSet {
            to_cavity: 0.0,
            to_exciton: 0.0,
            to_cavity_shift: 0.0,
            to_exciton_shift: 0.0,
            cross_dephasing: zero,
            m1: zero,
            m2: zero,
            dressed_coupling: 0.0,
            rabi,
        });
    }
    let k = PhononKernels { bath };
    let (ep, ep_cos, ep_sin) = k.moments(Kernel::Emission, rabi)?;
    let (em, em_cos, em_sin) = k.moments(Kernel::Reversed, rabi)?;
    let (ev, ev_cos, _) = k.moments(Kernel::Even, rabi)?;
    let (_, _, od_sin) = k.moments(Kernel::Odd, rabi)?;

    let g2 = g * g;
    let r = 2.0 * g2 / (rabi * rabi);
    let tilt = delta / rabi;
    // ∫[r(1 − cos)(e^{−φ} − 1) + (r(1 − cos) + cos)(e^{φ} − 1)]
    let common = r * (em - em_cos) + r * (ep - ep_cos) + ep_cos;
    let odd = tilt * ep_sin;
    let cross = r * (em - em_cos) + em_cos + r * (ep - ep_cos);

    Ok(RateSet {
        to_cavity: 2.0 * g2 * (common.re + odd.im),
        to_exciton: 2.0 * g2 * (common.re - odd.im),
        to_cavity_shift: g2 * (common.im - odd.re),
        to_exciton_shift: g2 * (common.im + odd.re),
        cross_dephasing: Complex64::new(2.0 * g2 * cross.re, -2.0 * g2 * (tilt * em_sin).re),
        m1: -2.0 * g2 * (g * delta / (rabi * rabi)) * (ev_cos - ev),
        m2: -2.0 * I * g2 * (g / rabi) * od_sin,
        dressed_coupling: g,
        rabi,
    })
}

/// Scattering rates in the limit Δ ≫ g′ where Ω → Δ.
pub fn weak_coupling_rates(cav: &LorentzianCavity, bath: &PhononBath) -> Result<WeakCouplingRates> {
    let g = bath.mean_displacement() * cav.coupling;
    let k = PhononKernels { bath };
    let down = k.transform(Kernel::Emission, cav.detuning)?;
    let up = k.transform(Kernel::Emission, -cav.detuning)?;
    let g2 = g * g;
    Ok(WeakCouplingRates {
        to_cavity: 2.0 * g2 * down.re,
        to_exciton: 2.0 * g2 * up.re,
        to_cavity_shift: g2 * down.im,
        to_exciton_shift: g2 * up.im,
    })
}

/// Form of the cavity-mediated decay rate built from the scattering rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PurcellForm {
    /// Cavity Lorentzian of width κ.
    #[default]
    CavityWidth,
    /// Width corrected by Γ₀^{σ⁺a} − Γ₀^{a†σ⁻}.
    ScatteringCorrected,
}

/// Spontaneous-emission rate from the weak-coupling scattering rates:
/// cavity feeding plus the Purcell rate with g → g′.
pub fn gamma_tilde_p(cav: &LorentzianCavity, bath: &PhononBath, form: PurcellForm) -> Result<f64> {
    let w = weak_coupling_rates(cav, bath)?;
    let g = bath.mean_displacement() * cav.coupling;
    let half = match form {
        PurcellForm::CavityWidth => 0.5 * cav.kappa,
        PurcellForm::ScatteringCorrected => 0.5 * (cav.kappa + w.to_exciton - w.to_cavity),
    };
    Ok(w.to_cavity + 2.0 * g * g * half / (cav.detuning.powi(2) + half * half))
}

/// Weak-excitation steady-state moments ⟨a†a⟩ and ⟨a†σ⁻⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakExcitationMoments {
    pub photon_number: f64,
    pub coherence: Complex64,
}

pub fn weak_excitation_moments(
    rates: &RateSet,
    cav: &LorentzianCavity,
    zpl: &ZplRates,
) -> Result<WeakExcitationMoments> {
    let b = EffectiveBlochCoefficients::new(rates, cav, zpl);
    let g = rates.dressed_coupling;
    let (m1, m2, gcd) = (rates.m1, rates.m2, rates.cross_dephasing);
    let total = b.exciton_damping + b.cavity_damping;
    let net = cav.detuning + rates.to_exciton_shift - rates.to_cavity_shift;
    let g1 = Complex64::new(2.0 * m1.re, -(g - 2.0 * m2.im));
    let g3 = Complex64::new(2.0 * m2.re, -(g + 2.0 * m1.im));
    let g4 = Complex64::new(2.0 * m2.re, g - 2.0 * m1.im);
    let phase = Complex64::new(0.5 * total, net);
    let n1 = gcd.conj() * g3.conj() + g3 * phase;
    let n2 = gcd.conj() * g4.conj() + g4 * phase;
    let q = net * net - gcd.norm_sqr() + 0.25 * total * total;
    let loss = zpl.pump + zpl.radiative;
    let mix = n1 * loss - cav.kappa * n2;
    let denom = q * (b.cavity_damping * loss + cav.kappa * rates.to_cavity) - 2.0 * (g1 * mix).re;
    if denom.abs() < f64::MIN_POSITIVE || loss * q == 0.0 {
        return Err(PolaronError::SingularDenominator { omega: 0.0 });
    }
    let photon_number = zpl.pump * (q * rates.to_cavity + 2.0 * (g1 * n2).re) / denom;
    let coherence = (mix * photon_number + zpl.pump * n2) / (loss * q);
    Ok(WeakExcitationMoments {
        photon_number,
        coherence,
    })
}

/// Splitting of the two dressed resonances, the real parts of the roots
/// of D(ω)C(ω) + g_c g_x = 0.
pub fn polariton_splitting(rates: &RateSet, cav: &LorentzianCavity, zpl: &ZplRates) -> f64 {
    let b = EffectiveBlochCoefficients::new(rates, cav, zpl);
    let exciton = Complex64::new(rates.to_cavity_shift, -0.5 * b.exciton_damping);
    let cavity = Complex64::new(
        cav.detuning + rates.to_exciton_shift,
        -0.5 * b.cavity_damping,
    );
    let half_gap =
        (0.25 * (exciton - cavity).powi(2) - b.cavity_coupling * b.exciton_coupling).sqrt();
    (2.0 * half_gap.re).abs()
}

/// Analytic weak-excitation cavity spectrum, peak-normalized.
pub fn wea_spectrum(
    cav: &LorentzianCavity,
    bath: &PhononBath,
    zpl: &ZplRates,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    if !(zpl.pump > 0.0) {
        return Err(PolaronError::InvalidParameter {
            name: "pump",
            value: zpl.pump,
        });
    }
    let rates = scattering_rates(cav, bath)?;
    wea_spectrum_from_rates(&rates, cav, zpl, grid)
}

pub fn wea_spectrum_from_rates(
    rates: &RateSet,
    cav: &LorentzianCavity,
    zpl: &ZplRates,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    let b = EffectiveBlochCoefficients::new(rates, cav, zpl);
    let m = weak_excitation_moments(rates, cav, zpl)?;
    let coupling = b.cavity_coupling * b.exciton_coupling;
    let eval = |w: f64| {
        let d = Complex64::new(w - rates.to_cavity_shift, 0.5 * b.exciton_damping);
        let c = Complex64::new(
            w - cav.detuning - rates.to_exciton_shift,
            0.5 * b.cavity_damping,
        );
        let den = d * c + coupling;
        (
            I * m.photon_number * d + b.cavity_coupling * m.coherence,
            den,
        )
    };
    for w in grid.points() {
        if eval(w).1.norm() < 1e-300 {
            return Err(PolaronError::SingularDenominator { omega: w });
        }
    }
    Ok(Spectrum::from_fn(grid, |w| {
        let (num, den) = eval(w);
        (num / den).re
    })
    .normalized())
}
