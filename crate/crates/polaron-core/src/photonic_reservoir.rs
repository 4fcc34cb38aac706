//! Structured photon reservoirs: a Lorentzian cavity and a coupled-resonator
//! waveguide band.
//!
//! Frequencies are offsets ν = ω − ω_x′ from the polaron-shifted exciton
//! frequency, in rad/ps.

use crate::error::Result;
use crate::units_numerics::{integrate_adaptive, mev_to_rad_ps, uev_to_rad_ps};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Single-mode cavity with FWHM `kappa`, detuned by `detuning` = ω_c − ω_x′.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianCavity {
    pub detuning: f64,
    pub kappa: f64,
    pub coupling: f64,
}

/// How the damping of the band edges enters the complexified edges ω̃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeShift {
    /// ω̃ = ω + iκ: κ broadens the edge singularity.
    #[default]
    Damping,
    /// ω̃ = ω + κ: κ only moves the edge.
    Real,
}

/// Tight-binding waveguide band between `lower_edge` and `upper_edge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrowBand {
    pub lower_edge: f64,
    pub upper_edge: f64,
    pub lower_damping: f64,
    pub upper_damping: f64,
    pub coupling: f64,
    /// Absolute optical frequency of the band center (rad/ps).
    pub carrier: f64,
    pub edge_shift: EdgeShift,
}

/// Full width of the default band.
pub const CROW_BANDWIDTH_MEV: f64 = 8.0;
/// Spectral FWHM of the default mode-edge peaks.
pub const CROW_EDGE_WIDTH_UEV: f64 = 14.0;
/// Default QD-waveguide coupling.
pub const CROW_COUPLING_UEV: f64 = 85.0;
/// Default emitter photon energy.
pub const OPTICAL_ENERGY_MEV: f64 = 1440.0;

impl CrowBand {
    /// Default band whose center sits `center_offset` from the exciton.
    pub fn standard(center_offset: f64) -> Self {
        let half = 0.5 * mev_to_rad_ps(CROW_BANDWIDTH_MEV);
        let damping = edge_damping_for_width(uev_to_rad_ps(CROW_EDGE_WIDTH_UEV));
        Self {
            lower_edge: center_offset - half,
            upper_edge: center_offset + half,
            lower_damping: damping,
            upper_damping: damping,
            coupling: uev_to_rad_ps(CROW_COUPLING_UEV),
            carrier: mev_to_rad_ps(OPTICAL_ENERGY_MEV),
            edge_shift: EdgeShift::Damping,
        }
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower_edge + self.upper_edge)
    }

    fn edges(&self) -> (Complex64, Complex64) {
        match self.edge_shift {
            EdgeShift::Damping => (
                Complex64::new(self.lower_edge, self.lower_damping),
                Complex64::new(self.upper_edge, self.upper_damping),
            ),
            EdgeShift::Real => (
                Complex64::new(self.lower_edge + self.lower_damping, 0.0),
                Complex64::new(self.upper_edge + self.upper_damping, 0.0),
            ),
        }
    }

    /// Re[1/√((ν − ω̃_l*)(ω̃_u − ν))], the normalized density of states.
    fn density_of_states(&self, nu: f64) -> f64 {
        let (lo, up) = self.edges();
        let z = (nu - lo.conj()) * (up - nu);
        if z == Complex64::new(0.0, 0.0) {
            return f64::INFINITY;
        }
        (1.0 / z.sqrt()).re / PI
    }
}

/// Edge damping whose propagator peak has the requested FWHM: the edge
/// factor 1/|ν − ω_e − iκ| falls to half at |ν − ω_e| = √3 κ.
pub fn edge_damping_for_width(fwhm: f64) -> f64 {
    fwhm / (2.0 * 3f64.sqrt())
}

/// QD-waveguide coupling g = (d²ω₀ / 2ħε₀εV)^{1/2} in rad/ps, from the dipole
/// moment in Debye, the band-center photon energy in meV, the background
/// refractive index and the mode volume in m³.
pub fn coupling_from_dipole(dipole_debye: f64, energy_mev: f64, index: f64, volume_m3: f64) -> f64 {
    const DEBYE_C_M: f64 = 3.33564e-30;
    const HBAR_J_S: f64 = 1.054571817e-34;
    const EPS0: f64 = 8.8541878128e-12;
    let d = dipole_debye * DEBYE_C_M;
    let omega = mev_to_rad_ps(energy_mev) * 1e12;
    let g = (d * d * omega / (2.0 * HBAR_J_S * EPS0 * index * index * volume_m3)).sqrt();
    g * 1e-12
}

/// Spontaneous-emission rate of the dot in the unstructured host medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundDecay {
    pub rate: f64,
}

impl BackgroundDecay {
    /// γ_b = d²√ε ω³ / (6πħε₀c³) for a dipole in Debye at a photon energy in meV.
    pub fn from_dipole(dipole_debye: f64, index: f64, energy_mev: f64) -> Self {
        const DEBYE_C_M: f64 = 3.33564e-30;
        const HBAR_J_S: f64 = 1.054571817e-34;
        const EPS0: f64 = 8.8541878128e-12;
        const C: f64 = 299_792_458.0;
        let d = dipole_debye * DEBYE_C_M;
        let omega = mev_to_rad_ps(energy_mev) * 1e12;
        let rate = d * d * index * omega.powi(3) / (6.0 * PI * HBAR_J_S * EPS0 * C.powi(3));
        Self { rate: rate * 1e-12 }
    }
}

/// A structured photon bath seen by the dot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonReservoir {
    Cavity(LorentzianCavity),
    Crow(CrowBand),
}

impl PhotonReservoir {
    pub fn coupling(&self) -> f64 {
        match self {
            PhotonReservoir::Cavity(c) => c.coupling,
            PhotonReservoir::Crow(b) => b.coupling,
        }
    }

    /// Same structure seen by a dot moved by `shift` (rad/ps).
    pub fn with_dot_shift(&self, shift: f64) -> Self {
        match *self {
            PhotonReservoir::Cavity(c) => PhotonReservoir::Cavity(LorentzianCavity {
                detuning: c.detuning - shift,
                ..c
            }),
            PhotonReservoir::Crow(b) => PhotonReservoir::Crow(CrowBand {
                lower_edge: b.lower_edge - shift,
                upper_edge: b.upper_edge - shift,
                ..b
            }),
        }
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        match *self {
            PhotonReservoir::Cavity(c) => {
                PhotonReservoir::Cavity(LorentzianCavity { coupling, ..c })
            }
            PhotonReservoir::Crow(b) => PhotonReservoir::Crow(CrowBand { coupling, ..b }),
        }
    }

    /// J_ph(ν) in rad/ps.
    pub fn spectral_function(&self, nu: f64) -> f64 {
        match self {
            PhotonReservoir::Cavity(c) => {
                let hw = 0.5 * c.kappa;
                c.coupling.powi(2) / PI * hw / ((nu - c.detuning).powi(2) + hw * hw)
            }
            PhotonReservoir::Crow(b) => b.coupling.powi(2) * b.density_of_states(nu),
        }
    }

    /// Frequency window carrying the reservoir weight.
    pub fn support(&self) -> (f64, f64) {
        match self {
            PhotonReservoir::Cavity(c) => {
                (c.detuning - 20.0 * c.kappa, c.detuning + 20.0 * c.kappa)
            }
            PhotonReservoir::Crow(b) => {
                let pad = 20.0 * b.lower_damping.max(b.upper_damping) + mev_to_rad_ps(10.0);
                (b.lower_edge - pad, b.upper_edge + pad)
            }
        }
    }

    /// Points where the spectral function varies on the damping scale.
    fn breakpoints(&self) -> Vec<f64> {
        let (a, z) = self.support();
        match self {
            PhotonReservoir::Cavity(c) => {
                vec![a, c.detuning - 2.0 * c.kappa, c.detuning + 2.0 * c.kappa, z]
            }
            PhotonReservoir::Crow(b) => {
                let wl = 20.0 * b.lower_damping;
                let wu = 20.0 * b.upper_damping;
                vec![
                    a,
                    b.lower_edge - wl,
                    b.lower_edge + wl,
                    b.upper_edge - wu,
                    b.upper_edge + wu,
                    z,
                ]
            }
        }
    }

    /// ∫ f(ν) J_ph(ν) dν over the support, split at the sharp features.
    pub fn weighted_integral<F: Fn(f64) -> Complex64>(
        &self,
        f: F,
        oscillation: f64,
        rtol: f64,
    ) -> Result<Complex64> {
        let pts = self.breakpoints();
        let mut total = Complex64::new(0.0, 0.0);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let panels = ((b - a) * oscillation.abs() / PI).ceil() as usize + 4;
            let scale = self.coupling().powi(2) * 1e-13;
            total += integrate_adaptive(
                |nu| f(nu) * self.spectral_function(nu),
                a,
                b,
                panels,
                rtol,
                scale,
            )?;
        }
        Ok(total)
    }

    /// Bath correlation J_ph(τ) = ∫ J_ph(ν) e^{−iντ} dν.
    pub fn correlation(&self, tau: f64) -> Result<Complex64> {
        match self {
            PhotonReservoir::Cavity(c) => {
                Ok(c.coupling.powi(2)
                    * Complex64::new(-0.5 * c.kappa * tau, -c.detuning * tau).exp())
            }
            PhotonReservoir::Crow(_) => {
                self.weighted_integral(|nu| Complex64::from_polar(1.0, -nu * tau), tau, 1e-9)
            }
        }
    }

    /// ∫₀^∞ J_ph(τ) dτ = π J_ph(0) − i P∫ J_ph(ν)/ν dν.
    pub fn markov_integral(&self) -> Result<Complex64> {
        match self {
            PhotonReservoir::Cavity(c) => {
                Ok(c.coupling.powi(2) / Complex64::new(0.5 * c.kappa, c.detuning))
            }
            PhotonReservoir::Crow(_) => {
                let j0 = self.spectral_function(0.0);
                let (a, b) = self.support();
                let pv = if a < 0.0 && b > 0.0 {
                    self.principal_value_around_origin(j0, a, b)?
                } else {
                    self.weighted_integral(|nu| Complex64::new(1.0 / nu, 0.0), 0.0, 1e-9)?
                        .re
                };
                Ok(Complex64::new(PI * j0, -pv))
            }
        }
    }

    fn principal_value_around_origin(&self, j0: f64, a: f64, b: f64) -> Result<f64> {
        let mut pts = self.breakpoints();
        pts.push(0.0);
        pts.sort_by(f64::total_cmp);
        // Subtracting J_ph(0) leaves an integrand that is regular at ν = 0.
        let mut total = j0 * (b / -a).ln();
        for w in pts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let v = integrate_adaptive(
                |nu| {
                    if nu == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new((self.spectral_function(nu) - j0) / nu, 0.0)
                    }
                },
                w[0],
                w[1],
                8,
                1e-9,
                self.coupling().powi(2) * 1e-13,
            )?;
            total += v.re;
        }
        Ok(total)
    }

    /// Phonon-free golden-rule rate 2π J_ph(0).
    pub fn bare_rate(&self) -> f64 {
        2.0 * PI * self.spectral_function(0.0)
    }

    /// Relative propagation factor from the dot to a detector.
    pub fn propagator(&self, nu: f64) -> f64 {
        match self {
            PhotonReservoir::Cavity(c) => {
                let hw = 0.5 * c.kappa;
                hw / ((nu - c.detuning).powi(2) + hw * hw)
            }
            PhotonReservoir::Crow(b) => {
                let (lo, up) = b.edges();
                let omega = b.carrier + nu - b.center();
                let denom = (nu - lo.conj()) * (nu - up);
                1.0 / (omega * omega * denom.norm())
            }
        }
    }

    /// Purcell factor at a dot offset `nu` from the current placement.
    pub fn purcell_factor(&self, nu: f64, background: &BackgroundDecay) -> f64 {
        self.with_dot_shift(nu).bare_rate() / background.rate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units_numerics::rad_ps_to_uev;
    use proptest::prelude::*;

    fn cavity(detuning_mev: f64, kappa_uev: f64, g_uev: f64) -> PhotonReservoir {
        PhotonReservoir::Cavity(LorentzianCavity {
            detuning: mev_to_rad_ps(detuning_mev),
            kappa: uev_to_rad_ps(kappa_uev),
            coupling: uev_to_rad_ps(g_uev),
        })
    }

    fn crow() -> (CrowBand, PhotonReservoir) {
        let b = CrowBand::standard(0.0);
        (b, PhotonReservoir::Crow(b))
    }

    #[test]
    fn cavity_spectral_function_peak() {
        let r = cavity(0.0, 65.0, 100.0);
        let (g, k) = (uev_to_rad_ps(100.0), uev_to_rad_ps(65.0));
        assert!((r.spectral_function(0.0) - 2.0 * g * g / (PI * k)).abs() < 1e-12);
        assert!((rad_ps_to_uev(r.bare_rate()) - 615.38).abs() < 0.05);
    }

    #[test]
    fn cavity_correlation_weight_and_decay() {
        let r = cavity(0.3, 65.0, 100.0);
        let g2 = uev_to_rad_ps(100.0).powi(2);
        assert!((r.correlation(0.0).unwrap().re - g2).abs() < 1e-3 * g2);
        let k = uev_to_rad_ps(65.0);
        let t = 7.0;
        assert!((r.correlation(t).unwrap().norm() - g2 * (-0.5 * k * t).exp()).abs() < 1e-12);
    }

    #[test]
    fn crow_sum_rule() {
        let (b, r) = crow();
        let weight = r.correlation(0.0).unwrap();
        let g2 = b.coupling.powi(2);
        assert!((weight.re - g2).abs() < 0.01 * g2, "{}", weight.re / g2);
        assert!(weight.im.abs() < 1e-9 * g2);
    }

    #[test]
    fn crow_correlation_beats_at_half_bandwidth() {
        let (b, r) = crow();
        let width = b.upper_edge - b.lower_edge;
        let taus: Vec<f64> = (0..=400).map(|i| 2.0 + i as f64 * 0.01).collect();
        let re: Vec<f64> = taus.iter().map(|&t| r.correlation(t).unwrap().re).collect();
        let crossings: Vec<f64> = (1..re.len())
            .filter(|&i| re[i - 1].signum() != re[i].signum())
            .map(|i| taus[i - 1] + 0.01 * re[i - 1] / (re[i - 1] - re[i]))
            .collect();
        let spacing =
            (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        let expected = 2.0 * PI / width;
        assert!(
            (spacing - expected).abs() < 0.02 * expected,
            "{spacing} vs {expected}"
        );
    }

    #[test]
    fn cavity_propagator_shape() {
        let r = cavity(0.5, 65.0, 100.0);
        let (d, k) = (mev_to_rad_ps(0.5), uev_to_rad_ps(65.0));
        assert!((r.propagator(d) - 2.0 / k).abs() < 1e-12 * (2.0 / k));
        assert!((r.propagator(d + 0.5 * k) - 1.0 / k).abs() < 1e-12 / k);
        assert!((r.propagator(d - 0.5 * k) - 1.0 / k).abs() < 1e-12 / k);
    }

    #[test]
    fn cavity_propagator_tracks_spectral_function() {
        let r = cavity(-1.0, 180.0, 100.0);
        let ratio0 = r.propagator(0.0) / r.spectral_function(0.0);
        for i in 0..200 {
            let nu = mev_to_rad_ps(-5.0 + 0.05 * i as f64);
            let ratio = r.propagator(nu) / r.spectral_function(nu);
            assert!((ratio / ratio0 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn crow_propagator_has_dominant_edges() {
        let (b, r) = crow();
        let interior = r.propagator(b.center());
        assert!(r.propagator(b.upper_edge) > 10.0 * interior);
        assert!(r.propagator(b.lower_edge) > 10.0 * interior);
    }

    #[test]
    fn crow_spectral_function_decays_outside_band() {
        let (b, r) = crow();
        let k = b.upper_damping;
        let mut prev = r.spectral_function(b.upper_edge + 3.0 * k);
        for i in 1..500 {
            let v = r.spectral_function(b.upper_edge + 3.0 * k + i as f64 * 0.01);
            assert!(v <= prev);
            prev = v;
        }
        let mut prev = r.spectral_function(b.lower_edge - 3.0 * k);
        for i in 1..500 {
            let v = r.spectral_function(b.lower_edge - 3.0 * k - i as f64 * 0.01);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn purcell_factors() {
        let bg = BackgroundDecay::from_dipole(50.0, 3.4, OPTICAL_ENERGY_MEV);
        let r = cavity(0.0, 65.0, 100.0);
        let (g, k) = (uev_to_rad_ps(100.0), uev_to_rad_ps(65.0));
        assert!(
            (r.purcell_factor(0.0, &bg) - 4.0 * g * g / k / bg.rate).abs()
                < 1e-9 * r.purcell_factor(0.0, &bg)
        );
        let far = cavity(2.0, 65.0, 100.0);
        assert!((rad_ps_to_uev(far.bare_rate()) - 0.1624).abs() < 1e-4);
        let (b, r) = crow();
        let edge = r.purcell_factor(b.upper_edge, &bg);
        let center = r.purcell_factor(b.center(), &bg);
        assert!(edge / center > 5.0);
    }

    #[test]
    fn dipole_coupling_matches_quoted_value() {
        let g = coupling_from_dipole(50.0, OPTICAL_ENERGY_MEV, 3.4, 0.175e-18);
        assert!((rad_ps_to_uev(g) - CROW_COUPLING_UEV).abs() < 0.03 * CROW_COUPLING_UEV);
    }

    #[test]
    fn markov_integral_real_part_is_golden_rule() {
        let (_, r) = crow();
        for shift_mev in [-4.3, -1.0, 0.0, 2.0, 3.7, 5.0] {
            let moved = r.with_dot_shift(mev_to_rad_ps(shift_mev));
            let m = moved.markov_integral().unwrap();
            assert!((2.0 * m.re - moved.bare_rate()).abs() < 1e-12 * moved.bare_rate().max(1e-30));
            assert!(m.im.is_finite());
        }
    }

    proptest! {
        #[test]
        fn spectral_functions_are_nonnegative(nu in -20.0f64..20.0, center in -6.0f64..6.0, kl in 0.001f64..0.1, ku in 0.001f64..0.1) {
            let b = CrowBand { lower_damping: kl, upper_damping: ku, ..CrowBand::standard(center) };
            prop_assert!(PhotonReservoir::Crow(b).spectral_function(nu) >= 0.0);
            prop_assert!(cavity(center * 0.5, 65.0, 100.0).spectral_function(nu) >= 0.0);
        }

        #[test]
        fn spectral_function_scales_with_coupling_squared(nu in -8.0f64..8.0, g in 0.01f64..0.5) {
            for r in [cavity(0.7, 120.0, 50.0), crow().1] {
                let scaled = r.with_coupling(2.0 * g);
                let base = r.with_coupling(g);
                let (a, b) = (scaled.spectral_function(nu), 4.0 * base.spectral_function(nu));
                prop_assert!((a - b).abs() <= 1e-12 * b);
            }
        }
    }
}
