//! Peak finding, cross-engine comparison, CROW feeding ratios and the
//! figure runners built on top of the engines.

mod figures;

pub use figures::{
    map_table, run_figure, CaptionParams, CsvTable, FigureBundle, FigureName, FigureOptions,
    WEAK_PUMP_UEV,
};

use crate::correlation_expansion::{two_time_spectrum, HierarchyConfig, InitialCondition};
use crate::cqed_me::{build_liouvillian, wea_spectrum};
use crate::error::{PolaronError, Result};
use crate::linear_susceptibility::{cavity_spectrum, SusceptibilityParams};
use crate::phonon_bath::{discretize_modes, PhononBath, PhononBathParams};
use crate::photonic_reservoir::{CrowBand, PhotonReservoir};
use crate::reservoir_me::{
    emission_spectrum_projected, polarization_spectrum, RateEvaluator, RateModel, SpectrumOptions,
    ZplRates,
};
use crate::units_numerics::{rad_ps_to_mev, uev_to_rad_ps, FrequencyGrid, Spectrum};
use rayon::prelude::*;
use std::str::FromStr;

/// Local maxima below this fraction of the global maximum are ignored.
pub const PEAK_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Position in rad/ps.
    pub position: f64,
    /// Height relative to the tallest peak.
    pub height: f64,
}

/// Peaks of a spectrum plus, for waveguide spectra, the intensities at the
/// zero-phonon line (I₀) and the upper (U₀) and lower (L₀) mode edges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub zpl: Option<f64>,
    pub upper_edge: Option<f64>,
    pub lower_edge: Option<f64>,
}

impl PeakReport {
    pub fn count(&self) -> usize {
        self.peaks.len()
    }

    pub fn positions_mev(&self) -> Vec<f64> {
        self.peaks
            .iter()
            .map(|p| rad_ps_to_mev(p.position))
            .collect()
    }

    pub fn heights(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.height).collect()
    }
}

/// Vertex of the parabola through three points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d0 = (y[1] - y[0]) / (x[1] - x[0]);
    let d1 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d1 - d0) / (x[2] - x[0]);
    if curvature >= 0.0 {
        return (x[1], y[1]);
    }
    let xv = 0.5 * (x[0] + x[1]) - d0 / (2.0 * curvature);
    let xv = xv.clamp(x[0], x[2]);
    let yv = y[1] + (xv - x[1]) * (d0 + curvature * (xv - x[0]));
    (xv, yv)
}

/// Local maxima above [`PEAK_THRESHOLD`] of the global maximum, refined by
/// a parabola through each maximum and its neighbours.
pub fn find_peaks(s: &Spectrum) -> PeakReport {
    let n = s.values.len();
    let top = s.max_value();
    if n < 3 || !(top > 0.0) {
        return PeakReport::default();
    }
    let mut peaks: Vec<Peak> = (1..n - 1)
        .filter(|&i| {
            let v = s.values[i];
            v > s.values[i - 1] && v >= s.values[i + 1] && v > PEAK_THRESHOLD * top
        })
        .map(|i| {
            let (position, height) = parabola_vertex(
                [s.omega[i - 1], s.omega[i], s.omega[i + 1]],
                [s.values[i - 1], s.values[i], s.values[i + 1]],
            );
            Peak { position, height }
        })
        .collect();
    let tallest = peaks.iter().map(|p| p.height).fold(top, f64::max);
    peaks.iter_mut().for_each(|p| p.height /= tallest);
    PeakReport {
        peaks,
        ..Default::default()
    }
}

/// Distances between two peak-normalized spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonMetric {
    pub max_abs_diff: f64,
    /// √∫|ΔS|² dω with ω in meV.
    pub l2_distance: f64,
    pub maxima_a: usize,
    pub maxima_b: usize,
}

/// Compares `a` and `b` after peak normalization, on the grid of `a`.
pub fn compare_spectra(a: &Spectrum, b: &Spectrum) -> ComparisonMetric {
    let a = a.normalized();
    let b = b.normalized();
    let diff: Vec<f64> = a
        .omega
        .iter()
        .zip(&a.values)
        .map(|(&w, &v)| v - b.interpolate(w))
        .collect();
    let max_abs_diff = diff.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let l2 = a
        .omega
        .windows(2)
        .zip(diff.windows(2))
        .map(|(w, d)| 0.5 * rad_ps_to_mev(w[1] - w[0]) * (d[0] * d[0] + d[1] * d[1]))
        .sum::<f64>()
        .sqrt();
    ComparisonMetric {
        max_abs_diff,
        l2_distance: l2,
        maxima_a: find_peaks(&a).count(),
        maxima_b: find_peaks(&b).count(),
    }
}

/// Spectral engines that produce a detector spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Reservoir,
    CqedWea,
    CqedFull,
    CorrExp,
    Susceptibility,
}

impl Engine {
    pub const ALL: [Engine; 5] = [
        Engine::Reservoir,
        Engine::CqedWea,
        Engine::CqedFull,
        Engine::CorrExp,
        Engine::Susceptibility,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Reservoir => "reservoir",
            Engine::CqedWea => "cqed-wea",
            Engine::CqedFull => "cqed-full",
            Engine::CorrExp => "corr-exp",
            Engine::Susceptibility => "susceptibility",
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown engine `{s}`"))
    }
}

/// Engine knobs that are not physical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineSettings {
    pub hierarchy: HierarchyConfig,
    pub reservoir: SpectrumOptions,
}

/// Peak-normalized spectrum seen at the detector: the projected spectrum
/// for the reservoir and susceptibility engines, the coupled-mode cavity
/// spectrum for the others. Only the reservoir engine accepts a waveguide.
pub fn engine_spectrum(
    engine: Engine,
    reservoir: &PhotonReservoir,
    phonons: &PhononBathParams,
    zpl: &ZplRates,
    grid: &FrequencyGrid,
    settings: &EngineSettings,
) -> Result<Spectrum> {
    let bath = PhononBath::new(*phonons);
    if let Engine::Reservoir = engine {
        return Ok(
            emission_spectrum_projected(reservoir, zpl, &bath, grid, &settings.reservoir)?.spectrum,
        );
    }
    let PhotonReservoir::Cavity(cav) = reservoir else {
        return Err(PolaronError::UnsupportedReservoir {
            engine: engine.name(),
        });
    };
    match engine {
        Engine::Reservoir => unreachable!(),
        Engine::CqedWea => wea_spectrum(cav, &bath, zpl, grid),
        Engine::CqedFull => build_liouvillian(cav, &bath, zpl)?.coupled_mode_spectrum(grid),
        Engine::CorrExp => {
            let modes = discretize_modes(
                phonons,
                settings.hierarchy.modes,
                settings.hierarchy.omega_max,
            )?;
            Ok(
                two_time_spectrum(&modes, cav, zpl, InitialCondition::InvertedAtom, grid)?
                    .coupled_mode,
            )
        }
        Engine::Susceptibility => {
            cavity_spectrum(grid, &bath, &SusceptibilityParams::new(*cav, zpl)?)
        }
    }
}

/// Upper and lower branch ratios R_U = U₀/I₀ and R_L = L₀/I₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedingRatios {
    pub upper: f64,
    pub lower: f64,
}

impl FeedingRatios {
    pub fn sum(&self) -> f64 {
        self.upper + self.lower
    }
}

/// How far (rad/ps) a detected peak may sit from its nominal frequency.
const PEAK_MATCH_WINDOW: f64 = 0.075;

/// Reads I₀, U₀, L₀ at the exciton and the two mode edges; a detected peak
/// close to a nominal frequency is preferred over the nominal reading.
pub fn crow_peak_report(spectrum: &Spectrum, crow: &CrowBand, exciton: f64) -> PeakReport {
    let mut report = find_peaks(spectrum);
    let scale = spectrum.max_value();
    let read = |nominal: f64| {
        report
            .peaks
            .iter()
            .filter(|p| (p.position - nominal).abs() < PEAK_MATCH_WINDOW)
            .map(|p| p.height * scale)
            .fold(None, |acc: Option<f64>, h| {
                Some(acc.map_or(h, |a| a.max(h)))
            })
            .unwrap_or_else(|| spectrum.interpolate(nominal))
    };
    let (zpl, upper, lower) = (read(exciton), read(crow.upper_edge), read(crow.lower_edge));
    report.zpl = Some(zpl);
    report.upper_edge = Some(upper);
    report.lower_edge = Some(lower);
    report
}

pub fn feeding_ratios(spectrum: &Spectrum, crow: &CrowBand, exciton: f64) -> FeedingRatios {
    let r = crow_peak_report(spectrum, crow, exciton);
    let zpl = r.zpl.unwrap_or(0.0);
    FeedingRatios {
        upper: r.upper_edge.unwrap_or(0.0) / zpl,
        lower: r.lower_edge.unwrap_or(0.0) / zpl,
    }
}

/// Pure dephasing used along a temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DephasingModel {
    /// Temperature-independent γ_d (rad/ps).
    Constant(f64),
    /// γ_d = 1 + 0.95(T − 1) µeV.
    LinearInTemperature,
}

impl DephasingModel {
    pub fn rate(&self, temperature_k: f64) -> f64 {
        match *self {
            DephasingModel::Constant(r) => r,
            DephasingModel::LinearInTemperature => {
                uev_to_rad_ps(1.0 + 0.95 * (temperature_k - 1.0))
            }
        }
    }
}

/// Feeding ratios of a dot displaced by `detuning` (dot minus band center,
/// rad/ps) from the center of `band`, read directly at the nominal
/// frequencies of the projected spectrum.
fn crow_ratios_at(
    evaluator: &RateEvaluator,
    bath: &PhononBath,
    band: &CrowBand,
    detuning: f64,
    zpl: &ZplRates,
    options: &SpectrumOptions,
) -> Result<FeedingRatios> {
    let centered = CrowBand {
        lower_edge: band.lower_edge - band.center(),
        upper_edge: band.upper_edge - band.center(),
        ..*band
    };
    let reservoir = PhotonReservoir::Crow(centered).with_dot_shift(detuning);
    let PhotonReservoir::Crow(placed) = reservoir else {
        unreachable!()
    };
    let se = evaluator.se_rate(&reservoir)?;
    let intensity = |nu: f64| -> Result<f64> {
        let s = polarization_spectrum(zpl, &se, bath, &FrequencyGrid::new(nu, nu, 1)?, options)?;
        Ok(reservoir.propagator(nu) * s.values[0])
    };
    let zero = intensity(0.0)?;
    Ok(FeedingRatios {
        upper: intensity(placed.upper_edge)? / zero,
        lower: intensity(placed.lower_edge)? / zero,
    })
}

/// R_U and R_L across dot placements at one temperature.
pub fn feeding_ratio_row(
    band: &CrowBand,
    phonons: &PhononBathParams,
    zpl: &ZplRates,
    detunings: &[f64],
    rate_model: RateModel,
) -> Result<Vec<FeedingRatios>> {
    let bath = PhononBath::new(*phonons);
    let evaluator = RateEvaluator::new(&bath);
    let options = SpectrumOptions {
        rate_model,
        ..Default::default()
    };
    detunings
        .par_iter()
        .map(|&d| crow_ratios_at(&evaluator, &bath, band, d, zpl, &options))
        .collect()
}

/// R_U + R_L over a temperature × detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedingMap {
    pub temperatures: Vec<f64>,
    /// Dot minus band center (rad/ps).
    pub detunings: Vec<f64>,
    /// Row-major: `ratio_sum[i * detunings.len() + j]` at temperature i, detuning j.
    pub ratio_sum: Vec<f64>,
}

impl FeedingMap {
    pub fn at(&self, temperature_index: usize, detuning_index: usize) -> f64 {
        self.ratio_sum[temperature_index * self.detunings.len() + detuning_index]
    }

    pub fn row(&self, temperature_index: usize) -> &[f64] {
        let n = self.detunings.len();
        &self.ratio_sum[temperature_index * n..(temperature_index + 1) * n]
    }
}

/// Every cell is independent, so the map is identical for any thread count.
pub fn sweep_feeding_map(
    band: &CrowBand,
    phonons: &PhononBathParams,
    radiative: f64,
    temperatures: &[f64],
    detunings: &[f64],
    dephasing: DephasingModel,
) -> Result<FeedingMap> {
    let rows: Vec<Vec<FeedingRatios>> = temperatures
        .par_iter()
        .map(|&t| {
            let zpl = ZplRates {
                radiative,
                dephasing: dephasing.rate(t),
                pump: 0.0,
            };
            feeding_ratio_row(
                band,
                &phonons.with_temperature(t),
                &zpl,
                detunings,
                RateModel::PhononDressed,
            )
        })
        .collect::<Result<_>>()?;
    Ok(FeedingMap {
        temperatures: temperatures.to_vec(),
        detunings: detunings.to_vec(),
        ratio_sum: rows.into_iter().flatten().map(|r| r.sum()).collect(),
    })
}
