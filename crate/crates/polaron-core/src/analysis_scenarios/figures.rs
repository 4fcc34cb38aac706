use super::{
    compare_spectra, feeding_ratio_row, sweep_feeding_map, ComparisonMetric, DephasingModel,
};
use crate::correlation_expansion::{two_time_spectrum, HierarchyConfig, InitialCondition};
use crate::cqed_me::{build_liouvillian, wea_spectrum};
use crate::error::{PolaronError, Result};
use crate::linear_susceptibility::{cavity_spectrum, SusceptibilityParams};
use crate::phonon_bath::{discretize_modes, PhononBath, PhononBathParams};
use crate::photonic_reservoir::{
    BackgroundDecay, CrowBand, LorentzianCavity, PhotonReservoir, OPTICAL_ENERGY_MEV,
};
use crate::reservoir_me::{
    absorption_spectrum, emission_spectrum_projected, polarization_spectrum, se_rate,
    RateEvaluator, RateModel, SeRateResult, SpectrumOptions, ZplRates,
};
use crate::units_numerics::{mev_to_rad_ps, rad_ps_to_mev, uev_to_rad_ps, FrequencyGrid, Spectrum};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureName {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    Fig12,
    Fig13,
    Fig15,
}

impl FigureName {
    pub const ALL: [FigureName; 12] = [
        FigureName::Fig3,
        FigureName::Fig4,
        FigureName::Fig5,
        FigureName::Fig6,
        FigureName::Fig7,
        FigureName::Fig8,
        FigureName::Fig9,
        FigureName::Fig10,
        FigureName::Fig11,
        FigureName::Fig12,
        FigureName::Fig13,
        FigureName::Fig15,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
            FigureName::Fig6 => "fig6",
            FigureName::Fig7 => "fig7",
            FigureName::Fig8 => "fig8",
            FigureName::Fig9 => "fig9",
            FigureName::Fig10 => "fig10",
            FigureName::Fig11 => "fig11",
            FigureName::Fig12 => "fig12",
            FigureName::Fig13 => "fig13",
            FigureName::Fig15 => "fig15",
        }
    }

    /// Caption parameters. Cavity detunings follow Δ = ω_c − ω_x′ with the
    /// off-resonant cavities on the red side.
    pub fn caption(self) -> CaptionParams {
        let cavity = |g, kappa, detuning_mev| CaptionParams {
            coupling_uev: g,
            kappa_uev: kappa,
            radiative_uev: 5.0,
            dephasing_uev: 55.0,
            detuning_mev,
            temperature_k: 4.0,
        };
        let crow = |t| CaptionParams {
            coupling_uev: 85.0,
            kappa_uev: 0.0,
            radiative_uev: 1.0,
            dephasing_uev: 1.0,
            detuning_mev: 0.0,
            temperature_k: t,
        };
        match self {
            FigureName::Fig3 => CaptionParams {
                dephasing_uev: 5.0,
                ..cavity(0.0, 0.0, 0.0)
            },
            FigureName::Fig4 | FigureName::Fig5 => cavity(100.0, 65.0, 0.0),
            FigureName::Fig6 => cavity(100.0, 180.0, -2.0),
            FigureName::Fig7 => cavity(100.0, 2400.0, -2.0),
            FigureName::Fig8 => cavity(100.0, 65.0, 2.0),
            FigureName::Fig15 => cavity(100.0, 65.0, -1.0),
            FigureName::Fig9 => crow(4.0),
            FigureName::Fig10 => crow(40.0),
            FigureName::Fig11 | FigureName::Fig12 | FigureName::Fig13 => crow(40.0),
        }
    }
}

impl FromStr for FigureName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FigureName::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}`"))
    }
}

/// Pump used when a figure calls for weak incoherent excitation: it keeps
/// ⟨σ⁺σ⁻⟩ near 0.01 for the off-resonant cavities.
pub const WEAK_PUMP_UEV: f64 = 0.05;

/// Dipole, refractive index and photon energy behind the Purcell factor.
const CROW_DIPOLE_DEBYE: f64 = 50.0;
const SLAB_INDEX: f64 = 3.4;
/// Waveguide spectra need a step well below the 14 µeV edge width.
const CROW_POINTS: usize = 4801;

/// Parameters quoted in a figure caption, in the caption's units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptionParams {
    pub coupling_uev: f64,
    pub kappa_uev: f64,
    pub radiative_uev: f64,
    pub dephasing_uev: f64,
    pub detuning_mev: f64,
    pub temperature_k: f64,
}

impl CaptionParams {
    pub fn cavity(&self) -> LorentzianCavity {
        LorentzianCavity {
            detuning: mev_to_rad_ps(self.detuning_mev),
            kappa: uev_to_rad_ps(self.kappa_uev),
            coupling: uev_to_rad_ps(self.coupling_uev),
        }
    }

    pub fn zpl(&self, pump_uev: f64) -> ZplRates {
        ZplRates::from_uev(self.radiative_uev, self.dephasing_uev, pump_uev)
    }

    pub fn phonons(&self) -> PhononBathParams {
        PhononBathParams::inas(self.temperature_k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    pub hierarchy: HierarchyConfig,
    /// Points on each cavity spectrum grid.
    pub points: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            hierarchy: HierarchyConfig::default(),
            points: 601,
        }
    }
}

/// One CSV file: a header row and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Nine significant digits, fixed exponent form, so output is byte-stable.
fn format_value(x: f64) -> String {
    format!("{x:.8e}")
}

impl CsvTable {
    pub fn new(file_name: impl Into<String>, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            file_name: file_name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows,
        }
    }

    /// `omega_meV,S_norm` table of a spectrum scaled by `reference`.
    pub fn spectrum_scaled(file_name: impl Into<String>, s: &Spectrum, reference: f64) -> Self {
        let scale = if reference != 0.0 {
            1.0 / reference
        } else {
            1.0
        };
        let rows = s
            .omega
            .iter()
            .zip(&s.values)
            .map(|(&w, &v)| vec![rad_ps_to_mev(w), v * scale])
            .collect();
        Self::new(file_name, &["omega_meV", "S_norm"], rows)
    }

    /// `omega_meV,S_norm` table of a peak-normalized spectrum.
    pub fn spectrum(file_name: impl Into<String>, s: &Spectrum) -> Self {
        Self::spectrum_scaled(file_name, s, s.max_value())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(
                &row.iter()
                    .map(|&v| format_value(v))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
        }
        out
    }
}

/// Data tables, comparison metrics and a matplotlib script for one figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureBundle {
    pub name: FigureName,
    pub tables: Vec<CsvTable>,
    pub comparisons: Vec<(String, ComparisonMetric)>,
}

impl FigureBundle {
    fn new(name: FigureName) -> Self {
        Self {
            name,
            tables: Vec::new(),
            comparisons: Vec::new(),
        }
    }

    pub fn table(&self, file_name: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }

    pub fn comparisons_csv(&self) -> String {
        let mut out = String::from("pair,max_abs_diff,l2_distance,maxima_a,maxima_b\n");
        for (pair, m) in &self.comparisons {
            let _ = writeln!(
                out,
                "{pair},{},{},{},{}",
                format_value(m.max_abs_diff),
                format_value(m.l2_distance),
                m.maxima_a,
                m.maxima_b
            );
        }
        out
    }

    pub fn plot_script(&self) -> String {
        let mut s =
            String::from("import csv\nimport matplotlib.pyplot as plt\n\n\ndef load(path):\n");
        s.push_str("    with open(path) as f:\n        rows = list(csv.reader(f))\n");
        s.push_str("    return rows[0], [[float(v) for v in r] for r in rows[1:]]\n\n\n");
        for t in &self.tables {
            let stem = t.file_name.trim_end_matches(".csv");
            let _ = writeln!(s, "head, data = load(\"{}\")", t.file_name);
            let _ = writeln!(s, "plt.figure()");
            if t.header.len() == 3 && t.header[0] == "T_K" {
                s.push_str("plt.scatter([r[1] for r in data], [r[0] for r in data], c=[r[2] for r in data], marker=\"s\")\n");
                s.push_str(
                    "plt.colorbar(label=head[2])\nplt.xlabel(head[1])\nplt.ylabel(head[0])\n",
                );
            } else {
                s.push_str("for k in range(1, len(head)):\n");
                s.push_str(
                    "    plt.plot([r[0] for r in data], [r[k] for r in data], label=head[k])\n",
                );
                s.push_str("plt.xlabel(head[0])\nplt.legend()\n");
            }
            let _ = writeln!(
                s,
                "plt.title(\"{stem}\")\nplt.savefig(\"{stem}.png\", dpi=150)\n"
            );
        }
        s
    }

    /// Writes every table, `comparisons.csv` when metrics exist, and
    /// `plot_<name>.py` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, body: &str| -> std::io::Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            written.push(p);
            Ok(())
        };
        for t in &self.tables {
            put(&t.file_name, &t.to_csv())?;
        }
        if !self.comparisons.is_empty() {
            put("comparisons.csv", &self.comparisons_csv())?;
        }
        put(
            &format!("plot_{}.py", self.name.name()),
            &self.plot_script(),
        )?;
        Ok(written)
    }
}

fn ce_spectra(
    cav: &LorentzianCavity,
    phonons: &PhononBathParams,
    zpl: &ZplRates,
    grid: &FrequencyGrid,
    options: &FigureOptions,
) -> Result<(Spectrum, Spectrum)> {
    let modes = discretize_modes(
        phonons,
        options.hierarchy.modes,
        options.hierarchy.omega_max,
    )?;
    let ce = two_time_spectrum(&modes, cav, zpl, InitialCondition::InvertedAtom, grid)?;
    Ok((ce.coupled_mode, ce.green_function))
}

fn signed(mev: f64) -> String {
    format!("{mev:+}")
}

/// Runs the engines a figure compares, with the caption's parameters.
pub fn run_figure(name: FigureName, options: &FigureOptions) -> Result<FigureBundle> {
    if options.points < 3 {
        return Err(PolaronError::InvalidParameter {
            name: "points",
            value: options.points as f64,
        });
    }
    let p = name.caption();
    let phonons = p.phonons();
    let bath = PhononBath::new(phonons);
    let cav = p.cavity();
    let zpl = p.zpl(WEAK_PUMP_UEV);
    let n = options.points;
    let mut b = FigureBundle::new(name);
    match name {
        FigureName::Fig3 => {
            let grid = FrequencyGrid::from_mev(-3.0, 3.0, n)?;
            let zpl = p.zpl(0.0);
            let no_reservoir = SeRateResult {
                rate: 0.0,
                lamb_shift: 0.0,
                bare_rate: 0.0,
            };
            let opts = SpectrumOptions::default();
            let emission = polarization_spectrum(&zpl, &no_reservoir, &bath, &grid, &opts)?;
            let absorption = absorption_spectrum(&zpl, &no_reservoir, &bath, &grid, &opts)?;
            let polaron_frame = polarization_spectrum(
                &zpl,
                &no_reservoir,
                &PhononBath::new(phonons.without_coupling()),
                &grid,
                &opts,
            )?;
            b.tables
                .push(CsvTable::spectrum("fig3_emission.csv", &emission));
            b.tables
                .push(CsvTable::spectrum("fig3_absorption.csv", &absorption));
            b.tables
                .push(CsvTable::spectrum("fig3_polaron_frame.csv", &polaron_frame));
        }
        FigureName::Fig4 => {
            let grid = FrequencyGrid::from_mev(-0.5, 0.5, n)?;
            let free = PhononBath::new(phonons.without_coupling());
            let wea_free = wea_spectrum(&cav, &free, &zpl, &grid)?;
            let wea = wea_spectrum(&cav, &bath, &zpl, &grid)?;
            let full = build_liouvillian(&cav, &bath, &zpl)?.coupled_mode_spectrum(&grid)?;
            let (ce, _) = ce_spectra(&cav, &phonons, &zpl, &grid, options)?;
            let sus = cavity_spectrum(&grid, &bath, &SusceptibilityParams::new(cav, &zpl)?)?;
            for (file, s) in [
                ("fig4_cqed_wea_phonon_free.csv", &wea_free),
                ("fig4_cqed_wea.csv", &wea),
                ("fig4_cqed_full.csv", &full),
                ("fig4_corr_exp.csv", &ce),
                ("fig4_susceptibility.csv", &sus),
            ] {
                b.tables.push(CsvTable::spectrum(file, s));
            }
            b.comparisons
                .push(("corr-exp vs cqed-wea".into(), compare_spectra(&ce, &wea)));
            b.comparisons
                .push(("corr-exp vs cqed-full".into(), compare_spectra(&ce, &full)));
            b.comparisons.push((
                "corr-exp vs susceptibility".into(),
                compare_spectra(&ce, &sus),
            ));
            b.comparisons
                .push(("cqed-wea vs cqed-full".into(), compare_spectra(&wea, &full)));
        }
        FigureName::Fig5 => {
            let grid = FrequencyGrid::from_mev(-0.5, 0.5, n)?;
            for g in [50.0, 100.0] {
                let cav = LorentzianCavity {
                    coupling: uev_to_rad_ps(g),
                    ..cav
                };
                let me = build_liouvillian(&cav, &bath, &zpl)?;
                let cm = me.coupled_mode_spectrum(&grid)?;
                let green = me.green_function_spectrum(&cav, &bath, &grid)?;
                let (ce_cm, ce_green) = ce_spectra(&cav, &phonons, &zpl, &grid, options)?;
                b.tables
                    .push(CsvTable::spectrum(format!("fig5_g{g}_cqed_cm.csv"), &cm));
                b.tables.push(CsvTable::spectrum(
                    format!("fig5_g{g}_cqed_green.csv"),
                    &green,
                ));
                b.tables
                    .push(CsvTable::spectrum(format!("fig5_g{g}_ce_cm.csv"), &ce_cm));
                b.tables.push(CsvTable::spectrum(
                    format!("fig5_g{g}_ce_green.csv"),
                    &ce_green,
                ));
                b.comparisons.push((
                    format!("g={g} cqed green vs cm"),
                    compare_spectra(&green, &cm),
                ));
                b.comparisons.push((
                    format!("g={g} corr-exp green vs cm"),
                    compare_spectra(&ce_green, &ce_cm),
                ));
            }
        }
        FigureName::Fig6 | FigureName::Fig7 => {
            let (lo, hi) = if name == FigureName::Fig6 {
                (-3.0, 1.0)
            } else {
                (-4.0, 2.0)
            };
            let grid = FrequencyGrid::from_mev(lo, hi, n)?;
            let tag = name.name();
            let (ce, _) = ce_spectra(&cav, &phonons, &zpl, &grid, options)?;
            let cqed = build_liouvillian(&cav, &bath, &zpl)?.coupled_mode_spectrum(&grid)?;
            // The hierarchy and cQED spectra carry the cavity Lamb shift, so the
            // reservoir line is shifted too before they are compared.
            let shifted = SpectrumOptions {
                include_lamb_shift: true,
                ..Default::default()
            };
            let res = emission_spectrum_projected(
                &PhotonReservoir::Cavity(cav),
                &zpl,
                &bath,
                &grid,
                &shifted,
            )?;
            let sus = cavity_spectrum(&grid, &bath, &SusceptibilityParams::new(cav, &zpl)?)?;
            b.tables
                .push(CsvTable::spectrum(format!("{tag}_ce_cm.csv"), &ce));
            b.tables
                .push(CsvTable::spectrum(format!("{tag}_cqed_cm.csv"), &cqed));
            b.tables.push(CsvTable::spectrum(
                format!("{tag}_reservoir_green.csv"),
                &res.spectrum,
            ));
            b.tables.push(CsvTable::spectrum(
                format!("{tag}_susceptibility_green.csv"),
                &sus,
            ));
            if name == FigureName::Fig7 {
                b.tables.push(CsvTable::spectrum(
                    "fig7_polarization.csv",
                    &res.polarization,
                ));
            }
            b.comparisons.push((
                "corr-exp vs reservoir".into(),
                compare_spectra(&ce, &res.spectrum),
            ));
            b.comparisons
                .push(("corr-exp vs cqed".into(), compare_spectra(&ce, &cqed)));
            b.comparisons.push((
                "corr-exp vs susceptibility".into(),
                compare_spectra(&ce, &sus),
            ));
        }
        FigureName::Fig8 => {
            let grid = FrequencyGrid::from_mev(-5.0, 5.0, n.max(1001))?;
            let free = PhononBath::new(phonons.without_coupling());
            for d in [1.0, 2.0, 3.0, 4.0, -1.0, -2.0, -3.0, -4.0] {
                let cav = LorentzianCavity {
                    detuning: mev_to_rad_ps(d),
                    ..cav
                };
                let params = SusceptibilityParams::new(cav, &zpl)?;
                let r = PhotonReservoir::Cavity(cav);
                for (label, bath) in [("phonons", &bath), ("phonon_free", &free)] {
                    let sus = cavity_spectrum(&grid, bath, &params)?;
                    let res = emission_spectrum_projected(
                        &r,
                        &zpl,
                        bath,
                        &grid,
                        &SpectrumOptions::default(),
                    )?
                    .spectrum;
                    b.tables.push(CsvTable::spectrum_scaled(
                        format!("fig8_susceptibility_{label}_d{}.csv", signed(d)),
                        &sus,
                        sus.interpolate(0.0),
                    ));
                    b.tables.push(CsvTable::spectrum_scaled(
                        format!("fig8_reservoir_{label}_d{}.csv", signed(d)),
                        &res,
                        res.interpolate(0.0),
                    ));
                }
            }
        }
        FigureName::Fig9 => {
            let grid = FrequencyGrid::from_mev(-6.0, 6.0, n)?;
            let r = PhotonReservoir::Crow(CrowBand::standard(0.0));
            let background =
                BackgroundDecay::from_dipole(CROW_DIPOLE_DEBYE, SLAB_INDEX, OPTICAL_ENERGY_MEV);
            let rows = grid
                .points()
                .into_iter()
                .map(|nu| {
                    vec![
                        rad_ps_to_mev(nu),
                        r.purcell_factor(nu, &background),
                        r.propagator(nu),
                    ]
                })
                .collect();
            b.tables.push(CsvTable::new(
                "fig9_crow.csv",
                &["omega_meV", "purcell_factor", "projector"],
                rows,
            ));
        }
        FigureName::Fig10 => {
            let grid = FrequencyGrid::from_mev(-6.0, 6.0, n.max(CROW_POINTS))?;
            for (file, t, qd_offset) in [
                ("fig10a.csv", 4.0, 0.0),
                ("fig10b.csv", 40.0, 0.0),
                ("fig10c.csv", 40.0, 1.0),
            ] {
                let r = PhotonReservoir::Crow(CrowBand::standard(mev_to_rad_ps(-qd_offset)));
                let bath = PhononBath::new(phonons.with_temperature(t));
                let s = emission_spectrum_projected(
                    &r,
                    &p.zpl(0.0),
                    &bath,
                    &grid,
                    &SpectrumOptions::default(),
                )?
                .spectrum;
                b.tables.push(CsvTable::spectrum(file, &s));
            }
        }
        FigureName::Fig11 => {
            let grid = FrequencyGrid::from_mev(-3.0, 3.0, n.max(CROW_POINTS))?;
            let half_band = 0.5 * crate::photonic_reservoir::CROW_BANDWIDTH_MEV;
            for (tag, edge_mev) in [("outside", -1.0), ("inside", 0.3)] {
                let r =
                    PhotonReservoir::Crow(CrowBand::standard(mev_to_rad_ps(edge_mev - half_band)));
                let se = se_rate(&r, &bath)?;
                for (label, model) in [
                    ("dressed_rate", RateModel::PhononDressed),
                    ("bare_rate", RateModel::PhononFree),
                ] {
                    let opts = SpectrumOptions {
                        rate_model: model,
                        ..Default::default()
                    };
                    let s = crate::reservoir_me::project(&r, &p.zpl(0.0), &bath, &grid, &opts, se)?
                        .spectrum;
                    b.tables
                        .push(CsvTable::spectrum(format!("fig11_{tag}_{label}.csv"), &s));
                }
            }
        }
        FigureName::Fig12 => {
            let band = CrowBand::standard(0.0);
            let detunings: Vec<f64> = (0..=240)
                .map(|i| mev_to_rad_ps(-6.0 + 0.05 * i as f64))
                .collect();
            let zpl = p.zpl(0.0);
            let dressed =
                feeding_ratio_row(&band, &phonons, &zpl, &detunings, RateModel::PhononDressed)?;
            let bare = feeding_ratio_row(&band, &phonons, &zpl, &detunings, RateModel::PhononFree)?;
            let evaluator = RateEvaluator::new(&bath);
            let mut rows = Vec::with_capacity(detunings.len());
            for (k, &d) in detunings.iter().enumerate() {
                let chi = evaluator
                    .se_rate(&PhotonReservoir::Crow(band).with_dot_shift(d))?
                    .modification();
                rows.push(vec![
                    rad_ps_to_mev(d),
                    chi,
                    dressed[k].upper,
                    dressed[k].lower,
                    bare[k].upper,
                    bare[k].lower,
                ]);
            }
            b.tables.push(CsvTable::new(
                "fig12_ratios.csv",
                &[
                    "detuning_meV",
                    "chi",
                    "R_U",
                    "R_L",
                    "R_U_bare_rate",
                    "R_L_bare_rate",
                ],
                rows,
            ));
        }
        FigureName::Fig13 => {
            let band = CrowBand::standard(0.0);
            let temperatures: Vec<f64> = (0..14).map(|i| 1.0 + 3.0 * i as f64).collect();
            let detunings: Vec<f64> = (0..=120)
                .map(|i| mev_to_rad_ps(-6.0 + 0.1 * i as f64))
                .collect();
            let radiative = uev_to_rad_ps(p.radiative_uev);
            for (file, model) in [
                (
                    "fig13a.csv",
                    DephasingModel::Constant(uev_to_rad_ps(p.dephasing_uev)),
                ),
                ("fig13b.csv", DephasingModel::LinearInTemperature),
            ] {
                let map = sweep_feeding_map(
                    &band,
                    &phonons,
                    radiative,
                    &temperatures,
                    &detunings,
                    model,
                )?;
                b.tables.push(map_table(file, &map));
            }
        }
        FigureName::Fig15 => {
            let grid = FrequencyGrid::from_mev(-1.5, 0.5, n)?;
            let pumped = build_liouvillian(&cav, &bath, &zpl)?.coupled_mode_spectrum(&grid)?;
            b.tables
                .push(CsvTable::spectrum("fig15_pumped.csv", &pumped));
            let inverted =
                build_liouvillian(&cav, &bath, &p.zpl(0.0))?.inverted_atom_spectrum(&grid)?;
            b.tables
                .push(CsvTable::spectrum("fig15_inverted.csv", &inverted));
            b.comparisons.push((
                "pumped vs inverted".into(),
                compare_spectra(&pumped, &inverted),
            ));
        }
    }
    Ok(b)
}

/// `T_K,detuning_meV,ratio` rows of a feeding map; values are not clipped.
pub fn map_table(file_name: &str, map: &super::FeedingMap) -> CsvTable {
    let mut rows = Vec::with_capacity(map.ratio_sum.len());
    for (i, &t) in map.temperatures.iter().enumerate() {
        for (j, &d) in map.detunings.iter().enumerate() {
            rows.push(vec![t, rad_ps_to_mev(d), map.at(i, j)]);
        }
    }
    CsvTable::new(file_name, &["T_K", "detuning_meV", "ratio"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_names_round_trip() {
        for f in FigureName::ALL {
            assert_eq!(f.name().parse::<FigureName>().unwrap(), f);
        }
        assert!("fig14".parse::<FigureName>().is_err());
    }

    #[test]
    fn fig6_caption_values() {
        let c = FigureName::Fig6.caption();
        assert_eq!(
            (
                c.coupling_uev,
                c.kappa_uev,
                c.radiative_uev,
                c.dephasing_uev
            ),
            (100.0, 180.0, 5.0, 55.0)
        );
        assert_eq!((c.detuning_mev.abs(), c.temperature_k), (2.0, 4.0));
    }

    #[test]
    fn csv_uses_nine_significant_digits() {
        let t = CsvTable::new(
            "x.csv",
            &["omega_meV", "S_norm"],
            vec![vec![-0.5, 1.0 / 3.0]],
        );
        assert_eq!(
            t.to_csv(),
            "omega_meV,S_norm\n-5.00000000e-1,3.33333333e-1\n"
        );
    }

    #[test]
    fn fig3_emission_mirrors_absorption() {
        let b = run_figure(
            FigureName::Fig3,
            &FigureOptions {
                points: 301,
                ..Default::default()
            },
        )
        .unwrap();
        let em = b.table("fig3_emission.csv").unwrap();
        let ab = b.table("fig3_absorption.csv").unwrap();
        let n = em.rows.len();
        for k in 0..n {
            assert!((em.rows[k][1] - ab.rows[n - 1 - k][1]).abs() < 1e-9);
        }
        let red: f64 = em.rows.iter().filter(|r| r[0] < -0.2).map(|r| r[1]).sum();
        let blue: f64 = em.rows.iter().filter(|r| r[0] > 0.2).map(|r| r[1]).sum();
        assert!(red > blue);
    }

    #[test]
    fn written_bundle_is_deterministic() {
        let opts = FigureOptions {
            points: 101,
            ..Default::default()
        };
        let dir = std::env::temp_dir().join(format!("polaron-fig9-{}", std::process::id()));
        let first = run_figure(FigureName::Fig9, &opts).unwrap();
        let files = first.write(&dir).unwrap();
        let before: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        run_figure(FigureName::Fig9, &opts)
            .unwrap()
            .write(&dir)
            .unwrap();
        let after: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        assert_eq!(before, after);
        assert!(files
            .iter()
            .any(|f| f.extension().is_some_and(|e| e == "py")));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
