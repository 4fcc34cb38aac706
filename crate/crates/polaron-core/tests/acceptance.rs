//! Acceptance criteria, run in order on one thread so the wall-clock limits
//! measure the computation alone. Pass criterion numbers as arguments to
//! run a subset: `cargo test -p polaron-core --test acceptance -- 1 7`.

use num_complex::Complex64;
use polaron_core::analysis_scenarios::{
    compare_spectra, crow_peak_report, engine_spectrum, feeding_ratio_row, find_peaks,
    DephasingModel, Engine, EngineSettings, WEAK_PUMP_UEV,
};
use polaron_core::correlation_expansion::{
    assemble_hierarchy, regression_trace, two_time_spectrum, HierarchyConfig, HierarchyState,
    InitialCondition, EXCITON,
};
use polaron_core::cqed_me::{
    build_liouvillian, exciton_lowering, gamma_tilde_p, polariton_splitting, scattering_rates,
    wea_spectrum, weak_coupling_rates, PurcellForm,
};
use polaron_core::phonon_bath::{
    discretize_modes, displacement_average, phase_function, polaron_shift, PhononBath,
    PhononBathParams,
};
use polaron_core::photonic_reservoir::{
    CrowBand, LorentzianCavity, PhotonReservoir, CROW_BANDWIDTH_MEV,
};
use polaron_core::reservoir_me::{
    emission_spectrum_projected, se_rate, RateModel, SpectrumOptions, ZplRates,
};
use polaron_core::units_numerics::{
    mev_to_rad_ps, rad_ps_to_uev, thermal_frequency, uev_to_rad_ps, FrequencyGrid, Spectrum,
};
use polaron_core::Result;
use std::time::{Duration, Instant};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn cavity(g_uev: f64, kappa_uev: f64, detuning_mev: f64) -> LorentzianCavity {
    LorentzianCavity {
        detuning: mev_to_rad_ps(detuning_mev),
        kappa: uev_to_rad_ps(kappa_uev),
        coupling: uev_to_rad_ps(g_uev),
    }
}

fn cavity_zpl() -> ZplRates {
    ZplRates::from_uev(5.0, 55.0, WEAK_PUMP_UEV)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Largest value within `half_width` (rad/ps) of `center`.
fn window_max(s: &Spectrum, center: f64, half_width: f64) -> f64 {
    s.omega
        .iter()
        .zip(&s.values)
        .filter(|(&w, _)| (w - center).abs() <= half_width)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn displacement() -> Result<Verdict> {
    let b = displacement_average(&PhononBathParams::inas(4.0));
    verdict(
        (b - 0.915).abs() <= 0.005,
        format!("<B> = {b:.5} (target 0.915 +- 0.005)"),
    )
}

fn zero_temperature_closed_forms() -> Result<Verdict> {
    let p = PhononBathParams::new(0.06, mev_to_rad_ps(1.0), 0.0)?;
    let phi0 = phase_function(0.0, &p).re;
    let phi0_exact = p.coupling_ps2 * p.cutoff.powi(2);
    let shift = polaron_shift(&p);
    let shift_exact = p.coupling_ps2 * p.cutoff.powi(3) * (std::f64::consts::PI / 2.0).sqrt();
    let (e1, e2) = (rel(phi0, phi0_exact), rel(shift, shift_exact));
    verdict(
        e1 < 1e-6 && e2 < 1e-6,
        format!("phi(0) rel err {e1:.2e}, polaron shift rel err {e2:.2e} (limit 1e-6)"),
    )
}

fn phonon_free_purcell() -> Result<Verdict> {
    let cav = cavity(100.0, 65.0, 0.0);
    let free = PhononBath::new(PhononBathParams::inas(4.0).without_coupling());
    let exact = 4.0 * 100.0f64.powi(2) / 65.0;
    let reservoir = rad_ps_to_uev(se_rate(&PhotonReservoir::Cavity(cav), &free)?.rate);
    let cqed = rad_ps_to_uev(gamma_tilde_p(&cav, &free, PurcellForm::CavityWidth)?);
    verdict(
        rel(reservoir, exact) < 5e-3 && rel(cqed, exact) < 5e-3,
        format!("reservoir {reservoir:.2} ueV, cqed {cqed:.2} ueV, 4g^2/kappa = {exact:.2} ueV (tol 0.5%)"),
    )
}

/// Height of the right peak of a doublet over the left one.
fn doublet_ratio(s: &Spectrum) -> Option<f64> {
    let r = find_peaks(s);
    (r.count() == 2).then(|| r.peaks[1].height / r.peaks[0].height)
}

fn resonant_doublet() -> Result<Verdict> {
    let cav = cavity(100.0, 65.0, 0.0);
    let zpl = cavity_zpl();
    let grid = FrequencyGrid::from_mev(-0.5, 0.5, 601)?;
    let phonons = PhononBathParams::inas(4.0);
    let mut ok = true;
    let mut notes = Vec::new();

    let free_bath = PhononBath::new(phonons.without_coupling());
    let free_split = rad_ps_to_uev(polariton_splitting(
        &scattering_rates(&cav, &free_bath)?,
        &cav,
        &zpl,
    ));
    let free_ratio = doublet_ratio(&wea_spectrum(&cav, &free_bath, &zpl, &grid)?);
    let free_ok =
        (free_split - 200.0).abs() <= 1.0 && free_ratio.is_some_and(|r| (r - 1.0).abs() <= 0.01);
    ok &= free_ok;
    notes.push(format!(
        "phonon-free split {free_split:.1} ueV ratio {free_ratio:.3?}"
    ));

    let bath = PhononBath::new(phonons);
    let split = rad_ps_to_uev(polariton_splitting(
        &scattering_rates(&cav, &bath)?,
        &cav,
        &zpl,
    ));
    ok &= (split - 183.0).abs() <= 4.0;
    notes.push(format!("split {split:.1} ueV"));

    let settings = EngineSettings::default();
    let reservoir = PhotonReservoir::Cavity(cav);
    let engines = [
        Engine::CqedWea,
        Engine::CqedFull,
        Engine::CorrExp,
        Engine::Susceptibility,
    ];
    let mut spectra = Vec::new();
    for e in engines {
        let start = Instant::now();
        let s = engine_spectrum(e, &reservoir, &phonons, &zpl, &grid, &settings)?;
        let t = secs(start.elapsed());
        let limit = if e == Engine::CorrExp { 1800.0 } else { 10.0 };
        ok &= t < limit;
        let ratio = doublet_ratio(&s);
        let peaks = find_peaks(&s);
        let distance = (peaks.count() == 2)
            .then(|| 1000.0 * (peaks.positions_mev()[1] - peaks.positions_mev()[0]));
        ok &= ratio.is_some_and(|r| (r - 1.0).abs() > 0.05);
        notes.push(format!(
            "{} ratio {ratio:.3?} peak distance {distance:.0?} ueV {t:.1}s",
            e.name()
        ));
        spectra.push((e, s));
    }
    let mut worst: f64 = 0.0;
    for (i, (ea, a)) in spectra.iter().enumerate() {
        for (eb, b) in &spectra[i + 1..] {
            let d = compare_spectra(a, b).max_abs_diff;
            worst = worst.max(d);
            notes.push(format!("{}|{} {:.4}", ea.name(), eb.name(), d));
        }
    }
    ok &= worst < 0.05;
    notes.push(format!("worst pair {worst:.4} (limit 0.05)"));
    verdict(ok, notes.join("; "))
}

fn markov_breakdown() -> Result<Verdict> {
    let bath = PhononBath::new(PhononBathParams::inas(4.0));
    let zpl = cavity_zpl();
    let grid = FrequencyGrid::from_mev(-0.5, 0.5, 601)?;
    let mut notes = Vec::new();

    let weak = cavity(50.0, 65.0, 0.0);
    let me = build_liouvillian(&weak, &bath, &zpl)?;
    let d = compare_spectra(
        &me.green_function_spectrum(&weak, &bath, &grid)?,
        &me.coupled_mode_spectrum(&grid)?,
    )
    .max_abs_diff;
    notes.push(format!("g=50: G vs CM {d:.4} (limit 0.05)"));

    let strong = cavity(100.0, 65.0, 0.0);
    let me = build_liouvillian(&strong, &bath, &zpl)?;
    let green = find_peaks(&me.green_function_spectrum(&strong, &bath, &grid)?).count();
    let cm = find_peaks(&me.coupled_mode_spectrum(&grid)?).count();
    notes.push(format!("g=100: G maxima {green}, CM maxima {cm}"));
    verdict(d < 0.05 && green == 3 && cm == 2, notes.join("; "))
}

fn off_resonant_feeding() -> Result<Verdict> {
    let phonons = PhononBathParams::inas(4.0);
    let zpl = cavity_zpl();
    let grid = FrequencyGrid::from_mev(-5.0, 5.0, 2001)?;
    let window = mev_to_rad_ps(0.1);
    let settings = EngineSettings::default();
    let ratio = |engine: Engine, detuning_mev: f64| -> Result<f64> {
        let cav = cavity(100.0, 65.0, detuning_mev);
        let s = engine_spectrum(
            engine,
            &PhotonReservoir::Cavity(cav),
            &phonons,
            &zpl,
            &grid,
            &settings,
        )?;
        Ok(window_max(&s, cav.detuning, window) / window_max(&s, 0.0, window))
    };
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [1.0, 2.0, 3.0, 4.0] {
        let (res_red, res_blue) = (ratio(Engine::Reservoir, -d)?, ratio(Engine::Reservoir, d)?);
        let (sus_red, sus_blue) = (
            ratio(Engine::Susceptibility, -d)?,
            ratio(Engine::Susceptibility, d)?,
        );
        let (a, b) = (res_red > res_blue, sus_blue > sus_red);
        ok &= a && b;
        notes.push(format!(
            "|D|={d}: reservoir red/blue {res_red:.3}/{res_blue:.3}{} susceptibility {sus_red:.3}/{sus_blue:.3}{}",
            if a { "" } else { " FAIL" },
            if b { "" } else { " FAIL" }
        ));
    }
    verdict(ok, notes.join("; "))
}

fn detailed_balance() -> Result<Verdict> {
    let mut ok = true;
    let mut notes = Vec::new();
    for t in [4.0, 40.0] {
        let bath = PhononBath::new(PhononBathParams::inas(t));
        let expected = (mev_to_rad_ps(1.0) / thermal_frequency(t)).exp();
        let red = weak_coupling_rates(&cavity(100.0, 65.0, -1.0), &bath)?;
        let blue = weak_coupling_rates(&cavity(100.0, 65.0, 1.0), &bath)?;
        let (r1, r2) = (
            red.to_cavity / red.to_exciton,
            blue.to_exciton / blue.to_cavity,
        );
        let (e1, e2) = (rel(r1, expected), rel(r2, expected));
        ok &= e1 < 1e-3 && e2 < 1e-3;
        notes.push(format!(
            "T={t}: ratio {r1:.5} / {r2:.5} vs {expected:.5} (rel err {e1:.1e}, {e2:.1e})"
        ));
    }
    verdict(ok, notes.join("; "))
}

/// S(0)/S(ω_s) of the best least-squares sum of two Lorentzians centered at
/// 0 and `cavity`, with both widths scanned on log grids.
fn two_lorentzian_ratio(s: &Spectrum, cavity: f64, sideband: f64) -> f64 {
    let lorentz = |w: f64, c: f64, fwhm: f64| {
        let h = 0.5 * fwhm;
        h * h / ((w - c).powi(2) + h * h)
    };
    let widths = |lo_uev: f64, hi_uev: f64| -> Vec<f64> {
        (0..=80)
            .map(|k| uev_to_rad_ps(lo_uev * (hi_uev / lo_uev).powf(k as f64 / 80.0)))
            .collect()
    };
    let mut best = (f64::INFINITY, 0.0);
    for &wz in &widths(10.0, 2000.0) {
        for &wc in &widths(100.0, 10000.0) {
            let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (&w, &y) in s.omega.iter().zip(&s.values) {
                let (f1, f2) = (lorentz(w, 0.0, wz), lorentz(w, cavity, wc));
                a11 += f1 * f1;
                a12 += f1 * f2;
                a22 += f2 * f2;
                b1 += f1 * y;
                b2 += f2 * y;
            }
            let det = a11 * a22 - a12 * a12;
            if det.abs() < 1e-300 {
                continue;
            }
            let (c1, c2) = ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det);
            let fit = |w: f64| c1 * lorentz(w, 0.0, wz) + c2 * lorentz(w, cavity, wc);
            let resid: f64 = s
                .omega
                .iter()
                .zip(&s.values)
                .map(|(&w, &y)| (fit(w) - y).powi(2))
                .sum();
            if resid < best.0 {
                best = (resid, fit(0.0) / fit(sideband));
            }
        }
    }
    best.1
}

fn low_q_consistency() -> Result<Verdict> {
    let cav = cavity(100.0, 2400.0, -2.0);
    let phonons = PhononBathParams::inas(4.0);
    let bath = PhononBath::new(phonons);
    let zpl = cavity_zpl();
    let grid = FrequencyGrid::from_mev(-4.0, 2.0, 601)?;
    let hierarchy = HierarchyConfig::default();

    let start = Instant::now();
    let modes = discretize_modes(&phonons, hierarchy.modes, hierarchy.omega_max)?;
    let ce =
        two_time_spectrum(&modes, &cav, &zpl, InitialCondition::InvertedAtom, &grid)?.coupled_mode;
    let ce_time = secs(start.elapsed());
    // The hierarchy carries the cavity Lamb shift intrinsically.
    let shifted = SpectrumOptions {
        include_lamb_shift: true,
        ..Default::default()
    };
    let res =
        emission_spectrum_projected(&PhotonReservoir::Cavity(cav), &zpl, &bath, &grid, &shifted)?
            .spectrum;
    let cqed = build_liouvillian(&cav, &bath, &zpl)?.coupled_mode_spectrum(&grid)?;

    let agreement = compare_spectra(&res, &ce).max_abs_diff;
    let sideband = mev_to_rad_ps(-2.0);
    let shape = |s: &Spectrum| {
        let measured = s.interpolate(0.0) / s.interpolate(sideband);
        rel(measured, two_lorentzian_ratio(s, cav.detuning, sideband))
    };
    let (res_shape, ce_shape) = (shape(&res), shape(&ce));
    // Relative gap wherever the reference carries at least 1% of its peak;
    // the absolute normalized gap is dominated by the shared ZPL.
    let cqed_gap = ce
        .omega
        .iter()
        .zip(&ce.values)
        .filter(|(_, &v)| v >= 0.01)
        .map(|(&w, &v)| (cqed.interpolate(w) - v).abs() / v)
        .fold(0.0, f64::max);
    verdict(
        agreement < 0.10 && res_shape > 0.2 && ce_shape > 0.2 && cqed_gap > 0.2 && ce_time <= 3600.0,
        format!(
            "G-res vs CM-ce {agreement:.4} (limit 0.10); ZPL/sideband off two-Lorentzian fit: G-res {res_shape:.2}, \
             CM-ce {ce_shape:.2} (need > 0.2); CM-cQED vs CM-ce max relative {cqed_gap:.3} (need > 0.2); corr-exp {ce_time:.0}s"
        ),
    )
}

fn independent_boson_oracle() -> Result<Verdict> {
    let phonons = PhononBathParams::inas(4.0);
    let bath = PhononBath::new(phonons);
    let zpl = ZplRates::from_uev(5.0, 55.0, 0.0);
    let modes = discretize_modes(&phonons, 200, mev_to_rad_ps(5.0))?;
    let h = assemble_hierarchy(&modes, &cavity(0.0, 65.0, 0.0), &zpl)?;
    let mut seed = HierarchyState::zeros(h.layout());
    seed.set_singlet(EXCITON, Complex64::new(1.0, 0.0));
    let trace = regression_trace(&h, &seed, EXCITON, 0.005, 10.0)?;
    let worst = trace
        .times()
        .zip(&trace.values)
        .map(|(t, v)| (v - (-0.5 * zpl.total() * t + bath.phi(t) - bath.phi0()).exp()).norm())
        .fold(0.0, f64::max);
    verdict(
        worst < 0.03,
        format!("max |P_ce - P_ibm| over 0..10 ps = {worst:.4} (limit 0.03)"),
    )
}

fn waveguide_phenomenology() -> Result<Verdict> {
    let band = CrowBand::standard(0.0);
    let zpl = ZplRates::from_uev(1.0, 1.0, 0.0);
    let mut ok = true;
    let mut notes = Vec::new();

    let grid = FrequencyGrid::from_mev(-6.0, 6.0, 4801)?;
    let warm = PhononBath::new(PhononBathParams::inas(40.0));
    let s = emission_spectrum_projected(
        &PhotonReservoir::Crow(band),
        &zpl,
        &warm,
        &grid,
        &SpectrumOptions::default(),
    )?
    .spectrum;
    let report = crow_peak_report(&s, &band, 0.0);
    let (lower, upper) = (
        report.lower_edge.unwrap_or(0.0),
        report.upper_edge.unwrap_or(0.0),
    );
    let three = report.count() == 3 && lower > upper;
    ok &= three;
    notes.push(format!(
        "T=40 peaks {} at {:.2?} meV, L0/U0 {:.3}",
        report.count(),
        report.positions_mev(),
        lower / upper
    ));

    let mut previous: Option<(f64, f64)> = None;
    let mut monotonic = true;
    let mut row = Vec::new();
    for t in [4.0, 10.0, 20.0, 40.0] {
        let r = feeding_ratio_row(
            &band,
            &PhononBathParams::inas(t),
            &zpl,
            &[0.0],
            RateModel::PhononDressed,
        )?[0];
        if let Some((u, l)) = previous {
            monotonic &= r.upper > u && r.lower > l;
        }
        previous = Some((r.upper, r.lower));
        row.push(format!("{t}K {:.3e}/{:.3e}", r.upper, r.lower));
    }
    ok &= monotonic;
    notes.push(format!("R_U/R_L {}", row.join(", ")));

    let half = 0.5 * CROW_BANDWIDTH_MEV;
    let chi = |edge_above_dot_mev: f64| -> Result<f64> {
        let r = PhotonReservoir::Crow(CrowBand::standard(mev_to_rad_ps(edge_above_dot_mev - half)));
        Ok(se_rate(&r, &warm)?.modification())
    };
    let (outside, inside) = (chi(-1.0)?, chi(0.3)?);
    ok &= outside > 1.0 && inside < 1.0;
    notes.push(format!(
        "chi 1 meV outside upper edge {outside:.3}, 0.3 meV inside {inside:.3}"
    ));

    let ratio_sum = |dephasing: f64| -> Result<f64> {
        let zpl = ZplRates { dephasing, ..zpl };
        Ok(feeding_ratio_row(
            &band,
            &PhononBathParams::inas(40.0),
            &zpl,
            &[0.0],
            RateModel::PhononDressed,
        )?[0]
            .sum())
    };
    let factor =
        ratio_sum(DephasingModel::LinearInTemperature.rate(40.0))? / ratio_sum(uev_to_rad_ps(1.0))?;
    ok &= (5.0..=20.0).contains(&factor);
    notes.push(format!(
        "T-dependent dephasing factor {factor:.2} (need 5..20)"
    ));
    verdict(ok, notes.join("; "))
}

fn exciton_population(cav: &LorentzianCavity, bath: &PhononBath, pump_uev: f64) -> Result<f64> {
    let rho =
        build_liouvillian(cav, bath, &ZplRates::from_uev(5.0, 55.0, pump_uev))?.steady_state()?;
    let sm = exciton_lowering();
    Ok((sm.adjoint() * &sm * rho).trace().re)
}

/// Pump (µeV) giving a steady exciton population of `target`, by bisection
/// on a log scale.
fn pump_for_population(cav: &LorentzianCavity, bath: &PhononBath, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-4f64.ln(), 1e4f64.ln());
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if exciton_population(cav, bath, mid.exp())? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn inverted_atom_equivalence() -> Result<Verdict> {
    let cav = cavity(100.0, 65.0, -1.0);
    let bath = PhononBath::new(PhononBathParams::inas(4.0));
    let grid = FrequencyGrid::from_mev(-1.5, 0.5, 601)?;
    let inverted = build_liouvillian(&cav, &bath, &ZplRates::from_uev(5.0, 55.0, 0.0))?
        .inverted_atom_spectrum(&grid)?;
    let mut notes = Vec::new();
    let mut diffs = Vec::new();
    for target in [0.01, 0.15] {
        let pump = pump_for_population(&cav, &bath, target)?;
        let pop = exciton_population(&cav, &bath, pump)?;
        let pumped = build_liouvillian(&cav, &bath, &ZplRates::from_uev(5.0, 55.0, pump))?
            .coupled_mode_spectrum(&grid)?;
        let d = compare_spectra(&pumped, &inverted).max_abs_diff;
        notes.push(format!("pump {pump:.3} ueV pop {pop:.4}: max diff {d:.4}"));
        diffs.push(d);
    }
    verdict(
        diffs[0] < 0.02 && diffs[1] > 0.02,
        notes.join("; ") + " (need < 0.02 then > 0.02)",
    )
}

type Criterion = (u32, &'static str, f64, fn() -> Result<Verdict>);

const CRITERIA: [Criterion; 11] = [
    (1, "displacement average", 1.0, displacement),
    (
        2,
        "zero-temperature closed forms",
        1.0,
        zero_temperature_closed_forms,
    ),
    (3, "phonon-free Purcell rate", 1.0, phonon_free_purcell),
    (4, "resonant doublet", 1810.0, resonant_doublet),
    (5, "Markov breakdown signature", 60.0, markov_breakdown),
    (
        6,
        "off-resonant feeding asymmetry",
        60.0,
        off_resonant_feeding,
    ),
    (7, "detailed balance", 10.0, detailed_balance),
    (8, "low-Q consistency", 3600.0, low_q_consistency),
    (
        9,
        "independent boson oracle",
        600.0,
        independent_boson_oracle,
    ),
    (
        10,
        "waveguide phenomenology",
        300.0,
        waveguide_phenomenology,
    ),
    (
        11,
        "inverted-atom equivalence",
        60.0,
        inverted_atom_equivalence,
    ),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (n, title, limit, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = secs(start.elapsed());
        let (passed, detail) = match outcome {
            Ok(v) => (v.passed && elapsed < limit, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let status = if passed { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {status} {title}: {detail} [{elapsed:.1}s, limit {limit:.0}s]");
        if !passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
