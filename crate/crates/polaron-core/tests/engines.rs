use polaron_core::analysis_scenarios::{
    compare_spectra, engine_spectrum, find_peaks, Engine, EngineSettings,
};
use polaron_core::correlation_expansion::HierarchyConfig;
use polaron_core::phonon_bath::PhononBathParams;
use polaron_core::photonic_reservoir::{LorentzianCavity, PhotonReservoir};
use polaron_core::reservoir_me::{SpectrumOptions, ZplRates};
use polaron_core::units_numerics::{mev_to_rad_ps, uev_to_rad_ps, FrequencyGrid, Spectrum};

fn cavity(g_uev: f64, kappa_uev: f64, detuning_mev: f64) -> LorentzianCavity {
    LorentzianCavity {
        detuning: mev_to_rad_ps(detuning_mev),
        kappa: uev_to_rad_ps(kappa_uev),
        coupling: uev_to_rad_ps(g_uev),
    }
}

fn settings(modes: usize) -> EngineSettings {
    EngineSettings {
        hierarchy: HierarchyConfig {
            modes,
            ..HierarchyConfig::default()
        },
        reservoir: SpectrumOptions {
            include_lamb_shift: true,
            ..SpectrumOptions::default()
        },
    }
}

fn spectra(
    engines: &[Engine],
    cav: LorentzianCavity,
    phonons: PhononBathParams,
    grid: &FrequencyGrid,
) -> Vec<Spectrum> {
    let zpl = ZplRates::from_uev(5.0, 55.0, 0.05);
    engines
        .iter()
        .map(|&e| {
            engine_spectrum(
                e,
                &PhotonReservoir::Cavity(cav),
                &phonons,
                &zpl,
                grid,
                &settings(60),
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn every_engine_returns_a_peak_normalized_spectrum() {
    let grid = FrequencyGrid::from_mev(-1.0, 1.0, 201).unwrap();
    let engines = [
        Engine::Reservoir,
        Engine::CqedWea,
        Engine::CqedFull,
        Engine::CorrExp,
        Engine::Susceptibility,
    ];
    for (e, s) in engines.iter().zip(spectra(
        &engines,
        cavity(50.0, 300.0, -0.5),
        PhononBathParams::inas(4.0),
        &grid,
    )) {
        let max = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((max - 1.0).abs() < 1e-12, "{e:?} peak {max}");
        assert!(s.values.iter().all(|v| v.is_finite()), "{e:?}");
    }
}

#[test]
fn phonon_free_polariton_engines_coincide() {
    let grid = FrequencyGrid::from_mev(-0.5, 0.5, 401).unwrap();
    let engines = [Engine::CqedWea, Engine::CqedFull, Engine::Susceptibility];
    let s = spectra(
        &engines,
        cavity(100.0, 65.0, 0.0),
        PhononBathParams::inas(4.0).without_coupling(),
        &grid,
    );
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let d = compare_spectra(&s[i], &s[j]).max_abs_diff;
            assert!(d < 1e-2, "{:?} vs {:?}: {d}", engines[i], engines[j]);
        }
    }
    assert_eq!(find_peaks(&s[0]).count(), 2);
}

#[test]
fn weak_coupling_engines_agree_with_the_reservoir_model() {
    let grid = FrequencyGrid::from_mev(-1.5, 0.5, 401).unwrap();
    let engines = [Engine::Reservoir, Engine::CqedWea, Engine::CorrExp];
    let s = spectra(
        &engines,
        cavity(20.0, 500.0, -1.0),
        PhononBathParams::inas(4.0),
        &grid,
    );
    // The hierarchy keeps non-Markovian sideband structure the rate models drop.
    for ((e, other), tol) in engines[1..].iter().zip(&s[1..]).zip([0.02, 0.06]) {
        let d = compare_spectra(&s[0], other).max_abs_diff;
        assert!(d < tol, "{e:?} vs reservoir: {d}");
    }
}

#[test]
fn comparison_is_symmetric() {
    let grid = FrequencyGrid::from_mev(-1.0, 1.0, 201).unwrap();
    let s = spectra(
        &[Engine::Reservoir, Engine::CqedWea],
        cavity(50.0, 300.0, -0.5),
        PhononBathParams::inas(4.0),
        &grid,
    );
    let (ab, ba) = (compare_spectra(&s[0], &s[1]), compare_spectra(&s[1], &s[0]));
    assert_eq!(ab.max_abs_diff, ba.max_abs_diff);
    assert_eq!(ab.l2_distance, ba.l2_distance);
}
