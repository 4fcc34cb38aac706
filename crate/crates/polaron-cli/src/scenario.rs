//! JSON scenario documents: presets, defaults, schema and range checks.

use polaron_core::analysis_scenarios::{
    DephasingModel, Engine, EngineSettings, FigureName, WEAK_PUMP_UEV,
};
use polaron_core::correlation_expansion::HierarchyConfig;
use polaron_core::phonon_bath::PhononBathParams;
use polaron_core::photonic_reservoir::{
    edge_damping_for_width, CrowBand, EdgeShift, LorentzianCavity, PhotonReservoir,
    CROW_BANDWIDTH_MEV, CROW_COUPLING_UEV, CROW_EDGE_WIDTH_UEV, OPTICAL_ENERGY_MEV,
};
use polaron_core::reservoir_me::{SpectrumOptions, ZplRates};
use polaron_core::units_numerics::{mev_to_rad_ps, uev_to_rad_ps, FrequencyGrid};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScenarioError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("value {value} out of range at `{path}`")]
    Range { path: String, value: f64 },
}

fn schema(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySpec {
    #[serde(rename = "g_ueV")]
    pub g_uev: f64,
    #[serde(rename = "kappa_meV")]
    pub kappa_mev: f64,
    /// ω_c − ω_x′.
    #[serde(rename = "detuning_meV")]
    pub detuning_mev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrowSpec {
    /// Band center minus exciton.
    #[serde(rename = "center_offset_meV")]
    pub center_offset_mev: f64,
    #[serde(rename = "coupling_ueV")]
    pub coupling_uev: f64,
    #[serde(rename = "bandwidth_meV")]
    pub bandwidth_mev: f64,
    #[serde(rename = "edge_width_ueV")]
    pub edge_width_uev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononSpec {
    pub alpha_ps2: f64,
    #[serde(rename = "cutoff_meV")]
    pub cutoff_mev: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZplSpec {
    #[serde(rename = "gamma0_ueV")]
    pub radiative_uev: f64,
    #[serde(rename = "gamma_d_ueV")]
    pub dephasing_uev: f64,
    #[serde(rename = "pump_ueV")]
    pub pump_uev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "start_meV")]
    pub start_mev: f64,
    #[serde(rename = "end_meV")]
    pub end_mev: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DephasingSpec {
    /// γ_d from the `zpl` section at every temperature.
    Constant,
    /// γ_d = 1 + 0.95(T − 1) µeV.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "temperatures_K")]
    pub temperatures_k: Vec<f64>,
    /// Dot minus band center.
    #[serde(rename = "detuning_start_meV")]
    pub detuning_start_mev: f64,
    #[serde(rename = "detuning_end_meV")]
    pub detuning_end_mev: f64,
    pub detuning_points: usize,
    pub dephasing: DephasingSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySpec {
    pub modes: usize,
    #[serde(rename = "omega_max_meV")]
    pub omega_max_mev: f64,
}

/// Fully resolved scenario. Serializing it gives a document that parses
/// back to the same scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub engines: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crow: Option<CrowSpec>,
    pub phonons: PhononSpec,
    pub zpl: ZplSpec,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    pub hierarchy: HierarchySpec,
    /// Shift the reservoir engine's zero-phonon line by the reservoir Lamb shift.
    pub lamb_shift: bool,
    pub output_dir: PathBuf,
}

fn defaults() -> Value {
    let inas = PhononBathParams::inas(4.0);
    json!({
        "engines": ["reservoir"],
        "phonons": {
            "alpha_ps2": inas.coupling_ps2,
            "cutoff_meV": polaron_core::units_numerics::rad_ps_to_mev(inas.cutoff),
            "temperature_K": 4.0
        },
        "zpl": {"gamma0_ueV": 5.0, "gamma_d_ueV": 55.0, "pump_ueV": WEAK_PUMP_UEV},
        "grid": {"start_meV": -1.0, "end_meV": 1.0, "points": 401},
        "hierarchy": {"modes": 150, "omega_max_meV": 5.0},
        "lamb_shift": false,
        "output_dir": "polaron-out"
    })
}

fn crow_defaults() -> Value {
    json!({
        "center_offset_meV": 0.0,
        "coupling_ueV": CROW_COUPLING_UEV,
        "bandwidth_meV": CROW_BANDWIDTH_MEV,
        "edge_width_ueV": CROW_EDGE_WIDTH_UEV
    })
}

/// Scenario fragment reproducing a figure caption.
pub fn preset(name: FigureName) -> Value {
    let c = name.caption();
    let phonons = json!({"temperature_K": c.temperature_k});
    let zpl = json!({"gamma0_ueV": c.radiative_uev, "gamma_d_ueV": c.dephasing_uev});
    let cavity = |engines: &[&str], lo: f64, hi: f64| {
        json!({
            "engines": engines,
            "cavity": {"g_ueV": c.coupling_uev, "kappa_meV": c.kappa_uev / 1000.0, "detuning_meV": c.detuning_mev},
            "phonons": phonons,
            "zpl": zpl,
            "grid": {"start_meV": lo, "end_meV": hi, "points": 601}
        })
    };
    let crow = json!({
        "engines": ["reservoir"],
        "crow": {"center_offset_meV": 0.0},
        "phonons": phonons,
        "zpl": {"gamma0_ueV": c.radiative_uev, "gamma_d_ueV": c.dephasing_uev, "pump_ueV": 0.0},
        "grid": {"start_meV": -6.0, "end_meV": 6.0, "points": 4801}
    });
    match name {
        FigureName::Fig3 => {
            let mut v = cavity(&["reservoir"], -3.0, 3.0);
            v["cavity"]["kappa_meV"] = json!(0.065);
            v
        }
        FigureName::Fig4 => cavity(&["cqed-wea", "corr-exp", "susceptibility"], -0.5, 0.5),
        FigureName::Fig5 => cavity(&["cqed-full", "corr-exp"], -0.5, 0.5),
        FigureName::Fig6 | FigureName::Fig7 => {
            let (lo, hi) = if name == FigureName::Fig6 {
                (-3.0, 1.0)
            } else {
                (-4.0, 2.0)
            };
            let mut v = cavity(
                &["corr-exp", "cqed-full", "reservoir", "susceptibility"],
                lo,
                hi,
            );
            v["lamb_shift"] = json!(true);
            v
        }
        FigureName::Fig8 => cavity(&["reservoir", "susceptibility"], -5.0, 5.0),
        FigureName::Fig15 => cavity(&["cqed-full"], -1.5, 0.5),
        FigureName::Fig9 | FigureName::Fig10 | FigureName::Fig11 | FigureName::Fig12 => crow,
        FigureName::Fig13 => {
            let mut v = crow;
            v["sweep"] = json!({
                "temperatures_K": (0..14).map(|i| 1.0 + 3.0 * i as f64).collect::<Vec<_>>(),
                "detuning_start_meV": -6.0,
                "detuning_end_meV": 6.0,
                "detuning_points": 121,
                "dephasing": "linear"
            });
            v
        }
    }
}

/// Recursively lays `top` over `base`; non-object values replace.
fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses a scenario document: the optional `preset` is expanded first,
/// explicit fields override it, and defaults fill the rest.
pub fn parse_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let mut user: Value = serde_json::from_str(document).map_err(|e| schema("", e.to_string()))?;
    let Value::Object(map) = &mut user else {
        return Err(schema("", "scenario must be a JSON object"));
    };
    let mut merged = defaults();
    if let Some(p) = map.remove("preset") {
        let name = p
            .as_str()
            .ok_or_else(|| schema("preset", "expected a figure name string"))?;
        let fig: FigureName = name.parse().map_err(|e: String| schema("preset", e))?;
        overlay(&mut merged, preset(fig));
    }
    overlay(&mut merged, user);
    let has = |k: &str| merged.get(k).is_some_and(|v| !v.is_null());
    match (has("cavity"), has("crow")) {
        (false, false) => return Err(schema("cavity", "one of `cavity` or `crow` is required")),
        (true, true) => return Err(schema("crow", "`cavity` and `crow` are mutually exclusive")),
        (false, true) => {
            let mut crow = crow_defaults();
            overlay(&mut crow, merged["crow"].take());
            merged["crow"] = crow;
        }
        (true, false) => {}
    }
    let scenario: Scenario = serde_path_to_error::deserialize(&merged).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, e.into_inner().to_string())
    })?;
    scenario.validate()?;
    Ok(scenario)
}

fn check(path: &str, value: f64, ok: bool) -> Result<(), ScenarioError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::Range {
            path: path.to_string(),
            value,
        })
    }
}

impl Scenario {
    fn validate(&self) -> Result<(), ScenarioError> {
        if self.engines.is_empty() {
            return Err(schema("engines", "at least one engine is required"));
        }
        for (i, e) in self.engines.iter().enumerate() {
            let engine = e
                .parse::<Engine>()
                .map_err(|m| schema(&format!("engines[{i}]"), m))?;
            if self.crow.is_some() && engine != Engine::Reservoir {
                return Err(schema(
                    &format!("engines[{i}]"),
                    format!("engine `{e}` needs a `cavity` reservoir"),
                ));
            }
        }
        if let Some(c) = &self.cavity {
            check("cavity.g_ueV", c.g_uev, c.g_uev >= 0.0)?;
            check("cavity.kappa_meV", c.kappa_mev, c.kappa_mev > 0.0)?;
            check("cavity.detuning_meV", c.detuning_mev, true)?;
        }
        if let Some(c) = &self.crow {
            check("crow.center_offset_meV", c.center_offset_mev, true)?;
            check("crow.coupling_ueV", c.coupling_uev, c.coupling_uev >= 0.0)?;
            check("crow.bandwidth_meV", c.bandwidth_mev, c.bandwidth_mev > 0.0)?;
            check(
                "crow.edge_width_ueV",
                c.edge_width_uev,
                c.edge_width_uev > 0.0,
            )?;
        }
        let p = &self.phonons;
        check("phonons.alpha_ps2", p.alpha_ps2, p.alpha_ps2 >= 0.0)?;
        check("phonons.cutoff_meV", p.cutoff_mev, p.cutoff_mev > 0.0)?;
        check(
            "phonons.temperature_K",
            p.temperature_k,
            p.temperature_k >= 0.0,
        )?;
        let z = &self.zpl;
        check("zpl.gamma0_ueV", z.radiative_uev, z.radiative_uev >= 0.0)?;
        check("zpl.gamma_d_ueV", z.dephasing_uev, z.dephasing_uev >= 0.0)?;
        check("zpl.pump_ueV", z.pump_uev, z.pump_uev >= 0.0)?;
        let g = &self.grid;
        check("grid.start_meV", g.start_mev, true)?;
        check("grid.end_meV", g.end_mev, g.end_mev > g.start_mev)?;
        check("grid.points", g.points as f64, g.points >= 2)?;
        let h = &self.hierarchy;
        check("hierarchy.modes", h.modes as f64, h.modes >= 10)?;
        check(
            "hierarchy.omega_max_meV",
            h.omega_max_mev,
            h.omega_max_mev > 0.0,
        )?;
        if let Some(s) = &self.sweep {
            if s.temperatures_k.is_empty() {
                return Err(schema(
                    "sweep.temperatures_K",
                    "at least one temperature is required",
                ));
            }
            for (i, &t) in s.temperatures_k.iter().enumerate() {
                check(&format!("sweep.temperatures_K[{i}]"), t, t >= 0.0)?;
            }
            check("sweep.detuning_start_meV", s.detuning_start_mev, true)?;
            let n = s.detuning_points;
            check("sweep.detuning_points", n as f64, n >= 1)?;
            check(
                "sweep.detuning_end_meV",
                s.detuning_end_mev,
                n == 1 || s.detuning_end_mev > s.detuning_start_mev,
            )?;
        }
        Ok(())
    }

    pub fn engines(&self) -> Vec<Engine> {
        self.engines
            .iter()
            .map(|e| e.parse().expect("validated"))
            .collect()
    }

    pub fn reservoir(&self) -> PhotonReservoir {
        if let Some(c) = &self.cavity {
            return PhotonReservoir::Cavity(LorentzianCavity {
                detuning: mev_to_rad_ps(c.detuning_mev),
                kappa: mev_to_rad_ps(c.kappa_mev),
                coupling: uev_to_rad_ps(c.g_uev),
            });
        }
        PhotonReservoir::Crow(self.crow_band().expect("validated: cavity or crow"))
    }

    pub fn crow_band(&self) -> Option<CrowBand> {
        self.crow.as_ref().map(|c| {
            let half = 0.5 * mev_to_rad_ps(c.bandwidth_mev);
            let center = mev_to_rad_ps(c.center_offset_mev);
            let damping = edge_damping_for_width(uev_to_rad_ps(c.edge_width_uev));
            CrowBand {
                lower_edge: center - half,
                upper_edge: center + half,
                lower_damping: damping,
                upper_damping: damping,
                coupling: uev_to_rad_ps(c.coupling_uev),
                carrier: mev_to_rad_ps(OPTICAL_ENERGY_MEV),
                edge_shift: EdgeShift::Damping,
            }
        })
    }

    pub fn phonon_params(&self) -> PhononBathParams {
        let p = &self.phonons;
        PhononBathParams::new(p.alpha_ps2, mev_to_rad_ps(p.cutoff_mev), p.temperature_k)
            .expect("validated phonon parameters")
    }

    pub fn zpl_rates(&self) -> ZplRates {
        ZplRates::from_uev(
            self.zpl.radiative_uev,
            self.zpl.dephasing_uev,
            self.zpl.pump_uev,
        )
    }

    pub fn frequency_grid(&self) -> FrequencyGrid {
        FrequencyGrid::from_mev(self.grid.start_mev, self.grid.end_mev, self.grid.points)
            .expect("validated grid")
    }

    pub fn engine_settings(&self) -> EngineSettings {
        EngineSettings {
            hierarchy: HierarchyConfig {
                modes: self.hierarchy.modes,
                omega_max: mev_to_rad_ps(self.hierarchy.omega_max_mev),
                ..HierarchyConfig::default()
            },
            reservoir: SpectrumOptions {
                include_lamb_shift: self.lamb_shift,
                ..Default::default()
            },
        }
    }

    /// Sweep detunings in rad/ps.
    pub fn sweep_detunings(&self) -> Option<Vec<f64>> {
        self.sweep.as_ref().map(|s| {
            let n = s.detuning_points;
            let step = if n > 1 {
                (s.detuning_end_mev - s.detuning_start_mev) / (n - 1) as f64
            } else {
                0.0
            };
            (0..n)
                .map(|i| mev_to_rad_ps(s.detuning_start_mev + step * i as f64))
                .collect()
        })
    }

    pub fn dephasing_model(&self) -> DephasingModel {
        match self.sweep.as_ref().map(|s| s.dephasing) {
            Some(DephasingSpec::Linear) => DephasingModel::LinearInTemperature,
            _ => DephasingModel::Constant(uev_to_rad_ps(self.zpl.dephasing_uev)),
        }
    }
}
