//! Command implementations behind the `polaron-spectra` binary.

pub mod scenario;

use polaron_core::analysis_scenarios::{
    compare_spectra, engine_spectrum, map_table, run_figure, sweep_feeding_map, CsvTable,
    FigureName, FigureOptions,
};
use polaron_core::cqed_me::scattering_rates;
use polaron_core::phonon_bath::PhononBath;
use polaron_core::photonic_reservoir::PhotonReservoir;
use polaron_core::reservoir_me::se_rate;
use polaron_core::units_numerics::{mev_to_rad_ps, rad_ps_to_uev, uev_to_rad_ps, Spectrum};
use polaron_core::PolaronError;
use scenario::{parse_scenario, Scenario, ScenarioError};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] PolaronError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Scenario(ScenarioError::Schema { .. }) => "schema",
            CliError::Scenario(ScenarioError::Range { .. }) => "range",
            CliError::Engine(PolaronError::InvalidParameter { .. }) => "range",
            CliError::Engine(PolaronError::UnsupportedReservoir { .. }) => "schema",
            CliError::Engine(e) if e.is_convergence_failure() => "convergence",
            CliError::Engine(_) => "numeric",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    /// 2 for bad input, 3 for numeric failure, 4 for non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "numeric" => 3,
            "convergence" => 4,
            _ => 2,
        }
    }

    pub fn path(&self) -> Option<String> {
        match self {
            CliError::Scenario(
                ScenarioError::Schema { path, .. } | ScenarioError::Range { path, .. },
            ) => Some(path.clone()),
            CliError::Engine(PolaronError::InvalidParameter { name, .. }) => Some(name.to_string()),
            CliError::Io { path, .. } => Some(path.display().to_string()),
            _ => None,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json(&self) -> String {
        json!({"category": self.category(), "message": self.to_string(), "path": self.path()})
            .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn load_scenario(path: &Path) -> CliResult<(String, Scenario)> {
    let raw = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let s = parse_scenario(&raw)?;
    Ok((raw, s))
}

fn write_file(path: &Path, body: &str) -> CliResult<PathBuf> {
    std::fs::write(path, body).map_err(|e| io_error(path, e))?;
    Ok(path.to_path_buf())
}

fn output_dir(s: &Scenario, out: Option<&Path>) -> CliResult<PathBuf> {
    let dir = out.map_or_else(|| s.output_dir.clone(), Path::to_path_buf);
    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    Ok(dir)
}

/// Record of one invocation: the arguments, the resolved scenario and the
/// raw input it came from, plus timings and written files.
struct Manifest {
    fields: Map<String, Value>,
    timings: Map<String, Value>,
}

impl Manifest {
    fn new(argv: &[String]) -> Self {
        let mut fields = Map::new();
        fields.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        fields.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        fields.insert("command".into(), json!(argv));
        fields.insert("threads".into(), json!(rayon::current_num_threads()));
        Self {
            fields,
            timings: Map::new(),
        }
    }

    fn scenario(mut self, raw: &str, s: &Scenario) -> Self {
        self.fields.insert("input".into(), json!(raw));
        self.fields.insert(
            "scenario".into(),
            serde_json::to_value(s).expect("scenario serializes"),
        );
        self
    }

    fn set(&mut self, key: &str, value: Value) {
        self.fields.insert(key.into(), value);
    }

    fn time<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings
            .insert(label.into(), json!(start.elapsed().as_secs_f64()));
        out
    }

    fn write(mut self, dir: &Path, outputs: &[PathBuf]) -> CliResult<PathBuf> {
        self.fields
            .insert("timings_s".into(), Value::Object(self.timings));
        let files: Vec<String> = outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
            })
            .collect();
        self.fields.insert("outputs".into(), json!(files));
        let body =
            serde_json::to_string_pretty(&Value::Object(self.fields)).expect("manifest serializes");
        write_file(&dir.join(MANIFEST_FILE), &(body + "\n"))
    }
}

fn metric_row(pair: &str, a: &Spectrum, b: &Spectrum) -> String {
    let m = compare_spectra(a, b);
    format!(
        "{pair},{:.8e},{:.8e},{},{}\n",
        m.max_abs_diff, m.l2_distance, m.maxima_a, m.maxima_b
    )
}

const METRIC_HEADER: &str = "pair,max_abs_diff,l2_distance,maxima_a,maxima_b\n";

/// Runs every engine of the scenario; writes one spectrum per engine,
/// pairwise metrics and the manifest. Returns the written paths.
pub fn simulate(
    scenario_path: &Path,
    out: Option<&Path>,
    argv: &[String],
) -> CliResult<Vec<PathBuf>> {
    let (raw, s) = load_scenario(scenario_path)?;
    let dir = output_dir(&s, out)?;
    let mut manifest = Manifest::new(argv).scenario(&raw, &s);
    let (reservoir, phonons, zpl, grid, settings) = (
        s.reservoir(),
        s.phonon_params(),
        s.zpl_rates(),
        s.frequency_grid(),
        s.engine_settings(),
    );
    let mut spectra = Vec::new();
    let mut written = Vec::new();
    for engine in s.engines() {
        let spectrum = manifest.time(engine.name(), || {
            engine_spectrum(engine, &reservoir, &phonons, &zpl, &grid, &settings)
        })?;
        let table = CsvTable::spectrum(format!("spectrum_{}.csv", engine.name()), &spectrum);
        written.push(write_file(&dir.join(&table.file_name), &table.to_csv())?);
        spectra.push((engine, spectrum));
    }
    if spectra.len() > 1 {
        let mut body = String::from(METRIC_HEADER);
        for (i, (ea, a)) in spectra.iter().enumerate() {
            for (eb, b) in &spectra[i + 1..] {
                body.push_str(&metric_row(&format!("{}|{}", ea.name(), eb.name()), a, b));
            }
        }
        written.push(write_file(&dir.join("comparisons.csv"), &body)?);
    }
    written.push(manifest.write(&dir, &written)?);
    Ok(written)
}

/// `quantity,value` table of the rates governing the scenario, in µeV.
pub fn rates_table(s: &Scenario) -> CliResult<String> {
    let bath = PhononBath::new(s.phonon_params());
    let mut rows: Vec<(&str, f64)> = vec![("mean_displacement", bath.mean_displacement())];
    match s.reservoir() {
        PhotonReservoir::Cavity(cav) => {
            let r = scattering_rates(&cav, &bath)?;
            let u = rad_ps_to_uev;
            rows.extend([
                ("dressed_coupling_ueV", u(r.dressed_coupling)),
                ("rabi_ueV", u(r.rabi)),
                ("to_cavity_ueV", u(r.to_cavity)),
                ("to_exciton_ueV", u(r.to_exciton)),
                ("to_cavity_shift_ueV", u(r.to_cavity_shift)),
                ("to_exciton_shift_ueV", u(r.to_exciton_shift)),
                ("cross_dephasing_re_ueV", u(r.cross_dephasing.re)),
                ("cross_dephasing_im_ueV", u(r.cross_dephasing.im)),
                ("m1_re_ueV", u(r.m1.re)),
                ("m1_im_ueV", u(r.m1.im)),
                ("m2_re_ueV", u(r.m2.re)),
                ("m2_im_ueV", u(r.m2.im)),
            ]);
        }
        reservoir @ PhotonReservoir::Crow(_) => {
            let r = se_rate(&reservoir, &bath)?;
            rows.extend([
                ("dressed_rate_ueV", rad_ps_to_uev(r.rate)),
                ("bare_rate_ueV", rad_ps_to_uev(r.bare_rate)),
                ("lamb_shift_ueV", rad_ps_to_uev(r.lamb_shift)),
                ("rate_modification", r.modification()),
            ]);
        }
    }
    let mut out = String::from("quantity,value\n");
    for (q, v) in rows {
        out.push_str(&format!("{q},{v:.8e}\n"));
    }
    Ok(out)
}

/// Writes `rates.csv` and the manifest; returns the table.
pub fn rates(scenario_path: &Path, out: Option<&Path>, argv: &[String]) -> CliResult<String> {
    let (raw, s) = load_scenario(scenario_path)?;
    let mut manifest = Manifest::new(argv).scenario(&raw, &s);
    let table = manifest.time("rates", || rates_table(&s))?;
    let dir = output_dir(&s, out)?;
    let path = write_file(&dir.join("rates.csv"), &table)?;
    manifest.write(&dir, &[path])?;
    Ok(table)
}

/// Computes the feeding map of a waveguide scenario on `parallel` worker
/// threads (the global pool when `None`).
pub fn sweep(
    scenario_path: &Path,
    out: Option<&Path>,
    parallel: Option<usize>,
    argv: &[String],
) -> CliResult<PathBuf> {
    let (raw, s) = load_scenario(scenario_path)?;
    let band = s.crow_band().ok_or_else(|| ScenarioError::Schema {
        path: "crow".into(),
        message: "sweep needs a `crow` reservoir".into(),
    })?;
    let (Some(sw), Some(detunings)) = (s.sweep.as_ref(), s.sweep_detunings()) else {
        return Err(ScenarioError::Schema {
            path: "sweep".into(),
            message: "sweep needs a `sweep` section".into(),
        }
        .into());
    };
    let mut manifest = Manifest::new(argv).scenario(&raw, &s);
    let radiative = uev_to_rad_ps(s.zpl.radiative_uev);
    let run = || {
        sweep_feeding_map(
            &band,
            &s.phonon_params(),
            radiative,
            &sw.temperatures_k,
            &detunings,
            s.dephasing_model(),
        )
    };
    let map = match parallel {
        Some(n) => {
            if n == 0 {
                return Err(CliError::Usage("--parallel must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
            manifest.set("threads", json!(n));
            manifest.time("sweep", || pool.install(run))?
        }
        None => manifest.time("sweep", run)?,
    };
    let dir = output_dir(&s, out)?;
    let table = map_table("feeding_map.csv", &map);
    let path = write_file(&dir.join(&table.file_name), &table.to_csv())?;
    manifest.write(&dir, &[path.clone()])?;
    Ok(path)
}

/// Regenerates one figure's data, comparison metrics and plot script.
pub fn figure(
    name: &str,
    out: &Path,
    points: Option<usize>,
    modes: Option<usize>,
    argv: &[String],
) -> CliResult<Vec<PathBuf>> {
    let fig: FigureName = name.parse().map_err(CliError::Usage)?;
    let mut options = FigureOptions::default();
    if let Some(p) = points {
        options.points = p;
    }
    if let Some(m) = modes {
        options.hierarchy.modes = m;
    }
    let mut manifest = Manifest::new(argv);
    manifest.set("figure", json!(fig.name()));
    manifest.set("points", json!(options.points));
    manifest.set("modes", json!(options.hierarchy.modes));
    manifest.set(
        "scenario",
        serde_json::to_value(parse_scenario(&json!({"preset": fig.name()}).to_string())?)
            .expect("scenario serializes"),
    );
    let bundle = manifest.time(fig.name(), || run_figure(fig, &options))?;
    let mut written = bundle.write(out).map_err(|e| io_error(out, e))?;
    written.push(manifest.write(out, &written)?);
    Ok(written)
}

fn read_spectrum(path: &Path) -> CliResult<Spectrum> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let (mut omega, mut values) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_error(path, e))?;
        let field = |k: usize| -> CliResult<f64> {
            record
                .get(k)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| {
                    io_error(
                        path,
                        format!("row {}: column {} is not a number", i + 1, k + 1),
                    )
                })
        };
        omega.push(mev_to_rad_ps(field(0)?));
        values.push(field(1)?);
    }
    if omega.len() < 2 {
        return Err(io_error(path, "needs at least two data rows"));
    }
    Ok(Spectrum::new(omega, values))
}

/// Metrics of two `omega_meV,S` CSV spectra, evaluated on the grid of `a`.
pub fn compare(a: &Path, b: &Path) -> CliResult<String> {
    let (sa, sb) = (read_spectrum(a)?, read_spectrum(b)?);
    let pair = format!("{}|{}", a.display(), b.display());
    Ok(format!("{METRIC_HEADER}{}", metric_row(&pair, &sa, &sb)))
}
