//! Configuration files and the three batch commands.
//!
//! Each command takes one JSON document. Relative paths inside it resolve
//! against the directory holding the config file. Outputs go to `--out`,
//! or next to the config when it is not given.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{self, Dtype};
use crate::metrics::{evaluate, EvaluationInputs, QualityReport};
use crate::operators::{Psf, SensorModel, DEFAULT_ETA_EPS_REL};
use crate::sim::{degrade_hx, degrade_pan, gaussian_psf, SimScenario};
use crate::solver::{ConvergenceReport, InitMode, PanSharpener, SolverConfig};

/// Spatial PSF as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PsfSpec {
    Delta,
    /// `q × q` block average.
    Average,
    Gaussian { sigma_rel: f64 },
}

impl PsfSpec {
    pub fn build(&self, q: usize) -> Result<Psf> {
        match self {
            PsfSpec::Delta => Ok(Psf::delta()),
            PsfSpec::Average => Ok(Psf::box_average(q)),
            PsfSpec::Gaussian { sigma_rel } => gaussian_psf(q, *sigma_rel),
        }
    }
}

/// Either `"uniform"` (weights `1/L`) or an explicit weight per band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Named(String),
    Explicit(Vec<f64>),
}

impl WeightSpec {
    pub fn build(&self, bands: usize) -> Result<Vec<f64>> {
        match self {
            WeightSpec::Named(name) if name == "uniform" => Ok(vec![1.0 / bands as f64; bands]),
            WeightSpec::Named(name) => Err(Error::Config(format!("unknown weight preset {name:?}"))),
            WeightSpec::Explicit(g) if g.len() == bands => Ok(g.clone()),
            WeightSpec::Explicit(g) => Err(Error::Config(format!(
                "g has {} entries for {} bands",
                g.len(),
                bands
            ))),
        }
    }
}

/// A scalar applied to every band, or one value per band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerBand {
    Scalar(f64),
    Bands(Vec<f64>),
}

impl PerBand {
    pub fn build(&self, bands: usize) -> Result<Vec<f64>> {
        match self {
            PerBand::Scalar(v) => Ok(vec![*v; bands]),
            PerBand::Bands(v) if v.len() == bands => Ok(v.clone()),
            PerBand::Bands(v) => Err(Error::Config(format!(
                "sigma_x has {} entries for {} bands",
                v.len(),
                bands
            ))),
        }
    }
}

fn default_psf() -> PsfSpec {
    PsfSpec::Average
}

fn default_g() -> WeightSpec {
    WeightSpec::Named("uniform".into())
}

/// Sensor block shared by all three configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub q: usize,
    #[serde(default = "default_psf")]
    pub psf: PsfSpec,
    #[serde(default = "default_g")]
    pub g: WeightSpec,
    #[serde(default = "zero_band")]
    pub sigma_x: PerBand,
    #[serde(default)]
    pub sigma_p: f64,
    #[serde(default)]
    pub offset: [usize; 2],
}

fn zero_band() -> PerBand {
    PerBand::Scalar(0.0)
}

impl SensorSpec {
    const KEYS: [&'static str; 6] = ["q", "psf", "g", "sigma_x", "sigma_p", "offset"];

    pub fn build(&self, bands: usize) -> Result<SensorModel> {
        if self.q == 0 {
            return Err(Error::Config("q must be >= 1".into()));
        }
        let mut model = SensorModel::new(
            self.q,
            self.psf.build(self.q)?,
            self.g.build(bands)?,
            self.sigma_x.build(bands)?,
            self.sigma_p,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        model.offset = (self.offset[0], self.offset[1]);
        model.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub reference: PathBuf,
    #[serde(flatten)]
    pub sensor: SensorSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dtype: Dtype,
}

impl SimulateConfig {
    const KEYS: [&'static str; 3] = ["reference", "seed", "dtype"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitSpec {
    Consistent,
    Measurements,
}

fn default_beta() -> f64 {
    SolverConfig::default().beta
}
fn default_gamma() -> f64 {
    SolverConfig::default().gamma
}
fn default_iters() -> usize {
    SolverConfig::default().max_iters
}
fn default_eps_rel() -> f64 {
    DEFAULT_ETA_EPS_REL
}
fn default_one() -> f64 {
    1.0
}
fn default_log_every() -> usize {
    1
}
fn default_init() -> InitSpec {
    InitSpec::Consistent
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpenConfig {
    pub x: PathBuf,
    pub p: PathBuf,
    #[serde(flatten)]
    pub sensor: SensorSpec,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default)]
    pub primal_tol: f64,
    #[serde(default = "default_eps_rel")]
    pub eps_rel: f64,
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    #[serde(default = "default_init")]
    pub init: InitSpec,
    #[serde(default = "default_one")]
    pub radius_scale: f64,
    #[serde(default)]
    pub dtype: Dtype,
    /// Output cube file name, relative to the output directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Convergence CSV file name, relative to the output directory.
    #[serde(default)]
    pub log: Option<PathBuf>,
}

impl SharpenConfig {
    const KEYS: [&'static str; 13] = [
        "x",
        "p",
        "beta",
        "gamma",
        "iters",
        "primal_tol",
        "eps_rel",
        "log_every",
        "init",
        "radius_scale",
        "dtype",
        "output",
        "log",
    ];

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            gamma: self.gamma,
            beta: self.beta,
            max_iters: self.iters,
            primal_tol: self.primal_tol,
            eps_rel: self.eps_rel,
            log_every: self.log_every,
            init: match self.init {
                InitSpec::Consistent => InitMode::Consistent,
                InitSpec::Measurements => InitMode::Measurements,
            },
            radius_scale: self.radius_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateConfig {
    pub estimate: PathBuf,
    #[serde(default)]
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub x: Option<PathBuf>,
    #[serde(default)]
    pub p: Option<PathBuf>,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub psf: Option<PsfSpec>,
    #[serde(default)]
    pub g: Option<WeightSpec>,
    #[serde(default)]
    pub offset: Option<[usize; 2]>,
}

impl EvaluateConfig {
    const KEYS: [&'static str; 8] = ["estimate", "reference", "x", "p", "q", "psf", "g", "offset"];
}

/// Rejects every key outside `allowed`, naming all of them at once.
fn check_keys(value: &Value, allowed: &[&str]) -> Result<()> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
    let unknown: Vec<&str> = obj
        .keys()
        .map(String::as_str)
        .filter(|k| !allowed.contains(k))
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown config keys: {}", unknown.join(", "))))
    }
}

fn load_config<T: DeserializeOwned>(path: &Path, allowed: &[&str]) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    check_keys(&value, allowed)?;
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

pub fn load_simulate_config(path: &Path) -> Result<SimulateConfig> {
    load_config(path, &keys(&[&SimulateConfig::KEYS, &SensorSpec::KEYS]))
}

pub fn load_sharpen_config(path: &Path) -> Result<SharpenConfig> {
    load_config(path, &keys(&[&SharpenConfig::KEYS, &SensorSpec::KEYS]))
}

pub fn load_evaluate_config(path: &Path) -> Result<EvaluateConfig> {
    load_config(path, &EvaluateConfig::KEYS)
}

fn config_dir(config: &Path) -> PathBuf {
    config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn output_dir(config: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| config_dir(config));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutputs {
    pub x: PathBuf,
    pub p: PathBuf,
    pub reference: PathBuf,
    pub manifest: PathBuf,
}

/// `simulate`: degrades a reference cube into `x.bin` and `p.bin`, copies the
/// reference next to them and writes `manifest.json`.
pub fn cmd_simulate(config_path: &Path, out: Option<&Path>) -> Result<SimulateOutputs> {
    let config = load_simulate_config(config_path)?;
    let base = config_dir(config_path);
    let reference_path = resolve(&base, &config.reference);
    let reference = io::read_cube(&reference_path)?;
    let model = config.sensor.build(reference.bands())?;
    let scenario = SimScenario::new(reference, model, config.seed)?;
    let x = degrade_hx(&scenario)?;
    let p = degrade_pan(&scenario)?;

    let dir = output_dir(config_path, out)?;
    let outputs = SimulateOutputs {
        x: dir.join("x.bin"),
        p: dir.join("p.bin"),
        reference: dir.join("reference.bin"),
        manifest: dir.join("manifest.json"),
    };
    io::write_cube(&x, &outputs.x, config.dtype)?;
    io::write_plane(&p, &outputs.p, config.dtype)?;
    io::write_cube(&scenario.reference, &outputs.reference, config.dtype)?;

    let model = &scenario.model;
    let manifest = json!({
        "command": "simulate",
        "source_reference": reference_path,
        "parameters": {
            "q": model.q,
            "psf": config.sensor.psf,
            "psf_weights": model.psf.weights(),
            "psf_size": [model.psf.height(), model.psf.width()],
            "psf_origin": [model.psf.origin().0, model.psf.origin().1],
            "g": model.g,
            "sigma_x": model.sigma_x,
            "sigma_p": model.sigma_p,
            "offset": [model.offset.0, model.offset.1],
            "seed": scenario.seed,
            "dtype": config.dtype,
        },
        "units": {
            "q": "high-resolution pixels per low-resolution pixel, per axis",
            "psf": "weights on the high-resolution grid, unit sum",
            "psf.sigma_rel": "multiples of q high-resolution pixels",
            "g": "dimensionless spectral weights",
            "sigma_x": "reflectance units (same as the reference samples), per band",
            "sigma_p": "reflectance units (same as the reference samples)",
            "offset": "[row, col] in high-resolution pixels within each q x q block",
        },
        "outputs": {
            "x": {"path": "x.bin", "width": x.width(), "height": x.height(), "bands": x.bands()},
            "p": {"path": "p.bin", "width": p.width(), "height": p.height()},
            "reference": {"path": "reference.bin"},
        },
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&outputs.manifest, text).map_err(|e| Error::io(&outputs.manifest, e))?;
    Ok(outputs)
}

#[derive(Debug, Clone)]
pub struct SharpenOutputs {
    pub estimate: PathBuf,
    pub log: PathBuf,
    pub report: ConvergenceReport,
}

/// `sharpen`: runs the solver and writes the estimate plus its convergence CSV.
pub fn cmd_sharpen(config_path: &Path, out: Option<&Path>) -> Result<SharpenOutputs> {
    let config = load_sharpen_config(config_path)?;
    let base = config_dir(config_path);
    let x = io::read_cube(resolve(&base, &config.x))?;
    let p = io::read_plane(resolve(&base, &config.p))?;
    let model = config.sensor.build(x.bands())?;
    let solver_config = config.solver_config();
    solver_config
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    let solver = PanSharpener::new(&x, &p, &model, &solver_config)?;
    let (u, report) = solver.run()?;

    let dir = output_dir(config_path, out)?;
    let estimate = dir.join(config.output.as_deref().unwrap_or(Path::new("u.bin")));
    let log = dir.join(config.log.as_deref().unwrap_or(Path::new("convergence.csv")));
    io::write_cube(&u, &estimate, config.dtype)?;
    report.write_csv(&log)?;
    Ok(SharpenOutputs {
        estimate,
        log,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct EvaluateOutputs {
    pub text: PathBuf,
    pub json: PathBuf,
    pub report: QualityReport,
}

/// `evaluate`: writes `report.txt` and `report.json` with every metric the
/// supplied inputs allow.
pub fn cmd_evaluate(config_path: &Path, out: Option<&Path>) -> Result<EvaluateOutputs> {
    let config = load_evaluate_config(config_path)?;
    if config.reference.is_none() && config.x.is_none() && config.p.is_none() {
        return Err(Error::NothingToEvaluate(
            "supply at least one of reference, x, p".into(),
        ));
    }
    let base = config_dir(config_path);
    let estimate = io::read_cube(resolve(&base, &config.estimate))?;
    let reference = config
        .reference
        .as_ref()
        .map(|p| io::read_cube(resolve(&base, p)))
        .transpose()?;
    let x = config
        .x
        .as_ref()
        .map(|p| io::read_cube(resolve(&base, p)))
        .transpose()?;
    let p = config
        .p
        .as_ref()
        .map(|p| io::read_plane(resolve(&base, p)))
        .transpose()?;

    let q = match (config.q, &x) {
        (Some(q), _) => q,
        (None, Some(x)) if x.width() > 0 && estimate.width() % x.width() == 0 => {
            estimate.width() / x.width()
        }
        _ => 1,
    };
    let model = if x.is_some() && p.is_some() {
        let spec = SensorSpec {
            q,
            psf: config.psf.clone().unwrap_or(PsfSpec::Average),
            g: config.g.clone().unwrap_or_else(default_g),
            sigma_x: PerBand::Scalar(0.0),
            sigma_p: 0.0,
            offset: config.offset.unwrap_or([0, 0]),
        };
        Some(spec.build(estimate.bands())?)
    } else {
        None
    };
    let report = evaluate(EvaluationInputs {
        estimate: &estimate,
        reference: reference.as_ref(),
        x: x.as_ref(),
        p: p.as_ref(),
        model: model.as_ref(),
        q,
    })?;
    if report.is_empty() {
        return Err(Error::NothingToEvaluate("no metric could be computed".into()));
    }

    let dir = output_dir(config_path, out)?;
    let text = dir.join("report.txt");
    let json = dir.join("report.json");
    fs::write(&text, report.to_text()).map_err(|e| Error::io(&text, e))?;
    fs::write(&json, report.to_json()).map_err(|e| Error::io(&json, e))?;
    Ok(EvaluateOutputs { text, json, report })
}

/// Flat key/value view of a manifest's parameters, handy for logging.
pub fn manifest_parameters(path: &Path) -> Result<BTreeMap<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let params = value
        .get("parameters")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Config("manifest has no parameters block".into()))?;
    Ok(params.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
}
