//! Named, reproducible simulation runs.
//!
//! A scenario file is TOML with the sections `[model]`, `[drive]`, `[state]`,
//! `[solver]`, `[analysis]` and `[output]`. Lengths in `[model]` are given
//! in nanometres (`*_nm` keys) and converted to SI here; everything else is
//! SI (Ω, A, V, Hz, s). `[model].params_file` names a TOML file of parameter
//! values, resolved against the scenario's directory, which the inline keys
//! override.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{analyze, AnalysisOptions, AnalysisReport};
use crate::drive::DriveSignal;
use crate::error::{Error, Result};
use crate::models::{DeviceState, ModelParams, PickettParams, StrukovParams, YangParams};
use crate::solver::{integrate, SolverConfig};
use crate::trace::{Sample, Trace, TraceMeta};

/// `R_OFF / R_ON` shared by the replication scenarios.
pub const PAPER_TRANSFER_RATIO: f64 = 160.0;

const NM: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrukovConfig {
    mu_v: f64,
    r_on: f64,
    r_off: f64,
    d_nm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct YangConfig {
    alpha: f64,
    m: u32,
    beta: f64,
    delta: f64,
    chi: f64,
    gamma: f64,
    n: u32,
    overflow_cap: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PickettConfig {
    f_off: f64,
    i_off: f64,
    a_off_nm: f64,
    f_on: f64,
    i_on: f64,
    a_on_nm: f64,
    b: f64,
    w_c_nm: f64,
    r_s: f64,
    phi_0: Option<f64>,
    w_1_nm: Option<f64>,
    current_scale: Option<f64>,
    overflow_cap: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ModelConfig {
    Strukov(StrukovConfig),
    Yang(YangConfig),
    Pickett(PickettConfig),
}

impl ModelConfig {
    fn into_params(self) -> ModelParams {
        let cap = crate::models::DEFAULT_OVERFLOW_CAP;
        match self {
            ModelConfig::Strukov(c) => ModelParams::Strukov(StrukovParams {
                mu_v: c.mu_v,
                r_on: c.r_on,
                r_off: c.r_off,
                d: c.d_nm * NM,
            }),
            ModelConfig::Yang(c) => ModelParams::Yang(YangParams {
                alpha: c.alpha,
                m: c.m,
                beta: c.beta,
                delta: c.delta,
                chi: c.chi,
                gamma: c.gamma,
                n: c.n,
                overflow_cap: c.overflow_cap.unwrap_or(cap),
            }),
            ModelConfig::Pickett(c) => ModelParams::Pickett(PickettParams {
                f_off: c.f_off,
                i_off: c.i_off,
                a_off: c.a_off_nm * NM,
                f_on: c.f_on,
                i_on: c.i_on,
                a_on: c.a_on_nm * NM,
                b: c.b,
                w_c: c.w_c_nm * NM,
                r_s: c.r_s,
                phi_0: c.phi_0.unwrap_or(0.95),
                w_1: c.w_1_nm.unwrap_or(0.1261) * NM,
                current_scale: c.current_scale.unwrap_or(1.0),
                overflow_cap: c.overflow_cap.unwrap_or(cap),
            }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateConfig {
    w0: f64,
    w_min: f64,
    w_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Also write two-column I-V, w-t and dw/dt-v files.
    #[serde(default = "default_true")]
    pub plots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            plots: true,
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    replicates_paper: bool,
    model: ModelConfig,
    drive: DriveSignal,
    state: StateConfig,
    solver: SolverConfig,
    #[serde(default)]
    analysis: AnalysisOptions,
    #[serde(default)]
    output: OutputConfig,
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub replicates_paper: bool,
    pub model: ModelParams,
    pub drive: DriveSignal,
    pub initial: DeviceState,
    pub solver: SolverConfig,
    pub analysis: AnalysisOptions,
    pub output: OutputConfig,
    /// Non-fatal validation findings.
    pub warnings: Vec<String>,
    /// Merged source document (parameter file inlined) used for sweeps and hashing.
    doc: toml::Table,
}

/// Run provenance written next to each trace; also everything `analyze`
/// needs to rebuild the report from the CSV alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub scenario: String,
    pub config_hash: String,
    pub trace: TraceMeta,
    pub analysis: AnalysisOptions,
    pub note: String,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_str_in(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses scenario text; relative parameter-file paths resolve against `base`.
    pub fn from_str_in(text: &str, base: &Path) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        inline_params_file(&mut doc, base)?;
        Self::from_table(doc)
    }

    fn from_table(doc: toml::Table) -> Result<Self> {
        let file: ScenarioFile = toml::Value::Table(doc.clone())
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        if file.name.trim().is_empty() {
            return Err(config_err("scenario name is empty"));
        }
        let model = file.model.into_params();
        model.validate()?;
        file.drive.validate()?;
        file.solver.validate()?;
        file.analysis.validate()?;
        let initial = DeviceState::new(file.state.w0, file.state.w_min, file.state.w_max)?;
        model.check_state(&initial)?;

        let mut warnings = Vec::new();
        if file.replicates_paper {
            if let ModelParams::Strukov(p) = &model {
                let ratio = p.transfer_ratio();
                if (ratio - PAPER_TRANSFER_RATIO).abs() > 1e-9 * PAPER_TRANSFER_RATIO {
                    warnings.push(format!(
                        "resistance transfer ratio R_OFF/R_ON = {ratio}, replication runs use {PAPER_TRANSFER_RATIO}"
                    ));
                }
            }
        }
        for w in &warnings {
            log::warn!("scenario `{}`: {w}", file.name);
        }

        Ok(Self {
            name: file.name,
            description: file.description,
            replicates_paper: file.replicates_paper,
            model,
            drive: file.drive,
            initial,
            solver: file.solver,
            analysis: file.analysis,
            output: file.output,
            warnings,
            doc,
        })
    }

    /// SHA-256 of the merged scenario document.
    pub fn config_hash(&self) -> String {
        let text = toml::to_string(&self.doc).expect("scenario document serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// A copy with the value at a dotted path (e.g. `model.m`) replaced.
    pub fn with_value(&self, path: &str, value: toml::Value) -> Result<Self> {
        let mut doc = self.doc.clone();
        let mut keys = path.split('.').peekable();
        let mut table = &mut doc;
        while let Some(key) = keys.next() {
            if keys.peek().is_none() {
                let value = match (table.get(key), value) {
                    (None, _) => {
                        return Err(config_err(format!("sweep path `{path}` does not resolve")));
                    }
                    // a float-valued key swept with whole numbers
                    (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => {
                        toml::Value::Float(i as f64)
                    }
                    (_, v) => v,
                };
                table.insert(key.to_string(), value);
                break;
            }
            table = table
                .get_mut(key)
                .and_then(|v| v.as_table_mut())
                .ok_or_else(|| config_err(format!("sweep path `{path}` does not resolve")))?;
        }
        let mut s = Self::from_table(doc)?;
        s.name = format!("{}_{}", self.name, sweep_suffix(path, &s.doc_value(path)));
        s.doc
            .insert("name".into(), toml::Value::String(s.name.clone()));
        Ok(s)
    }

    fn doc_value(&self, path: &str) -> String {
        let mut cur: Option<&toml::Value> = None;
        let mut table = &self.doc;
        for key in path.split('.') {
            cur = table.get(key);
            if let Some(t) = cur.and_then(|v| v.as_table()) {
                table = t;
            }
        }
        cur.map(|v| v.to_string()).unwrap_or_default()
    }

    /// Integrates and analyzes without touching the filesystem.
    pub fn simulate(&self) -> Result<(Trace, AnalysisReport)> {
        let wrap = |e: Error| Error::Scenario {
            name: self.name.clone(),
            source: Box::new(e),
        };
        let trace =
            integrate(&self.model, &self.drive, self.initial, &self.solver).map_err(wrap)?;
        let report = analyze(&trace, &self.analysis).map_err(wrap)?;
        Ok((trace, report))
    }

    pub fn run_meta(&self, trace: &Trace) -> RunMeta {
        RunMeta {
            scenario: self.name.clone(),
            config_hash: self.config_hash(),
            trace: trace.meta.clone(),
            analysis: self.analysis,
            note: "deterministic: no random inputs; identical config yields identical output"
                .into(),
        }
    }
}

impl RunMeta {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }
}

/// Rebuilds the report for a stored trace without re-simulating.
pub fn reanalyze(
    samples: Vec<Sample>,
    meta: &TraceMeta,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("trace has no samples".into()));
    }
    analyze(
        &Trace {
            meta: meta.clone(),
            samples,
        },
        opts,
    )
}

fn sweep_suffix(path: &str, value: &str) -> String {
    let key = path.rsplit('.').next().unwrap_or(path);
    let value: String = value
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{key}={value}")
}

fn inline_params_file(doc: &mut toml::Table, base: &Path) -> Result<()> {
    let Some(model) = doc.get_mut("model").and_then(|m| m.as_table_mut()) else {
        return Ok(());
    };
    let Some(file) = model.remove("params_file") else {
        return Ok(());
    };
    let rel = file
        .as_str()
        .ok_or_else(|| config_err("model.params_file must be a string"))?;
    let path = base.join(rel);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut params: toml::Table =
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    // descriptive keys in parameter files are not model parameters
    params.remove("source");
    params.remove("notes");
    for (k, v) in std::mem::take(model) {
        params.insert(k, v);
    }
    *model = params;
    Ok(())
}

/// Paths of the files a run writes into `dir`.
pub struct RunFiles {
    pub trace: PathBuf,
    pub report: PathBuf,
    pub meta: PathBuf,
}

impl RunFiles {
    pub fn new(dir: &Path, name: &str) -> Self {
        Self {
            trace: dir.join(format!("{name}.trace.csv")),
            report: dir.join(format!("{name}.report.json")),
            meta: dir.join(format!("{name}.meta.json")),
        }
    }
}

/// Simulates, analyzes and writes trace, report, metadata and plot data
/// into `out_dir` (or the scenario's own output directory).
pub fn run_scenario(s: &Scenario, out_dir: Option<&Path>) -> Result<(Trace, AnalysisReport)> {
    let (trace, report) = s.simulate()?;
    let dir = out_dir.unwrap_or(&s.output.dir);
    write_run(s, &trace, &report, dir)?;
    Ok((trace, report))
}

pub fn write_run(
    s: &Scenario,
    trace: &Trace,
    report: &AnalysisReport,
    dir: &Path,
) -> Result<RunFiles> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = RunFiles::new(dir, &s.name);
    trace.write_csv(&files.trace)?;
    write_json(&files.report, report)?;
    write_json(&files.meta, &s.run_meta(trace))?;
    if s.output.plots {
        trace.write_plot_data(dir, &s.name)?;
    }
    Ok(files)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub struct SweepRun {
    pub name: String,
    pub result: Result<(Trace, AnalysisReport)>,
}

/// One independent run per value of the dotted `path`, in parallel. A failing
/// run is recorded and does not stop the others. Results keep input order.
pub fn run_sweep(
    base: &Scenario,
    path: &str,
    values: &[toml::Value],
    out_dir: Option<&Path>,
) -> Vec<SweepRun> {
    values
        .par_iter()
        .map(|value| match base.with_value(path, value.clone()) {
            Ok(s) => SweepRun {
                name: s.name.clone(),
                result: run_scenario(&s, out_dir),
            },
            Err(e) => SweepRun {
                name: format!("{}_{}", base.name, sweep_suffix(path, &value.to_string())),
                result: Err(e),
            },
        })
        .collect()
}
