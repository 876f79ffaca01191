//! `memsim`: run memristor scenarios, sweeps and comparisons, and re-analyze
//! stored traces.
//!
//! Exit status is 0 on success, 1 for bad input (paths, config, malformed
//! traces) and 2 when a simulation fails at run time.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memsim::analysis::{build_summary_table, AnalysisOptions, AnalysisReport};
use memsim::drive::DriveKind;
use memsim::models::{ModelKind, OnSide};
use memsim::scenario::{
    reanalyze, run_scenario, run_sweep, write_json, RunFiles, RunMeta, Scenario,
};
use memsim::trace::{read_samples_from_path, TraceMeta};
use memsim::Error;

const SCENARIO_DIR_VAR: &str = "MEMSIM_SCENARIO_DIR";

#[derive(Parser)]
#[command(name = "memsim", version, about = "Memristor device-model simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace, report and plot data.
    Simulate {
        scenario: String,
        /// Output directory (defaults to the scenario's `[output].dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        scenario: String,
        /// Dotted path into the scenario file, e.g. `model.m`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the report of a stored trace CSV.
    Analyze(AnalyzeArgs),
    /// Run several scenarios and print the classification table.
    Compare {
        scenarios: Vec<String>,
        /// Directory for `summary.csv` and the per-run files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the scenarios in the scenario directory.
    ListScenarios,
}

#[derive(Args)]
struct AnalyzeArgs {
    trace: PathBuf,
    /// Run metadata; defaults to the `.meta.json` next to a `.trace.csv`.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    band_lo: Option<f64>,
    #[arg(long)]
    band_hi: Option<f64>,
    #[arg(long)]
    model: Option<ModelArg>,
    /// Port quantity the state equation is written in.
    #[arg(long)]
    regressor: Option<DriveArg>,
    #[arg(long)]
    on_side: Option<OnSideArg>,
    #[arg(long)]
    w_min: Option<f64>,
    #[arg(long)]
    w_max: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Strukov,
    Yang,
    Pickett,
}

#[derive(Clone, Copy, ValueEnum)]
enum DriveArg {
    Current,
    Voltage,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnSideArg {
    High,
    Low,
}

/// A failure and the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_runtime() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn input_error(e: Error) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { scenario, out } => simulate(&scenario, out.as_deref()),
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => sweep(&scenario, &param, &values, out.as_deref()),
        Command::Analyze(args) => analyze(&args),
        Command::Compare { scenarios, out } => compare(&scenarios, &out),
        Command::ListScenarios => list_scenarios(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn scenario_dir() -> PathBuf {
    std::env::var_os(SCENARIO_DIR_VAR).map_or_else(|| PathBuf::from("scenarios"), PathBuf::from)
}

/// A path as given if it exists, otherwise a bare name looked up in the
/// scenario directory with or without the `.toml` extension.
fn resolve_scenario(arg: &str) -> PathBuf {
    let direct = PathBuf::from(arg);
    if direct.exists() || arg.contains(std::path::MAIN_SEPARATOR) {
        return direct;
    }
    let dir = scenario_dir();
    [dir.join(arg), dir.join(format!("{arg}.toml"))]
        .into_iter()
        .find(|p| p.exists())
        .unwrap_or(direct)
}

fn load(arg: &str) -> Result<Scenario, Failure> {
    Scenario::from_path(&resolve_scenario(arg)).map_err(input_error)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{v:.6e}"))
}

fn print_report(name: &str, r: &AnalysisReport) {
    println!(
        "{name}: r2={:.9} ratio={} threshold=+{}/{} pinched={} ({:.3e} A)",
        r.linearity_r2,
        fmt_opt(r.symmetry_ratio),
        fmt_opt(r.threshold_pos),
        fmt_opt(r.threshold_neg),
        r.pinched,
        r.pinched_residual
    );
}

fn simulate(arg: &str, out: Option<&Path>) -> Result<(), Failure> {
    let s = load(arg)?;
    let dir = out.map_or_else(|| s.output.dir.clone(), Path::to_path_buf);
    let (_, report) = run_scenario(&s, Some(&dir))?;
    print_report(&s.name, &report);
    println!("wrote {}", RunFiles::new(&dir, &s.name).trace.display());
    Ok(())
}

fn parse_value(text: &str) -> toml::Value {
    let text = text.trim();
    if let Ok(i) = text.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(x) = text.parse::<f64>() {
        toml::Value::Float(x)
    } else if let Ok(b) = text.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(text.to_string())
    }
}

fn sweep(arg: &str, param: &str, values: &[String], out: Option<&Path>) -> Result<(), Failure> {
    let base = load(arg)?;
    let values: Vec<toml::Value> = values
        .iter()
        .filter(|v| !v.trim().is_empty())
        .map(|v| parse_value(v))
        .collect();
    let dir = out.map_or_else(|| base.output.dir.clone(), Path::to_path_buf);
    let runs = run_sweep(&base, param, &values, Some(&dir));
    let mut worst = 0u8;
    for run in &runs {
        match &run.result {
            Ok((_, report)) => print_report(&run.name, report),
            Err(e) => {
                eprintln!("error: {}: {e}", run.name);
                worst = worst.max(if e.is_runtime() { 2 } else { 1 });
            }
        }
    }
    match worst {
        0 => Ok(()),
        code => Err(Failure {
            code,
            message: format!(
                "{} of {} sweep runs failed",
                runs.iter().filter(|r| r.result.is_err()).count(),
                runs.len()
            ),
        }),
    }
}

fn default_meta_path(trace: &Path) -> Option<PathBuf> {
    let name = trace.file_name()?.to_str()?;
    let stem = name.strip_suffix(".trace.csv")?;
    Some(trace.with_file_name(format!("{stem}.meta.json")))
}

fn analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let samples = read_samples_from_path(&a.trace).map_err(input_error)?;
    let meta_path = a
        .meta
        .clone()
        .or_else(|| default_meta_path(&a.trace).filter(|p| p.exists()));
    let (mut trace_meta, mut opts) = match meta_path {
        Some(p) => {
            let m = RunMeta::read(&p).map_err(input_error)?;
            (Some(m.trace), m.analysis)
        }
        None => (None, AnalysisOptions::default()),
    };
    if trace_meta.is_none() {
        let (Some(model), Some(regressor), Some(on_side), Some(w_min), Some(w_max)) =
            (a.model, a.regressor, a.on_side, a.w_min, a.w_max)
        else {
            return Err(usage(
                "no run metadata found: pass --meta, or all of --model --regressor --on-side --w-min --w-max",
            ));
        };
        trace_meta = Some(TraceMeta {
            model: model.into(),
            params_hash: String::new(),
            drive: String::new(),
            controlling: regressor.into(),
            on_side: on_side.into(),
            state_unit: String::new(),
            w_min,
            w_max,
            solver: String::new(),
        });
    }
    let mut meta = trace_meta.expect("metadata set above");
    if let Some(m) = a.model {
        meta.model = m.into();
    }
    if let Some(r) = a.regressor {
        meta.controlling = r.into();
    }
    if let Some(s) = a.on_side {
        meta.on_side = s.into();
    }
    meta.w_min = a.w_min.unwrap_or(meta.w_min);
    meta.w_max = a.w_max.unwrap_or(meta.w_max);
    opts.threshold_fraction = a.fraction.unwrap_or(opts.threshold_fraction);
    opts.band_lo = a.band_lo.unwrap_or(opts.band_lo);
    opts.band_hi = a.band_hi.unwrap_or(opts.band_hi);

    let report = reanalyze(samples, &meta, &opts).map_err(input_error)?;
    match &a.out {
        Some(path) => write_json(path, &report).map_err(input_error),
        None => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // a closed pipe downstream is not an analysis failure
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn compare(args: &[String], out: &Path) -> Result<(), Failure> {
    if args.len() < 2 {
        return Err(usage(format!(
            "compare needs at least 2 scenarios, got {}",
            args.len()
        )));
    }
    let mut done: Vec<(String, AnalysisReport)> = Vec::new();
    let mut failures = Vec::new();
    let mut worst = 0u8;
    for arg in args {
        let outcome = load(arg).and_then(|s| {
            run_scenario(&s, Some(out))
                .map(|(_, r)| (s.name.clone(), r))
                .map_err(Failure::from)
        });
        match outcome {
            Ok(row) => done.push(row),
            Err(f) => {
                worst = worst.max(f.code);
                failures.push(f.message);
            }
        }
    }
    let table = build_summary_table(done.iter().map(|(n, r)| (n.as_str(), r)));
    print!("{}", table.to_text());
    if !done.is_empty() {
        let path = out.join("summary.csv");
        std::fs::create_dir_all(out)
            .and_then(|()| std::fs::write(&path, table.to_csv()))
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    for f in &failures {
        eprintln!("failed: {f}");
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: if done.is_empty() { worst } else { 2 },
            message: format!("{} of {} scenarios failed", failures.len(), args.len()),
        })
    }
}

fn list_scenarios() -> Result<(), Failure> {
    let dir = scenario_dir();
    let entries = std::fs::read_dir(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    for p in paths {
        match Scenario::from_path(&p) {
            Ok(s) => println!("{:<20}  {}", s.name, s.description),
            Err(e) => println!("{:<20}  (invalid: {e})", p.display()),
        }
    }
    Ok(())
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Strukov => ModelKind::Strukov,
            ModelArg::Yang => ModelKind::Yang,
            ModelArg::Pickett => ModelKind::Pickett,
        }
    }
}

impl From<DriveArg> for DriveKind {
    fn from(d: DriveArg) -> Self {
        match d {
            DriveArg::Current => DriveKind::Current,
            DriveArg::Voltage => DriveKind::Voltage,
        }
    }
}

impl From<OnSideArg> for OnSide {
    fn from(s: OnSideArg) -> Self {
        match s {
            OnSideArg::High => OnSide::High,
            OnSideArg::Low => OnSide::Low,
        }
    }
}
