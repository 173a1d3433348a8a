use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use homflow_core::experiments::{self, SCHEMA_VERSION};
use homflow_core::liealg::{classify_flow, lambda1_profile, linear_rate, log_log_slope, AlgebraElement, FlowKind};
use homflow_core::rootsys::{
    build_root_system, dominates_on_chamber, good_type, kostant_cascade, maximal_strongly_orthogonal_system, rho_of,
    xi, RootSystem, RootType, StrongOrthSystem, WeightVector,
};
use homflow_core::sdclassify::{classify_semisimple, GroupSpec};
use serde_json::{json, Map, Value};

use crate::config;
use crate::error::{CliError, Result};
use crate::manifest::{now, sha256_hex, OutputFile, RunManifest, RunStatus, MANIFEST_VERSION};
use crate::report;
use crate::{Cli, Command, Show};

pub const SEED_ENV: &str = "HOMFLOW_SEED";

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    if let Some(w) = cli.workers {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w as usize).build_global();
    }
    match &cli.command {
        Command::Rootsys { root_type, rank, show } => cmd_rootsys(cli, *root_type, *rank, show),
        Command::AnalyzeFlow { input, tol, t_grid } => cmd_analyze_flow(cli, input, *tol, t_grid.as_deref()),
        Command::Classify { input } => cmd_classify(cli, input),
        Command::Simulate { config } => cmd_simulate(cli, config),
        Command::Report { manifest } => cmd_report(cli, manifest),
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::io("<stdin>", e))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::io(path, e))
    }
}

/// Prints `value` and, with `--out`, also writes it to `<out>/<name>.json`.
fn emit(cli: &Cli, name: &str, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n";
    print!("{text}");
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn system_json(rs: &RootSystem, sos: &StrongOrthSystem) -> Value {
    json!({ "roots": sos.roots(), "rho": rho_of(rs.rank(), sos).to_strings() })
}

fn cmd_rootsys(cli: &Cli, label: RootType, rank: usize, show: &[Show]) -> Result<i32> {
    label.validate_rank(rank).map_err(|e| CliError::Usage(e.to_string()))?;
    let rs = build_root_system(label, rank)?;
    let top = rs.highest_root();
    let mut out = Map::new();
    out.insert("type".into(), json!(label));
    out.insert("rank".into(), json!(rank));
    out.insert("positive_root_count".into(), json!(rs.positive_roots().len()));
    for item in show {
        let (key, value) = match item {
            Show::Roots => ("positive_roots", json!(rs.positive_roots())),
            Show::Cascade => ("cascade", system_json(&rs, &kostant_cascade(&rs))),
            Show::Maximal => ("maximal", system_json(&rs, &maximal_strongly_orthogonal_system(&rs))),
            Show::Xi => ("xi", json!(xi(&rs).to_strings())),
            Show::Lambda1 => ("lambda1", json!(top)),
            Show::Dominance => {
                let dom = dominates_on_chamber(&xi(&rs), &WeightVector::from(&top))?;
                out.insert("good_type".into(), json!(good_type(label, rank)?));
                ("dominance", json!(dom))
            }
        };
        out.insert(key.into(), value);
    }
    emit(cli, "rootsys", &Value::Object(out))?;
    Ok(0)
}

const DEFAULT_T_GRID: [f64; 9] = [100.0, 177.82794, 316.22777, 562.34133, 1000.0, 1778.2794, 3162.2777, 5623.4133, 10000.0];

fn cmd_analyze_flow(cli: &Cli, input: &Path, tol: f64, t_grid: Option<&[f64]>) -> Result<i32> {
    let text = read_input(input)?;
    let json_err = |source| CliError::Json { origin: input.display().to_string(), source };
    let v: Value = serde_json::from_str(&text).map_err(json_err)?;
    let rows_value = match v {
        Value::Object(mut m) => m.remove("matrix").ok_or_else(|| CliError::Config("expected a `matrix` key".into()))?,
        other => other,
    };
    let rows: Vec<Vec<f64>> = serde_json::from_value(rows_value).map_err(json_err)?;
    let x = AlgebraElement::from_rows(&rows)?;
    let desc = classify_flow(&x, tol)?;
    let grid = t_grid.unwrap_or(&DEFAULT_T_GRID);
    let profile = lambda1_profile(&x, grid)?;
    let growth = match desc.kind {
        FlowKind::QuasiUnipotent { .. } => "polynomial",
        FlowKind::QuasiDiagonalizable => "exponential",
        FlowKind::Bounded => "bounded",
    };
    let out = json!({
        "descriptor": desc,
        "growth": growth,
        "profile": profile,
        "log_log_slope": log_log_slope(&profile),
        "linear_rate": linear_rate(&profile),
    });
    emit(cli, "analyze_flow", &out)?;
    Ok(0)
}

fn cmd_classify(cli: &Cli, input: &Path) -> Result<i32> {
    let spec = GroupSpec::from_json(&read_input(input)?)?;
    let verdict = classify_semisimple(&spec)?;
    emit(cli, "classify", &json!(verdict))?;
    Ok(verdict.is_sd.exit_code())
}

fn resolve_seed(flag: Option<u64>, from_config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(from_config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputFile> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    Ok(OutputFile { path: name.to_string(), sha256: sha256_hex(bytes) })
}

fn cmd_simulate(cli: &Cli, config_path: &Path) -> Result<i32> {
    let bytes = fs::read(config_path).map_err(|e| CliError::io(config_path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Config("config file is not UTF-8".into()))?;
    let keys = config::parse_keys(&text)?;
    let seed_in_config = keys.contains_key("seed");
    let mut cfg = config::to_config(keys)?;
    cfg.seed = resolve_seed(cli.seed, seed_in_config.then_some(cfg.seed))?;
    if let Some(w) = cli.workers {
        cfg.workers = Some(w as usize);
    }
    cfg.validate()?;

    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    let config_hash = sha256_hex(&bytes);
    let mut manifest = RunManifest {
        schema_version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_file: config_path.display().to_string(),
        config_hash: config_hash.clone(),
        seed: cfg.seed,
        workers: cfg.workers,
        started: now(),
        finished: None,
        status: RunStatus::Incomplete,
        outputs: Vec::new(),
        error: None,
    };
    manifest.write(&manifest_path)?;

    let result = match experiments::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.error = Some(e.to_string());
            manifest.finished = Some(now());
            manifest.write(&manifest_path)?;
            return Err(e.into());
        }
    };

    let seed = cfg.seed.to_string();
    let csv = result.to_csv(&[("config_hash", &config_hash), ("seed", &seed)]);
    // worker count is not part of the result
    let mut recorded = cfg.clone();
    recorded.workers = None;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "config_hash": config_hash,
        "seed": cfg.seed,
        "config": recorded,
        "result": result,
    });
    let summary = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    manifest.outputs.push(write_output(&dir, &format!("{stem}.csv"), csv.as_bytes())?);
    manifest.outputs.push(write_output(&dir, &format!("{stem}.json"), summary.as_bytes())?);
    manifest.status = RunStatus::Complete;
    manifest.finished = Some(now());
    manifest.write(&manifest_path)?;
    for o in &manifest.outputs {
        println!("{}", dir.join(&o.path).display());
    }
    println!("{}", manifest_path.display());
    Ok(0)
}

fn cmd_report(cli: &Cli, manifest: &Path) -> Result<i32> {
    let text = report::render(manifest)?;
    print!("{text}");
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let name = manifest.file_name().and_then(|s| s.to_str()).unwrap_or("run");
        let stem = name.strip_suffix(".manifest.json").unwrap_or(name);
        let path = dir.join(format!("{stem}.report.txt"));
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(0)
}
