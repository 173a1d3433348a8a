//! Plain-text summary of a finished `simulate` run.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use homflow_core::rootsys::Rational;
use homflow_core::sdclassify::{classify_rank_one, RankOneFamily, SpectralGapParam};
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::manifest::{sha256_hex, RunManifest, RunStatus};

pub fn render(manifest_path: &Path) -> Result<String> {
    let m = RunManifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut out = String::new();
    let _ = writeln!(out, "# homflow run report\n");
    let _ = writeln!(out, "status: {}", status_name(m.status));
    if let Some(e) = &m.error {
        let _ = writeln!(out, "error: {e}");
    }
    let _ = writeln!(out, "seed: {}", m.seed);
    let _ = writeln!(out, "tool version: {}", m.tool_version);
    let _ = writeln!(out, "started: {}", m.started);
    let _ = writeln!(out, "finished: {}", m.finished.as_deref().unwrap_or("-"));
    let _ = writeln!(out, "config: {} ({})", m.config_file, config_check(&m, dir));

    let mut summary = None;
    for o in &m.outputs {
        let path = dir.join(&o.path);
        let check = match fs::read(&path) {
            Ok(bytes) if sha256_hex(&bytes) == o.sha256 => {
                if o.path.ends_with(".json") {
                    summary = Some(path.clone());
                }
                "hash ok"
            }
            Ok(_) => "HASH MISMATCH",
            Err(_) => "missing",
        };
        let _ = writeln!(out, "output: {} ({check})", o.path);
    }

    let Some(path) = summary else {
        let _ = writeln!(out, "\nno verified summary to report");
        return Ok(out);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|source| CliError::Json { origin: path.display().to_string(), source })?;
    let result = &v["result"];
    let _ = writeln!(out, "\n## {} ({} flow)\n", str_of(&result["experiment"]), str_of(&result["flow"]));
    let _ = writeln!(out, "points: {}", result["n_points"]);
    if !result["m_max"].is_null() {
        let _ = writeln!(out, "budget: {} steps", result["m_max"]);
    }
    results_section(&mut out, result);
    if matches!(str_of(&result["flow"]), "geodesic" | "horocycle") {
        let _ = writeln!(out, "\n## theoretical status\n");
        theory_section(&mut out);
    }
    Ok(out)
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Incomplete => "incomplete",
        RunStatus::Complete => "complete",
        RunStatus::Failed => "failed",
    }
}

fn config_check(m: &RunManifest, dir: &Path) -> &'static str {
    let given = Path::new(&m.config_file);
    let bytes = fs::read(given).or_else(|_| fs::read(dir.join(given.file_name().unwrap_or_default())));
    match bytes {
        Ok(b) if sha256_hex(&b) == m.config_hash => "hash ok",
        Ok(_) => "HASH MISMATCH",
        Err(_) => "not found",
    }
}

fn str_of(v: &Value) -> &str {
    v.as_str().unwrap_or("?")
}

fn num(v: &Value) -> String {
    match v.as_f64() {
        Some(x) if x != 0.0 && x.abs() < 1e-3 => format!("{x:.3e}"),
        Some(x) => format!("{x:.4}"),
        None => "n/a".into(),
    }
}

fn results_section(out: &mut String, r: &Value) {
    let empty = Vec::new();
    let list = |key: &str| r[key].as_array().unwrap_or(&empty).clone();
    match str_of(&r["experiment"]) {
        "hitting_time" => {
            let _ = writeln!(out, "\nlog τ / (-log μ), target value 1:");
            for l in list("levels") {
                let q = &l["quartiles"];
                let _ = writeln!(
                    out,
                    "  μ = {:<8} median {}  q05 {}  q25 {}  q75 {}  censored {}",
                    l["mu"],
                    num(&q["median"]),
                    num(&q["q05"]),
                    num(&q["q25"]),
                    num(&q["q75"]),
                    l["n_censored"]
                );
            }
        }
        "cusp_loglaw" => {
            let _ = writeln!(out, "\nmax d / log m, target 1/ϰ = {}:", num(&r["target"]));
            for c in list("checkpoints") {
                let _ = writeln!(out, "  m = {:<10} median {}", c["m"], num(&c["ratio"]["median"]));
            }
            if r["pre_asymptotic"].as_bool() == Some(true) {
                let _ = writeln!(out, "  budget too small for the asymptotic regime");
            }
        }
        "sbc" => {
            let _ = writeln!(out, "\nS_m / E_m:");
            for c in list("checkpoints") {
                let _ = writeln!(
                    out,
                    "  m = {:<10} E_m {}  mean ratio {} ± {}",
                    c["m"],
                    num(&c["e_m"]),
                    num(&c["mean_ratio"]),
                    num(&c["ratio_stderr"])
                );
            }
            let _ = writeln!(out, "envelope violation fraction: {}", num(&r["violation_fraction"]));
        }
        "eah" => {
            let _ = writeln!(out, "\nfraction of orbits meeting B_m within m steps:");
            for c in list("checkpoints") {
                let _ = writeln!(out, "  m = {:<10} μ {}  hit fraction {}", c["m"], num(&c["mu"]), num(&c["hit_fraction"]));
            }
        }
        "mean_ergodic" => {
            let _ = writeln!(out, "\nL2 deviation of ergodic averages:");
            for c in list("checkpoints") {
                let _ = writeln!(out, "  m = {:<10} {} ± {}", c["m"], num(&c["norm"]), num(&c["stderr"]));
            }
            let _ = writeln!(out, "fitted slope: {}", num(&r["slope"]));
        }
        "matrix_decay" => {
            let _ = writeln!(out, "\ncorrelations:");
            let _ = writeln!(out, "  t = 0     {} ± {}", num(&r["at_zero"]["value"]), num(&r["at_zero"]["stderr"]));
            for c in list("correlations") {
                let _ = writeln!(out, "  t = {:<5} {} ± {}", c["t"], num(&c["value"]), num(&c["stderr"]));
            }
            let fit = &r["fit"];
            if fit["inconclusive"].as_bool() == Some(true) {
                let _ = writeln!(out, "fit inconclusive: signal below noise floor {}", num(&fit["noise_floor"]));
            } else {
                let _ = writeln!(
                    out,
                    "power exponent {}  exponential rate {}  ({} grid points)",
                    num(&fit["power_exponent"]),
                    num(&fit["exponential_rate"]),
                    fit["n_fit_points"]
                );
            }
        }
        _ => {}
    }
}

/// SL_2(R) is locally SO(2,1); SL_2(Z) has no exceptional spectrum, so
/// τ(Γ) = ρ = 1/2 and κτ(Γ) = 1 sits exactly on the summability threshold.
fn theory_section(out: &mut String) {
    let verdict = SpectralGapParam::user(Rational::new(1, 2))
        .and_then(|tau| classify_rank_one(RankOneFamily::So, Some(2), &tau));
    match verdict {
        Ok(v) => {
            let _ = writeln!(out, "summable decay for SL_2(Z)\\SL_2(R): {:?} (exponent {})", v.is_sd, v.exponent_display);
            let _ = writeln!(out, "  SL_2(Z) has no exceptional spectrum: τ(Γ) = 1/2");
            for line in &v.rationale {
                let _ = writeln!(out, "  {line}");
            }
            if let Some(c) = &v.criterion {
                let _ = writeln!(out, "  criterion: {c}");
            }
            let _ = writeln!(
                out,
                "the shrinking-target statistics above are empirical; summable decay is not established here"
            );
        }
        Err(e) => {
            let _ = writeln!(out, "unavailable: {e}");
        }
    }
}
