//! Experiment config files: flat `key = value` text or a JSON object.

use homflow_core::experiments::{ExperimentConfig, CONFIG_KEYS};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

const REQUIRED: &[&str] = &["experiment", "flow"];

/// Parses config text into a key map, rejecting unknown, duplicate and
/// missing required keys.
pub fn parse_keys(text: &str) -> Result<Map<String, Value>> {
    let map = if text.trim_start().starts_with('{') {
        match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(m)) => m,
            Ok(_) => return Err(CliError::Config("JSON config must be an object".into())),
            Err(e) => return Err(CliError::Config(format!("invalid JSON config: {e}"))),
        }
    } else {
        parse_key_value(text)?
    };
    for key in map.keys() {
        if !CONFIG_KEYS.iter().any(|(k, _)| k == key) {
            return Err(CliError::Config(format!("unknown config key `{key}` (see `homflow simulate --help`)")));
        }
    }
    for key in REQUIRED {
        if !map.contains_key(*key) {
            return Err(CliError::Config(format!("missing config key `{key}`")));
        }
    }
    Ok(map)
}

fn parse_key_value(text: &str) -> Result<Map<String, Value>> {
    let mut map = Map::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`", no + 1)));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Config(format!("line {}: empty key", no + 1)));
        }
        if map.insert(key.to_string(), parse_value(value.trim())).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate config key `{key}`", no + 1)));
        }
    }
    Ok(map)
}

/// JSON literal if it parses, else a comma list, else a bare string.
fn parse_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str(raw) {
        return v;
    }
    if raw.contains(',') {
        return Value::Array(raw.split(',').map(|s| parse_value(s.trim())).collect());
    }
    Value::String(raw.to_string())
}

/// Builds the typed config from a validated key map.
pub fn to_config(map: Map<String, Value>) -> Result<ExperimentConfig> {
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Config(e.to_string()))
}

/// One line per documented key, for `--help`.
pub fn keys_help() -> String {
    let width = CONFIG_KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::from("Config keys (key = value lines or a JSON object):\n");
    for (k, d) in CONFIG_KEYS {
        out.push_str(&format!("  {k:<width$}  {d}\n"));
    }
    out
}
