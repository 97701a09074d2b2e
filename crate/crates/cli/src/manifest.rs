use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Everything needed to reproduce a run: the command, every resolved
/// parameter (defaults included) under its flag name, and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new<P: Serialize>(command: &str, params: &P, seed: Option<u64>) -> Result<Self, CliError> {
        let params = match serde_json::to_value(params)? {
            Value::Object(map) => map,
            _ => Map::new(),
        };
        Ok(Self {
            command: command.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: 0.0,
        })
    }

    /// Command line that re-runs this manifest.
    pub fn to_args(&self) -> Vec<String> {
        let mut args: Vec<String> = self.command.split_whitespace().map(String::from).collect();
        for (key, value) in &self.params {
            let flag = format!("--{key}");
            match value {
                Value::Null | Value::Bool(false) => {}
                Value::Bool(true) => args.push(flag),
                Value::Array(items) => {
                    let joined: Vec<String> = items.iter().map(scalar_text).collect();
                    args.push(flag);
                    args.push(joined.join(","));
                }
                other => {
                    args.push(flag);
                    args.push(scalar_text(other));
                }
            }
        }
        args
    }

    /// Reads a manifest from a JSON result, a bare manifest, or a CSV file
    /// whose first line is `# manifest: {...}`.
    pub fn load(text: &str) -> Result<Self, CliError> {
        let trimmed = text.trim_start();
        if let Some(rest) = trimmed.strip_prefix("# manifest:") {
            let line = rest.lines().next().unwrap_or("");
            return Ok(serde_json::from_str(line.trim())?);
        }
        let value: Value = serde_json::from_str(trimmed)?;
        let inner = value.get("manifest").cloned().unwrap_or(value);
        Ok(serde_json::from_value(inner)?)
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
