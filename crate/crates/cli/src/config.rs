use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::CliError;

/// Reads a flat `key = value` file into flags. Blank lines and lines
/// starting with `#` are skipped; `_` in keys is read as `-`; `true`/`false`
/// toggle switches.
pub fn config_flags(path: &Path) -> Result<Vec<OsString>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value",
                lineno + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" || key == "output" {
            return Err(CliError::Usage(format!(
                "config line {}: key `{key}` not allowed",
                lineno + 1
            )));
        }
        match value {
            "true" => out.push(OsString::from(format!("--{key}"))),
            "false" => {}
            v => {
                out.push(OsString::from(format!("--{key}")));
                out.push(OsString::from(v));
            }
        }
    }
    Ok(out)
}

/// Splices flags from `--config <file>` in front of the explicit flags so
/// that the latter win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut iter = args.iter().enumerate();
    while let Some((i, a)) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).cloned();
            iter.next();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let extra = config_flags(Path::new(&path))?;
    let depth = match args.get(1).map(|a| a.to_string_lossy().into_owned()) {
        Some(cmd) if cmd == "oracle" => 3,
        Some(_) => 2,
        None => return Ok(args),
    };
    let split = depth.min(args.len());
    let mut out: Vec<OsString> = args[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_pairs_and_switches() {
        let flags = parse_config("# c\nalpha = 0.5\n\nmax_terms=12\nantithetic = true\nno_pde=false\n").unwrap();
        assert_eq!(flags, os(&["--alpha", "0.5", "--max-terms", "12", "--antithetic"]));
        assert!(parse_config("alpha 0.5").is_err());
        assert!(parse_config("output = x.json").is_err());
    }

    #[test]
    fn explicit_flags_come_last() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        fs::write(&p, "alpha = 0.5\n").unwrap();
        let args = os(&[
            "volswap",
            "oracle",
            "mc",
            "--alpha",
            "0.7",
            "--config",
            p.to_str().unwrap(),
        ]);
        let out = expand_config(args).unwrap();
        assert_eq!(out[3..5], os(&["--alpha", "0.5"])[..]);
        assert_eq!(out[5..7], os(&["--alpha", "0.7"])[..]);
    }
}
