//! Configuration files, CSV tables and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Entries read from a `--config` file.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub path: String,
    pub entries: BTreeMap<String, String>,
}

fn config_path(argv: &[String]) -> Result<Option<String>, CliError> {
    for (i, a) in argv.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
        if a == "--config" {
            return argv
                .get(i + 1)
                .cloned()
                .map(Some)
                .ok_or_else(|| CliError::Usage("--config needs a file name".into()));
        }
    }
    Ok(None)
}

/// Parse `key = value` lines; blank lines and `#` comments are skipped and a
/// leading `--` on keys is optional.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value, got '{line}'", no + 1)))?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() || k == "config" {
            return Err(CliError::Usage(format!("config line {}: invalid key '{k}'", no + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Append the flags of the `--config` file that are not already on the
/// command line, so explicit flags take precedence. `true` becomes a bare
/// switch and `false` drops the entry.
pub fn expand_config(argv: Vec<String>) -> Result<(Vec<String>, Option<ConfigEcho>), CliError> {
    let Some(path) = config_path(&argv)? else {
        return Ok((argv, None));
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read config file {path}: {e}")))?;
    let entries = parse_config(&text)?;
    let mut out = argv;
    for (k, v) in &entries {
        let flag = format!("--{k}");
        let given = out.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given || v == "false" {
            continue;
        }
        if v == "true" {
            out.push(flag);
        } else {
            out.push(format!("{flag}={v}"));
        }
    }
    Ok((out, Some(ConfigEcho { path, entries })))
}

/// Inclusive range `start:end:step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl std::str::FromStr for Range {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, h] = parts.as_slice() else {
            return Err(format!("expected start:end:step, got '{s}'"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
        let r = Range {
            start: num(a)?,
            end: num(b)?,
            step: num(h)?,
        };
        if !(r.step > 0.0 && r.end >= r.start && r.start.is_finite() && r.end.is_finite()) {
            return Err(format!("need step > 0 and end >= start, got '{s}'"));
        }
        Ok(r)
    }
}

/// Record of one run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub params: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub outputs: Vec<String>,
    pub config: Option<ConfigEcho>,
    pub version: String,
}

/// Collects parameters, results and written files of a command.
#[derive(Debug)]
pub struct Run {
    pub manifest: RunManifest,
}

impl Run {
    pub fn new(command: &str, argv: &[String], config: Option<ConfigEcho>) -> Self {
        Self {
            manifest: RunManifest {
                command: command.to_string(),
                argv: argv.to_vec(),
                params: BTreeMap::new(),
                results: BTreeMap::new(),
                outputs: Vec::new(),
                config,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.manifest.params.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.manifest.results.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    /// Write `rows` as CSV with a header row taken from the row type.
    pub fn write_csv<T: Serialize>(&mut self, path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
        ensure_parent(path)?;
        let mut w = csv::Writer::from_path(path)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<(), CliError> {
        ensure_parent(path)?;
        fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Write the manifest to `path` and return its location.
    pub fn finish(self, path: &Path) -> Result<PathBuf, CliError> {
        ensure_parent(path)?;
        fs::write(path, serde_json::to_string_pretty(&self.manifest)? + "\n")?;
        Ok(path.to_path_buf())
    }

    /// Manifest next to a single output file: `<out>.manifest.json`.
    pub fn finish_beside(self, out: &Path) -> Result<PathBuf, CliError> {
        let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        let path = out.with_file_name(name);
        self.finish(&path)
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r: Range = "-20:20:0.01".parse().unwrap();
        assert_eq!((r.start, r.end, r.step), (-20.0, 20.0, 0.01));
        assert!("1:0:0.1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
        assert!("0:1:0".parse::<Range>().is_err());
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# comment\nkappa = 5\n--alpha=0.3  # trailing\n\n").unwrap();
        assert_eq!(c["kappa"], "5");
        assert_eq!(c["alpha"], "0.3");
        assert!(parse_config("kappa 5").is_err());
    }

    #[test]
    fn command_line_wins_over_config() {
        let dir = std::env::temp_dir().join(format!("polarwave-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(&path, "kappa=5\nalpha=0.3\nallow-unphysical=true\n").unwrap();
        let argv: Vec<String> = ["polarwave", "profile", "--config", path.to_str().unwrap(), "--kappa", "2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let (out, echo) = expand_config(argv).unwrap();
        assert!(out.contains(&"--alpha=0.3".to_string()));
        assert!(out.contains(&"--allow-unphysical".to_string()));
        assert!(!out.iter().any(|a| a == "--kappa=5"));
        assert_eq!(echo.unwrap().entries.len(), 3);
        fs::remove_dir_all(dir).ok();
    }
}
