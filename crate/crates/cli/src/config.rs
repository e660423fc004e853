//! Flat `key = value` run configuration. Keys come from a config file (or a
//! previously written manifest), then flag overrides, then `--set` pairs.

use crate::error::{io_error, CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Enumerate,
    Check,
    Sample,
    Torus,
    Arboreal,
    Decay,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::Check => "check",
            Command::Sample => "sample",
            Command::Torus => "torus",
            Command::Arboreal => "arboreal",
            Command::Decay => "decay",
        }
    }

    /// Commands whose output depends on random draws need an explicit seed.
    fn needs_seed(self) -> bool {
        matches!(self, Command::Sample | Command::Torus | Command::Arboreal | Command::Decay)
    }

    fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::Enumerate => &[],
            Command::Check => &[("suite", "all"), ("seed", "7")],
            Command::Sample => &[("chains", "1"), ("burn_in", "0"), ("thin", "1"), ("steps", "1000")],
            Command::Torus => &[
                ("graph", "torus:2,4"),
                ("q", "3"),
                ("x", "0.5"),
                ("steps", "100000"),
                ("batches", "20"),
                ("chains", "1"),
                ("burn_in", "1000"),
            ],
            Command::Arboreal => &[("graph", "grid:4,4"), ("beta", "4"), ("epsilon", "0.1"), ("steps", "2000"), ("burn_in", "200")],
            Command::Decay => &[("lattice", "box"), ("d", "2"), ("sizes", "4..8"), ("q", "2"), ("x", "0.1"), ("steps", "20000"), ("burn_in", "200")],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every key a run may carry. `torus = d,n` is shorthand for
/// `graph = torus:d,n`.
pub const KEYS: &[&str] = &[
    "row", "graph", "complex", "q", "j", "t", "p", "x", "a", "b", "family", "k", "loop_n", "loop_m", "seed", "chains", "steps",
    "burn_in", "thin", "observables", "suite", "beta", "epsilon", "lattice", "d", "sizes", "batches",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    entries: BTreeMap<String, String>,
    pub out: PathBuf,
}

/// What a manifest records: enough to rerun the command exactly.
#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: Command,
    pub version: String,
    pub config: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

fn insert(entries: &mut BTreeMap<String, String>, key: &str, value: &str) -> CliResult<()> {
    let key = normalize(key);
    let value = value.trim().to_string();
    if key == "torus" {
        entries.insert("graph".into(), format!("torus:{value}"));
        return Ok(());
    }
    if !KEYS.contains(&key.as_str()) {
        return Err(CliError::UnknownKey(key));
    }
    entries.insert(key, value);
    Ok(())
}

pub fn parse_pairs(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Syntax { line: i + 1, msg: format!("expected key = value, got `{line}`") })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn read_file(command: Command, path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    if text.trim_start().starts_with('{') {
        let manifest: Manifest = serde_json::from_str(&text)?;
        if manifest.command != command {
            return Err(CliError::ManifestCommand { expected: command.to_string(), found: manifest.command.to_string() });
        }
        return Ok(manifest.config.into_iter().collect());
    }
    parse_pairs(&text)
}

impl RunConfig {
    pub fn resolve(command: Command, file: Option<&Path>, overrides: &[(String, String)], out: Option<PathBuf>) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (k, v) in command.defaults() {
            entries.insert(k.to_string(), v.to_string());
        }
        if let Some(path) = file {
            for (k, v) in read_file(command, path)? {
                insert(&mut entries, &k, &v)?;
            }
        }
        for (k, v) in overrides {
            insert(&mut entries, k, v)?;
        }
        if command.needs_seed() && !entries.contains_key("seed") {
            return Err(CliError::MissingKey("seed"));
        }
        let config = Self { command, entries, out: out.unwrap_or_else(|| PathBuf::from("out").join(command.as_str())) };
        config.validate()?;
        Ok(config)
    }

    /// Parses every numeric key once so that errors surface before any work.
    fn validate(&self) -> CliResult<()> {
        for key in ["q", "k", "chains", "steps", "burn_in", "thin", "seed", "d", "batches"] {
            self.count(key)?;
        }
        for key in ["j", "t", "p", "x", "beta", "epsilon", "loop_n", "loop_m"] {
            self.real(key)?;
        }
        if self.count("thin")? == Some(0) {
            return Err(self.bad("thin", "must be at least 1"));
        }
        if self.count("chains")? == Some(0) {
            return Err(self.bad("chains", "must be at least 1"));
        }
        Ok(())
    }

    pub fn manifest(&self) -> Manifest {
        Manifest { command: self.command, version: env!("CARGO_PKG_VERSION").to_string(), config: self.entries.clone() }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn bad(&self, key: &str, reason: impl Into<String>) -> CliError {
        CliError::BadValue { key: key.into(), value: self.get(key).unwrap_or("").into(), reason: reason.into() }
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key).map(|v| v.parse::<T>().map_err(|e| self.bad(key, e.to_string()))).transpose()
    }

    pub fn real(&self, key: &str) -> CliResult<Option<f64>> {
        self.parsed::<f64>(key)
    }

    /// Nonnegative integer; scientific notation such as `1e5` is accepted.
    pub fn count(&self, key: &str) -> CliResult<Option<u64>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        if let Ok(n) = v.parse::<u64>() {
            return Ok(Some(n));
        }
        match v.parse::<f64>() {
            Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 2f64.powi(63) => Ok(Some(f as u64)),
            _ => Err(self.bad(key, "expected a nonnegative integer")),
        }
    }

    pub fn require_count(&self, key: &'static str) -> CliResult<u64> {
        self.count(key)?.ok_or(CliError::MissingKey(key))
    }

    pub fn require_real(&self, key: &'static str) -> CliResult<f64> {
        self.real(key)?.ok_or(CliError::MissingKey(key))
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.require_count("seed")
    }

    /// Comma-separated vertex list, empty when absent.
    pub fn vertices(&self, key: &str) -> CliResult<Vec<usize>> {
        match self.get(key) {
            None | Some("") => Ok(Vec::new()),
            Some(v) => v.split(',').map(|s| s.trim().parse::<usize>().map_err(|e| self.bad(key, e.to_string()))).collect(),
        }
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.get(key).map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()).unwrap_or_default()
    }

    /// `lo..hi` (inclusive) or a comma-separated list.
    pub fn sizes(&self, key: &'static str) -> CliResult<Vec<usize>> {
        let v = self.get(key).ok_or(CliError::MissingKey(key))?;
        let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| self.bad(key, e.to_string()));
        let sizes: Vec<usize> = match v.split_once("..") {
            Some((lo, hi)) => (parse(lo)?..=parse(hi)?).collect(),
            None => v.split(',').map(parse).collect::<CliResult<_>>()?,
        };
        if sizes.is_empty() {
            return Err(self.bad(key, "empty size list"));
        }
        Ok(sizes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_syntax() {
        let p = parse_pairs("# run\nrow = lc\n\nsteps=1e5  # inline\n").unwrap();
        assert_eq!(p, pairs(&[("row", "lc"), ("steps", "1e5")]));
        assert!(matches!(parse_pairs("row lc"), Err(CliError::Syntax { line: 1, .. })));
    }

    #[test]
    fn overrides_and_shorthand() {
        let c = RunConfig::resolve(Command::Sample, None, &pairs(&[("torus", "2,4"), ("seed", "7"), ("burn-in", "3"), ("steps", "1e5")]), None).unwrap();
        assert_eq!(c.get("graph"), Some("torus:2,4"));
        assert_eq!(c.count("burn_in").unwrap(), Some(3));
        assert_eq!(c.count("steps").unwrap(), Some(100_000));
    }

    #[test]
    fn seed_is_mandatory_for_sampling() {
        assert!(matches!(RunConfig::resolve(Command::Sample, None, &[], None), Err(CliError::MissingKey("seed"))));
        assert!(RunConfig::resolve(Command::Enumerate, None, &[], None).is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_numbers() {
        assert!(matches!(RunConfig::resolve(Command::Check, None, &pairs(&[("colour", "red")]), None), Err(CliError::UnknownKey(_))));
        assert!(RunConfig::resolve(Command::Check, None, &pairs(&[("steps", "1.5")]), None).is_err());
        assert!(RunConfig::resolve(Command::Sample, None, &pairs(&[("seed", "1"), ("thin", "0")]), None).is_err());
    }

    #[test]
    fn size_ranges() {
        let c = RunConfig::resolve(Command::Decay, None, &pairs(&[("seed", "1"), ("sizes", "4..6")]), None).unwrap();
        assert_eq!(c.sizes("sizes").unwrap(), vec![4, 5, 6]);
        let c = RunConfig::resolve(Command::Decay, None, &pairs(&[("seed", "1"), ("sizes", "3,8")]), None).unwrap();
        assert_eq!(c.sizes("sizes").unwrap(), vec![3, 8]);
    }
}
