//! Flat `key = value` run configuration and parameter resolution.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const SEED_ENV: &str = "BERGMAN_SEED";

#[derive(Debug, Default, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values })
    }
}

/// Resolves each parameter as flag, then config entry, then default, and records the result.
#[derive(Debug)]
pub struct Params {
    config: Config,
    pub resolved: BTreeMap<String, String>,
}

impl Params {
    pub fn new(config: Config) -> Self {
        Self { config, resolved: BTreeMap::new() }
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.config.values.get(key) {
                Some(raw) => raw.parse().map_err(|e| CliError::Usage(format!("config key {key}: {e}")))?,
                None => default,
            },
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Flag, then config `seed`, then $BERGMAN_SEED, then 0.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64, CliError> {
        let default = match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|e| CliError::Usage(format!("{SEED_ENV}: {e}")))?,
            Err(_) => 0,
        };
        self.get("seed", flag, default)
    }
}

/// (λ₁, λ₂) written as `l1,l2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda(pub f64, pub f64);

impl FromStr for Lambda {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected l1,l2, got {s:?}"))?;
        let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Self(parse(a)?, parse(b)?))
    }
}

impl Display for Lambda {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}

/// An inclusive level range `a..b`, or a single level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRange {
    pub start: u32,
    pub end: u32,
}

impl FromStr for LevelRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if start > end {
            return Err(format!("empty range {s}"));
        }
        Ok(Self { start, end })
    }
}

impl Display for LevelRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}
