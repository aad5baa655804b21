//! `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long flag
//! names without the leading dashes (`filter`, `L`, `rule-dir`, ...).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "filter",
    "d",
    "L",
    "s",
    "p",
    "seed",
    "out",
    "rule-dir",
    "probes",
    "panels",
    "epsilon",
    "max-degree",
    "sup-points",
    "trials",
    "r",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Command-line value, else config value, else `default`.
    pub fn pick<T: FromStr>(&self, cli: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick_opt(cli, key)?.unwrap_or(default))
    }

    /// Command-line value, else config value.
    pub fn pick_opt<T: FromStr>(&self, cli: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if cli.is_some() {
            return Ok(cli);
        }
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }
}

/// Comma-separated list such as `8,16,32`.
pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("invalid list entry `{s}`")))
        .collect()
}

/// Newtype so lists can travel through [`Config::pick`].
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_list(s)?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(List(v))
    }
}

/// `p` exponent; accepts `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let p = match s.trim() {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            other => other.parse().map_err(|_| format!("invalid exponent `{other}`"))?,
        };
        if p >= 1.0 {
            Ok(Exponent(p))
        } else {
            Err(format!("exponent must lie in [1, inf], got {s}"))
        }
    }
}
