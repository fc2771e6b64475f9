//! Flat `key = value` configuration files: no sections, no nesting, no
//! executable content. Lines starting with `#` and blank lines are ignored.
//! Keys may use dots for grouping (`grid.count`), but remain flat strings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Configuration error with the offending field path, surfaced as a usage
/// error (exit code 2) by the binary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parsed flat configuration with typed, defaulted getters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                field: format!("line {}", lineno + 1),
                message: format!("expected `key = value`, got `{}`", line),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError {
                    field: format!("line {}", lineno + 1),
                    message: "empty key".into(),
                });
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            field: path.display().to_string(),
            message: format!("cannot read config: {}", e),
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// Keys present in the file but never read by the experiment; used to
    /// reject typos instead of silently ignoring them.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.entries
            .keys()
            .filter(|k| !known.contains(&k.as_str()))
            .cloned()
            .collect()
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.entries
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string())
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError {
                field: key.to_string(),
                message: format!("expected a real number, got `{}`", v),
            }),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError {
                field: key.to_string(),
                message: format!("expected a nonnegative integer, got `{}`", v),
            }),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.get_u64(key, default as u64).map(|v| v as usize)
    }

    /// Comma-separated list of integers.
    pub fn get_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| ConfigError {
                        field: key.to_string(),
                        message: format!("expected comma-separated integers, got `{}`", v),
                    })
                })
                .collect(),
        }
    }
}
