//! Plain-text run configuration: one `key = value` per line, `#` starts a
//! comment. Keys are the long flag names (`penalty-risk1`, `lambda`, ...);
//! underscores are accepted in place of dashes. Flags override the file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "RBC_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            if k.trim().is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }

    /// The flag value when present, otherwise the parsed file value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.get_str(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{v}'")))
            })
            .transpose()
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Seed precedence: flag, then file, then `RBC_SEED`, then [`DEFAULT_SEED`].
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = self.pick(flag, "seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }
}

/// Splits a comma list, dropping blanks.
pub fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

pub fn parse_bool(value: &str) -> Option<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}
