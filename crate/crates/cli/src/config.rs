//! `key = value` config files and flag/file/default merging.
//!
//! Every flag has a config-file key of the same name; a flag given on the
//! command line wins over the file, which wins over the built-in default.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use jn_core::numerics::{parse_rational, Rational};

const KNOWN_KEYS: [&str; 13] = [
    "n-range",
    "eps",
    "spec",
    "samples",
    "seed",
    "out",
    "format",
    "precision",
    "method",
    "model-k",
    "model-l",
    "function",
    "n-max",
];

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{}:{}: expected `key = value`", path.display(), lineno + 1);
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("{}:{}: unknown key `{key}`", path.display(), lineno + 1);
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value, else parsed file value, else none.
    pub fn pick<T, F>(&self, flag: Option<T>, key: &str, parse: F) -> Result<Option<T>>
    where
        F: FnOnce(&str) -> Result<T>,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(text) => parse(text)
                .map(Some)
                .with_context(|| format!("config key `{key}`")),
            None => Ok(None),
        }
    }
}

/// Inclusive level range `a..b`, or a single `a`; `a > b` is the empty range.
pub fn parse_range(text: &str) -> Result<(u64, u64)> {
    let text = text.trim();
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a.trim().parse()?, b.trim().parse()?),
        None => {
            let v: u64 = text.parse()?;
            (v, v)
        }
    };
    if lo == 0 {
        bail!("levels start at 1");
    }
    Ok((lo, hi))
}

/// Comma-separated list of exact rationals.
pub fn parse_eps_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .map(|part| parse_rational(part).map_err(|e| anyhow!(e)))
        .collect()
}
