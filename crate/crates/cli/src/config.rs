//! Flat key-value configuration files:
//!
//! ```text
//! # comment
//! [simulation]
//! phi_grid = -0.9, -0.5, 0, 0.5, 0.9
//! lengths = 30, 100
//! replications = 500
//!
//! [training]
//! use = holdout
//! ```
//!
//! Keys before the first section header belong to `[simulation]`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ar1bayes::experiments::TrainingUse;

use crate::{CliError, CliResult};

const KNOWN_KEYS: &[&str] = &[
    "simulation.phi_grid",
    "simulation.lengths",
    "simulation.replications",
    "simulation.burn_in",
    "simulation.sigma2",
    "simulation.seed",
    "simulation.prob",
    "simulation.tol",
    "simulation.repeats",
    "priors.include",
    "priors.g",
    "priors.g_location",
    "training.min_count",
    "training.fraction",
    "training.use",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut section = "simulation".to_string();
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            let full = format!("{section}.{}", key.trim());
            if !KNOWN_KEYS.contains(&full.as_str()) {
                return Err(format!("line {}: unknown key `{full}`", i + 1));
            }
            entries.insert(full, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.entries
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    /// Comma-separated list; an empty value yields an empty list.
    pub fn list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        self.entries
            .get(key)
            .map(|v| parse_list(v).map_err(|bad| CliError::Usage(format!("config key `{key}`: cannot parse `{bad}`"))))
            .transpose()
    }
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| s.to_string()))
        .collect()
}

pub fn parse_training_use(value: &str) -> CliResult<TrainingUse> {
    match value.trim().to_ascii_lowercase().as_str() {
        "holdout" | "hold-out" => Ok(TrainingUse::HoldOut),
        "reuse" => Ok(TrainingUse::Reuse),
        other => Err(CliError::Usage(format!(
            "training use must be `holdout` or `reuse`, got `{other}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_lists() {
        let cfg = ConfigFile::parse("replications = 7\n[training]\nuse = reuse # trailing\n[simulation]\nphi_grid = -0.5, 0.5\n").unwrap();
        assert_eq!(cfg.get::<usize>("simulation.replications").unwrap(), Some(7));
        assert_eq!(cfg.list::<f64>("simulation.phi_grid").unwrap(), Some(vec![-0.5, 0.5]));
        assert_eq!(cfg.get::<String>("training.use").unwrap().as_deref(), Some("reuse"));
    }

    #[test]
    fn empty_list_and_errors() {
        let cfg = ConfigFile::parse("phi_grid =\n").unwrap();
        assert_eq!(cfg.list::<f64>("simulation.phi_grid").unwrap(), Some(vec![]));
        assert!(ConfigFile::parse("bogus = 1").unwrap_err().contains("unknown key"));
        assert!(ConfigFile::parse("[simulation]\nlengths").unwrap_err().contains("line 2"));
        assert!(ConfigFile::parse("lengths = a").unwrap().list::<usize>("simulation.lengths").is_err());
    }
}
