//! `key = value` configuration with `METAMP_<KEY>` environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{ClusterSpace, OutlierConfig};
use crate::ml::{ModelKind, SelfTrainConfig};

pub const ENV_PREFIX: &str = "METAMP_";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{origin} line {line}: expected key = value")]
    Syntax { origin: String, line: usize },
    #[error("{origin}: unknown key {key:?}")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: bad value {value:?} for {key}: {message}")]
    BadValue {
        origin: String,
        key: String,
        value: String,
        message: String,
    },
    #[error("cannot read {0}")]
    Unreadable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub host: String,
    pub port: u16,
    pub cache_ttl_secs: u64,
    pub store_path: Option<PathBuf>,
    pub outliers: OutlierConfig,
    pub model: ModelKind,
    pub seed: u64,
    pub n_trees: usize,
    pub self_training: SelfTrainConfig,
    pub shapley_permutations: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            host: "127.0.0.1".into(),
            port: 8080,
            cache_ttl_secs: 300,
            store_path: None,
            outliers: OutlierConfig::default(),
            model: ModelKind::RandomForest,
            seed: 42,
            n_trees: 100,
            self_training: SelfTrainConfig::default(),
            shapley_permutations: 100,
        }
    }
}

pub const KEYS: [&str; 14] = [
    "host",
    "port",
    "cache_ttl_secs",
    "store_path",
    "dbscan_eps",
    "dbscan_min_pts",
    "pca_components",
    "cluster_space",
    "model",
    "seed",
    "n_trees",
    "self_training_threshold",
    "self_training_max_iter",
    "shapley_permutations",
];

impl Config {
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str, origin: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e: T::Err| ConfigError::BadValue {
                origin: origin.into(),
                key: key.into(),
                value: value.into(),
                message: e.to_string(),
            })
        }
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "host" => self.host = value.to_string(),
            "port" => self.port = parse(&key, value, origin)?,
            "cache_ttl_secs" => self.cache_ttl_secs = parse(&key, value, origin)?,
            "store_path" => self.store_path = Some(PathBuf::from(value)).filter(|p| !p.as_os_str().is_empty()),
            "dbscan_eps" => self.outliers.eps = parse(&key, value, origin)?,
            "dbscan_min_pts" => self.outliers.min_pts = parse(&key, value, origin)?,
            "pca_components" => self.outliers.k = parse(&key, value, origin)?,
            "cluster_space" => {
                self.outliers.space = match value.to_ascii_lowercase().as_str() {
                    "pca" => ClusterSpace::Pca,
                    "standardized" => ClusterSpace::Standardized,
                    _ => {
                        return Err(ConfigError::BadValue {
                            origin: origin.into(),
                            key,
                            value: value.into(),
                            message: "expected pca or standardized".into(),
                        })
                    }
                }
            }
            "model" => self.model = parse(&key, value, origin)?,
            "seed" => self.seed = parse(&key, value, origin)?,
            "n_trees" => self.n_trees = parse(&key, value, origin)?,
            "self_training_threshold" => self.self_training.threshold = parse(&key, value, origin)?,
            "self_training_max_iter" => self.self_training.max_iter = parse(&key, value, origin)?,
            "shapley_permutations" => self.shapley_permutations = parse(&key, value, origin)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    origin: origin.into(),
                    key,
                })
            }
        }
        Ok(())
    }

    /// Applies a config file body. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.into(),
                line: i + 1,
            })?;
            self.set(k, v, origin)?;
        }
        Ok(())
    }

    /// Applies `METAMP_<KEY>` variables for the known keys; other
    /// `METAMP_` variables (such as `METAMP_SERVER`) are left alone.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (k, v) in vars {
            if let Some(key) = k.strip_prefix(ENV_PREFIX) {
                let key = key.to_ascii_lowercase();
                if KEYS.contains(&key.as_str()) {
                    self.set(&key, &v, &k)?;
                }
            }
        }
        Ok(())
    }

    /// Defaults, then the file (if any), then the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|_| ConfigError::Unreadable(p.display().to_string()))?;
            c.apply_text(&text, &p.display().to_string())?;
        }
        c.apply_env(std::env::vars())?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let mut c = Config::default();
        c.apply_text("# service\nport = 9000\ncache_ttl_secs=5\n\ndbscan_eps = 1.25\nmodel = gb\n", "test.conf")
            .unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.outliers.eps, 1.25);
        assert_eq!(c.model, ModelKind::GradientBoosting);
        c.apply_env([
            ("METAMP_PORT".to_string(), "9100".to_string()),
            ("METAMP_SERVER".to_string(), "http://x".to_string()),
            ("PORT".to_string(), "1".to_string()),
        ])
        .unwrap();
        assert_eq!(c.port, 9100);
        assert_eq!(c.cache_ttl_secs, 5);
    }

    #[test]
    fn errors_carry_location() {
        let mut c = Config::default();
        assert_eq!(
            c.apply_text("port 9000", "a.conf"),
            Err(ConfigError::Syntax { origin: "a.conf".into(), line: 1 })
        );
        assert!(matches!(c.apply_text("colour = red", "a.conf"), Err(ConfigError::UnknownKey { .. })));
        assert!(matches!(c.apply_text("port = lots", "a.conf"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(
            c.apply_env([("METAMP_SEED".to_string(), "-1".to_string())]),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn every_key_is_settable() {
        let values = ["0.0.0.0", "1", "2", "/tmp/s.json", "0.5", "3", "2", "standardized", "rf", "7", "10", "0.9", "3", "60"];
        let mut c = Config::default();
        for (k, v) in KEYS.iter().zip(values) {
            c.set(k, v, "t").unwrap();
        }
        assert_eq!(c.outliers.space, ClusterSpace::Standardized);
        assert_eq!(c.shapley_permutations, 60);
    }
}
