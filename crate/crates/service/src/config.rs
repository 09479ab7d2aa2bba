use std::path::{Path, PathBuf};

use hybrid_miner::DiscoveryParams;
use serde::{Deserialize, Serialize};

/// Environment variables read by [`ServiceConfig::apply_env`].
pub const ENV_HOST: &str = "HYBRID_MINER_HOST";
pub const ENV_PORT: &str = "HYBRID_MINER_PORT";
pub const ENV_UPLOAD_LIMIT: &str = "HYBRID_MINER_UPLOAD_LIMIT";
pub const ENV_DATA_DIR: &str = "HYBRID_MINER_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    /// Largest accepted request body, in bytes.
    pub upload_limit: usize,
    /// Uploaded logs are stored here and reloaded on start when set.
    pub data_dir: Option<PathBuf>,
    /// Parameter values used for fields a request leaves out.
    pub defaults: DiscoveryParams,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            upload_limit: 64 * 1024 * 1024,
            data_dir: None,
            defaults: DiscoveryParams::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid TOML config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid JSON config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid value {value:?} for {var}")]
    Env { var: &'static str, value: String },
    #[error("invalid default parameter {}: {}", .0.field, .0.message)]
    Param(hybrid_miner::ParamError),
}

impl ServiceConfig {
    /// Reads a TOML or JSON file (chosen by extension, TOML otherwise).
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            Ok(toml::from_str(&text)?)
        }
    }

    /// Overrides fields from `HYBRID_MINER_*` variables.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        for (k, v) in vars {
            let value: String = v.into();
            match k.as_ref() {
                ENV_HOST => self.host = value,
                ENV_PORT => self.port = value.parse().map_err(|_| ConfigError::Env { var: ENV_PORT, value })?,
                ENV_UPLOAD_LIMIT => {
                    self.upload_limit = value.parse().map_err(|_| ConfigError::Env { var: ENV_UPLOAD_LIMIT, value })?
                }
                ENV_DATA_DIR => self.data_dir = Some(value.into()),
                _ => {}
            }
        }
        Ok(())
    }

    /// File (if any) plus process environment, validated.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        config.apply_env(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.defaults.validate().map_err(ConfigError::Param)
    }
}
