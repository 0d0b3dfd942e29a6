//! TOML run configuration: `[hyperparameters]`, `[chain]` and `[output]`
//! tables, every key optional.

use std::path::Path;

use asi_core::mcmc::ChainConfig;
use asi_core::Hyperparameters;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub histogram_bins: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { histogram_bins: 50 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub hyperparameters: Hyperparameters,
    pub chain: ChainConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> CliResult<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.validate().map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })?;
        Ok(cfg)
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => Self::from_toml(&std::fs::read_to_string(p).map_err(CliError::io(p))?, p),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.hyperparameters.validate()?;
        self.chain.validate()?;
        if self.output.histogram_bins == 0 {
            return Err(CliError::Input("output.histogram_bins must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration, defaults included.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_toml("", Path::new("x.toml")).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.hyperparameters.kappa_eta, 10.0);
        assert_eq!(c.chain.sweeps, 20_000);
        assert_eq!(c.output.histogram_bins, 50);
    }

    #[test]
    fn partial_tables_override() {
        let c = RunConfig::from_toml("[hyperparameters]\nkappa_eta = 5.0\n[chain]\nsweeps = 100\nburn_in = 10\n", Path::new("x")).unwrap();
        assert_eq!(c.hyperparameters.kappa_eta, 5.0);
        assert_eq!(c.hyperparameters.kappa_nu, 1.0);
        assert_eq!(c.chain.sweeps, 100);
        assert_ne!(c.digest(), RunConfig::default().digest());
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(RunConfig::from_toml("[hyperparameters]\nkappa = 1.0\n", Path::new("x")).is_err());
        assert!(RunConfig::from_toml("[chain]\nsweeps = 10\nburn_in = 10\n", Path::new("x")).is_err());
        assert!(RunConfig::from_toml("[hyperparameters]\nkappa_c = 1.5\n", Path::new("x")).is_err());
    }
}
