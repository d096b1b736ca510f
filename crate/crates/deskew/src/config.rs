//! Estimator configuration files.
//!
//! A config file uses the field names of [`EstimatorConfig`]; missing fields
//! take the 1024 preset's values. The format follows the extension: `.toml`
//! or `.json`.

use std::fs;
use std::path::Path;

use deskew_core::EstimatorConfig;

use crate::error::{Error, Result};

pub fn load_config(path: impl AsRef<Path>) -> Result<EstimatorConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: EstimatorConfig = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text)?,
        Some("json") => serde_json::from_str(&text)?,
        _ => {
            return Err(Error::invalid(format!(
                "{}: config files must end in .toml or .json",
                path.display()
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
