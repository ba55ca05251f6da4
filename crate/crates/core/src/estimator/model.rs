//! Fitted prediction model and its TOML form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub const_inject: f64,
    pub const_store: f64,
    pub const_load: f64,
    pub const_free: f64,
    /// Training error, as a fraction.
    pub err: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PredictionModel {
    /// Run-cost model with zero command constants.
    pub fn run_only(alpha: f64, beta: f64, gamma: f64) -> Self {
        PredictionModel {
            alpha,
            beta,
            gamma,
            const_inject: 0.0,
            const_store: 0.0,
            const_load: 0.0,
            const_free: 0.0,
            err: 0.0,
            t_min: None,
            t_max: None,
            epsilon: None,
            seed: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        let finite = [
            self.alpha,
            self.beta,
            self.gamma,
            self.const_inject,
            self.const_store,
            self.const_load,
            self.const_free,
            self.err,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("model has a non-finite parameter".into()));
        }
        if self.alpha <= 0.0 {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.beta < 0.0 {
            return Err(Error::Config(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        if self.gamma <= 0.0 {
            return Err(Error::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        let consts = [
            self.const_inject,
            self.const_store,
            self.const_load,
            self.const_free,
        ];
        if consts.iter().any(|&c| c < 0.0) {
            return Err(Error::Config(
                "command constants must be non-negative".into(),
            ));
        }
        if let (Some(lo), Some(hi)) = (self.t_min, self.t_max) {
            if !(lo <= self.gamma && self.gamma <= hi) {
                return Err(Error::Config(format!(
                    "gamma {} outside [{lo}, {hi}]",
                    self.gamma
                )));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model serialises")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: PredictionModel = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        m.check()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&std::fs::read_to_string(path).at(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()).at(path)
    }
}
