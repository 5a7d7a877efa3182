// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON config files: weights, generator, controller and intervention set.
//!
//! Every loader validates what it reads, so a value returned from here is
//! ready to use.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::composition::{CliWeights, CompositionWeights, NormStats, Pipeline};
use crate::error::{Error, Result};
use crate::lgd::{InterventionSet, LgdConfig};
use crate::proxies::ReuseConfig;
use crate::scalar::Scalar;
use crate::synth::SynthConfig;

/// Weights file written by fitting and read by every load computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct WeightsFile<S> {
    #[serde(default)]
    pub composition: CompositionWeights<S>,
    #[serde(default)]
    pub cli: CliWeights<S>,
    #[serde(default)]
    pub reuse: ReuseConfig<S>,
    /// Frozen normalization statistics, if the weights came with them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_stats: Option<NormStats<S>>,
    /// Point-biserial correlation achieved when fitting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<S>,
}

impl<S: Scalar> Default for WeightsFile<S> {
    fn default() -> Self {
        Self::from_pipeline(&Pipeline::default())
    }
}

impl<S: Scalar> WeightsFile<S> {
    pub fn from_pipeline(p: &Pipeline<S>) -> Self {
        Self {
            composition: p.composition,
            cli: p.cli,
            reuse: p.reuse,
            norm_stats: None,
            correlation: None,
        }
    }

    pub fn pipeline(&self) -> Pipeline<S> {
        Pipeline {
            composition: self.composition,
            cli: self.cli,
            reuse: self.reuse,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.composition.validate()?;
        self.cli.validate()?;
        ReuseConfig::new(self.reuse.theta).map(|_| ())
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a JSON file without further validation.
pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("config types serialize infallibly");
    s.push('\n');
    s
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(value)).map_err(|e| Error::io(path, e))
}

pub fn load_weights<S: Scalar>(path: impl AsRef<Path>) -> Result<WeightsFile<S>> {
    let w: WeightsFile<S> = load_json(path)?;
    w.validate()?;
    Ok(w)
}

pub fn load_synth(path: impl AsRef<Path>) -> Result<SynthConfig> {
    let c: SynthConfig = load_json(path)?;
    c.validate()?;
    Ok(c)
}

pub fn load_lgd<S: Scalar>(path: impl AsRef<Path>) -> Result<LgdConfig<S>> {
    let c: LgdConfig<S> = load_json(path)?;
    c.validate()?;
    Ok(c)
}

pub fn load_interventions(path: impl AsRef<Path>) -> Result<InterventionSet> {
    let s: InterventionSet = load_json(path)?;
    s.validate()?;
    Ok(s)
}
