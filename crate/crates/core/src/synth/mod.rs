// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded, phase-structured synthetic traces.
//!
//! A Markov chain over phases (planning, search, consolidation) with
//! geometric durations drives every per-step signal. Each signal draws from
//! its own ChaCha stream keyed by `(seed, step, signal)`, so two runs that
//! differ only in applied effects see identical random inputs and diverge
//! only through the parameters the effects change.

mod generator;

pub(crate) use generator::{convert_meta, convert_step};
pub use generator::{generate, Effect, Generator, PARAMETERS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Planning,
    Search,
    Consolidation,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Planning => "planning",
            Phase::Search => "search",
            Phase::Consolidation => "consolidation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub name: Phase,
    /// Symmetric Dirichlet concentration of attention rows.
    pub attention_concentration: f64,
    /// Step size of the hidden-state walk.
    pub walk_scale: f64,
    pub miss_prob: f64,
    /// Mixing weight of fresh mass into the token distribution each step.
    pub dist_drift: f64,
    pub concept_hit_prob: f64,
    /// Mean phase length in steps (geometric).
    pub mean_duration: f64,
    /// Correlation between adjacent layers' hidden-state updates.
    #[serde(default)]
    pub layer_alignment: f64,
}

impl PhaseSpec {
    fn validate(&self) -> Result<()> {
        let name = self.name.name();
        let unit = |v: f64, what: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(format!("{name}.{what} = {v} outside [0, 1]")))
            }
        };
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!(
                    "{name}.{what} = {v} must be positive"
                )))
            }
        };
        positive(self.attention_concentration, "attention_concentration")?;
        positive(self.walk_scale, "walk_scale")?;
        unit(self.miss_prob, "miss_prob")?;
        unit(self.dist_drift, "dist_drift")?;
        unit(self.concept_hit_prob, "concept_hit_prob")?;
        if !(self.mean_duration >= 1.0 && self.mean_duration.is_finite()) {
            return Err(Error::config(format!("{name}.mean_duration must be >= 1")));
        }
        if !(-1.0..=1.0).contains(&self.layer_alignment) {
            return Err(Error::config(format!(
                "{name}.layer_alignment outside [-1, 1]"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub phases: Vec<PhaseSpec>,
    pub num_layers: usize,
    pub hidden_dim: usize,
    /// Attended positions at step 0.
    pub context_init: usize,
    /// Positions added per step.
    pub context_growth: f64,
    /// Cap on attended positions.
    pub context_max: usize,
    pub vocab: usize,
    /// Error-coupling strength κ on raw miss + stability.
    pub kappa: f64,
    /// Logit offset of the error model; ln 19 gives a 5% base rate at κ = 0.
    #[serde(default = "default_offset")]
    pub error_offset: f64,
    /// Mean reversion of the hidden-state walk toward its layer anchor.
    #[serde(default = "default_reversion")]
    pub reversion: f64,
    pub seed: u64,
    pub steps: usize,
    /// Emit digest records (per-layer entropy/dispersion) instead of hidden states.
    #[serde(default)]
    pub digest: bool,
}

/// Error-coupling strength of [`SynthConfig::strong_coupling`].
pub const STRONG_KAPPA: f64 = 5.0;

fn default_offset() -> f64 {
    19f64.ln()
}

fn default_reversion() -> f64 {
    0.1
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.phases.is_empty() {
            return Err(Error::config("at least one phase is required"));
        }
        for p in &self.phases {
            p.validate()?;
        }
        if self.steps == 0 {
            return Err(Error::config("steps must be >= 1"));
        }
        if self.num_layers == 0 || self.hidden_dim == 0 {
            return Err(Error::config("num_layers and hidden_dim must be >= 1"));
        }
        if self.context_init == 0 || self.context_max < self.context_init {
            return Err(Error::config("need 1 <= context_init <= context_max"));
        }
        if !(self.context_growth >= 0.0 && self.context_growth.is_finite()) {
            return Err(Error::config("context_growth must be >= 0"));
        }
        if self.vocab < 2 {
            return Err(Error::config("vocab must be >= 2"));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::config("kappa must be >= 0"));
        }
        if !self.error_offset.is_finite() {
            return Err(Error::config("error_offset must be finite"));
        }
        if !(0.0..1.0).contains(&self.reversion) {
            return Err(Error::config("reversion must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Three-phase default: long planning and consolidation stretches with
    /// short, costly search bursts.
    pub fn default_phases() -> Vec<PhaseSpec> {
        vec![
            PhaseSpec {
                name: Phase::Planning,
                attention_concentration: 5.0,
                walk_scale: 1.0,
                miss_prob: 0.03,
                dist_drift: 0.05,
                concept_hit_prob: 0.2,
                mean_duration: 8.0,
                layer_alignment: -0.3,
            },
            PhaseSpec {
                name: Phase::Search,
                attention_concentration: 0.1,
                walk_scale: 1.0,
                miss_prob: 0.7,
                dist_drift: 0.9,
                concept_hit_prob: 0.9,
                mean_duration: 3.0,
                layer_alignment: 0.0,
            },
            PhaseSpec {
                name: Phase::Consolidation,
                attention_concentration: 0.5,
                walk_scale: 0.5,
                miss_prob: 0.08,
                dist_drift: 0.1,
                concept_hit_prob: 0.6,
                mean_duration: 8.0,
                layer_alignment: 0.95,
            },
        ]
    }

    /// Errors tied tightly to raw miss + stability.
    pub fn strong_coupling() -> Self {
        Self::default().with_kappa(STRONG_KAPPA)
    }

    /// Long phases with far-apart parameters, so each phase occupies its
    /// own region of load space.
    pub fn well_separated() -> Self {
        let phase = |name, conc, walk, miss, drift, concept, align| PhaseSpec {
            name,
            attention_concentration: conc,
            walk_scale: walk,
            miss_prob: miss,
            dist_drift: drift,
            concept_hit_prob: concept,
            mean_duration: 40.0,
            layer_alignment: align,
        };
        Self {
            phases: vec![
                phase(Phase::Planning, 5.0, 1.0, 0.02, 0.02, 0.05, -0.5),
                phase(Phase::Search, 0.1, 1.0, 0.8, 0.9, 0.95, 0.0),
                phase(Phase::Consolidation, 1.0, 0.5, 0.3, 0.3, 0.5, 0.95),
            ],
            steps: 1200,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            phases: Self::default_phases(),
            num_layers: 4,
            hidden_dim: 16,
            context_init: 24,
            context_growth: 0.1,
            context_max: 32,
            vocab: 32,
            kappa: 0.0,
            error_offset: default_offset(),
            reversion: default_reversion(),
            seed: 0,
            steps: 200,
            digest: false,
        }
    }
}
