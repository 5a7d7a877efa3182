// SPDX-License-Identifier: MIT OR Apache-2.0

//! Canonical trace data model.
//!
//! A [`Trace`] is one decoding run: a [`TraceMeta`] header followed by one
//! [`StepRecord`] per step. The on-disk encoding lives in [`io`]; the
//! invariant checker in [`validate`].

mod io;
mod validate;

pub use io::{
    parse_trace, parse_trace_from, read_trace, read_trace_from, write_trace, write_trace_to,
    FORMAT_NAME, FORMAT_VERSION,
};
pub use validate::{validate_trace, Violation};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Whether a trace carries raw hidden states or only per-layer digests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    #[default]
    Full,
    Digest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TraceMeta<S> {
    pub num_layers: usize,
    pub hidden_dim: usize,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub mode: TraceMode,
    pub epsilon: S,
}

impl<S: Scalar> TraceMeta<S> {
    pub fn new(num_layers: usize, hidden_dim: usize) -> Self {
        Self {
            num_layers,
            hidden_dim,
            source: String::new(),
            mode: TraceMode::Full,
            epsilon: S::of(crate::DEFAULT_EPSILON),
        }
    }
}

/// Precomputed per-layer scalars for digest-mode traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct LayerDigest<S> {
    /// Shannon entropy (nats) of this layer's attention row.
    pub entropy: S,
    /// `‖h^l − h̄‖ / (‖h̄‖ + ε)` for this layer.
    pub dispersion: S,
}

/// Raw internals captured for one decoding step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct StepRecord<S> {
    pub step: usize,
    /// One attention row per layer; all rows of a step share a width.
    /// May be empty in digest mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attention: Vec<Vec<S>>,
    /// One hidden vector per layer (full mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<Vec<S>>>,
    pub cache_hits: u64,
    pub cache_queries: u64,
    pub token_dist: Vec<S>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_dist: Option<Vec<S>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concept_active: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_event: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<Vec<LayerDigest<S>>>,
}

impl<S: Scalar> StepRecord<S> {
    /// Width of the attended context at this step (0 when attention is absent).
    pub fn attention_width(&self) -> usize {
        self.attention.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S> {
    pub meta: TraceMeta<S>,
    pub steps: Vec<StepRecord<S>>,
}

impl<S: Scalar> Trace<S> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Error labels, if every step carries one.
    pub fn error_labels(&self) -> Option<Vec<bool>> {
        self.steps.iter().map(|s| s.error_event).collect()
    }

    /// First `k` steps as a standalone trace.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            meta: self.meta.clone(),
            steps: self.steps[..k.min(self.steps.len())].to_vec(),
        }
    }
}
