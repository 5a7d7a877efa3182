// SPDX-License-Identifier: MIT OR Apache-2.0

//! The six raw load proxies computed from one step's internals.
//!
//! Boundary rules: with no previous step and no reference distribution the
//! stability proxy is 0; with no previous step consolidation is 1; without
//! concept flags reuse is 1. Missing information never adds load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trace::{StepRecord, Trace, TraceMeta, TraceMode};

/// Upper clamp for the KL stability proxy (nats).
pub const KL_MAX: f64 = 50.0;

/// Default attention-peak threshold for concept reuse.
pub const DEFAULT_THETA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ProxyVector<S> {
    pub entropy: S,
    pub dispersion: S,
    pub miss: S,
    pub stability: S,
    pub consolidation: S,
    pub reuse: S,
}

/// Fixed proxy order used by every table and chart.
pub const PROXY_NAMES: [&str; 6] = [
    "entropy",
    "dispersion",
    "miss",
    "stability",
    "consolidation",
    "reuse",
];

impl<S: Scalar> ProxyVector<S> {
    pub fn to_array(&self) -> [S; 6] {
        [
            self.entropy,
            self.dispersion,
            self.miss,
            self.stability,
            self.consolidation,
            self.reuse,
        ]
    }

    pub fn from_array(a: [S; 6]) -> Self {
        Self {
            entropy: a[0],
            dispersion: a[1],
            miss: a[2],
            stability: a[3],
            consolidation: a[4],
            reuse: a[5],
        }
    }

    pub fn map(&self, mut f: impl FnMut(usize, S) -> S) -> Self {
        let a = self.to_array();
        Self::from_array(std::array::from_fn(|i| f(i, a[i])))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ReuseConfig<S> {
    pub theta: S,
}

impl<S: Scalar> Default for ReuseConfig<S> {
    fn default() -> Self {
        Self {
            theta: S::of(DEFAULT_THETA),
        }
    }
}

impl<S: Scalar> ReuseConfig<S> {
    pub fn new(theta: S) -> Result<Self> {
        if theta > S::zero() && theta < S::one() {
            Ok(Self { theta })
        } else {
            Err(Error::config(format!(
                "theta must lie in (0, 1), got {theta}"
            )))
        }
    }
}

fn shannon<S: Scalar>(row: &[S]) -> S {
    row.iter()
        .filter(|a| **a > S::zero())
        .map(|&a| -a * a.ln())
        .sum()
}

fn norm<S: Scalar>(v: impl Iterator<Item = S>) -> S {
    v.map(|x| x * x).sum::<S>().sqrt()
}

/// Per-layer attention entropies (nats), from rows or from the digest.
pub fn layer_entropies<S: Scalar>(step: &StepRecord<S>) -> Result<Vec<S>> {
    if !step.attention.is_empty() {
        return Ok(step.attention.iter().map(|r| shannon(r)).collect());
    }
    match &step.digest {
        Some(d) => Ok(d.iter().map(|g| g.entropy).collect()),
        None => Err(Error::MissingField {
            step: step.step,
            field: "attention",
        }),
    }
}

/// Per-layer dispersion terms `‖h^l − h̄‖ / (‖h̄‖ + ε)`, with `h̄` the
/// across-layer mean.
pub fn layer_dispersions<S: Scalar>(step: &StepRecord<S>, meta: &TraceMeta<S>) -> Result<Vec<S>> {
    if let Some(hidden) = &step.hidden {
        let layers = hidden.len();
        if layers == 0 {
            return Err(Error::MissingField {
                step: step.step,
                field: "hidden",
            });
        }
        let dim = hidden[0].len();
        let inv = S::one() / S::of_usize(layers);
        let mean: Vec<S> = (0..dim)
            .map(|j| hidden.iter().map(|h| h[j]).sum::<S>() * inv)
            .collect();
        let denom = norm(mean.iter().copied()) + meta.epsilon;
        return Ok(hidden
            .iter()
            .map(|h| norm(h.iter().zip(&mean).map(|(a, b)| *a - *b)) / denom)
            .collect());
    }
    match &step.digest {
        Some(d) => Ok(d.iter().map(|g| g.dispersion).collect()),
        None => Err(Error::MissingField {
            step: step.step,
            field: "hidden",
        }),
    }
}

fn mean<S: Scalar>(v: &[S]) -> S {
    if v.is_empty() {
        S::zero()
    } else {
        v.iter().copied().sum::<S>() / S::of_usize(v.len())
    }
}

/// Mean over layers of the Shannon entropy of each attention row.
pub fn attention_entropy<S: Scalar>(step: &StepRecord<S>, _meta: &TraceMeta<S>) -> Result<S> {
    Ok(mean(&layer_entropies(step)?))
}

pub fn representation_dispersion<S: Scalar>(
    step: &StepRecord<S>,
    meta: &TraceMeta<S>,
) -> Result<S> {
    Ok(mean(&layer_dispersions(step, meta)?))
}

/// `1 − hits / (queries + ε)`.
pub fn cache_miss<S: Scalar>(step: &StepRecord<S>, meta: &TraceMeta<S>) -> S {
    let hits = S::of(step.cache_hits as f64);
    let queries = S::of(step.cache_queries as f64);
    S::one() - hits / (queries + meta.epsilon)
}

/// `KL(p ‖ q)` in nats with `q` floored at `epsilon`, clamped to `[0, KL_MAX]`.
pub fn kl_divergence<S: Scalar>(p: &[S], q: &[S], epsilon: S) -> Result<S> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            step: 0,
            what: "token_dist vs reference distribution",
            left: p.len(),
            right: q.len(),
        });
    }
    let kl: S = p
        .iter()
        .zip(q)
        .filter(|(pi, _)| **pi > S::zero())
        .map(|(&pi, &qi)| pi * (pi / qi.max(epsilon)).ln())
        .sum();
    Ok(kl.max(S::zero()).min(S::of(KL_MAX)))
}

/// KL of this step's token distribution from its reference: `ref_dist` when
/// recorded, otherwise the previous step's distribution.
pub fn decoding_stability<S: Scalar>(
    step: &StepRecord<S>,
    prev: Option<&StepRecord<S>>,
    meta: &TraceMeta<S>,
) -> Result<S> {
    let reference = match (&step.ref_dist, prev) {
        (Some(r), _) => r.as_slice(),
        (None, Some(p)) => p.token_dist.as_slice(),
        (None, None) => return Ok(S::zero()),
    };
    kl_divergence(&step.token_dist, reference, meta.epsilon).map_err(|e| e.at_step(step.step))
}

fn cosine<S: Scalar>(a: &[S], b: &[S]) -> S {
    let na = norm(a.iter().copied());
    let nb = norm(b.iter().copied());
    if na == S::zero() || nb == S::zero() {
        return S::zero();
    }
    let dot: S = a.iter().zip(b).map(|(x, y)| *x * *y).sum();
    (dot / (na * nb)).max(-S::one()).min(S::one())
}

/// Mean cosine between temporal deltas of adjacent layers.
pub fn consolidation<S: Scalar>(
    step: &StepRecord<S>,
    prev: Option<&StepRecord<S>>,
    meta: &TraceMeta<S>,
) -> Result<S> {
    let Some(prev) = prev else {
        return Ok(S::one());
    };
    let (cur, before) = match (&step.hidden, &prev.hidden) {
        (Some(c), Some(p)) => (c, p),
        _ if meta.mode == TraceMode::Digest => return Ok(S::one()),
        (None, _) => {
            return Err(Error::MissingField {
                step: step.step,
                field: "hidden",
            })
        }
        (_, None) => {
            return Err(Error::MissingField {
                step: prev.step,
                field: "hidden",
            })
        }
    };
    if cur.len() < 2 {
        return Ok(S::one());
    }
    let deltas: Vec<Vec<S>> = cur
        .iter()
        .zip(before)
        .map(|(c, p)| c.iter().zip(p).map(|(a, b)| *a - *b).collect())
        .collect();
    let cosines: Vec<S> = deltas.windows(2).map(|w| cosine(&w[1], &w[0])).collect();
    Ok(mean(&cosines))
}

/// Share of peaked positions (max-over-layers attention above θ) that are
/// concept-active.
pub fn concept_reuse<S: Scalar>(
    step: &StepRecord<S>,
    cfg: &ReuseConfig<S>,
    meta: &TraceMeta<S>,
) -> Result<S> {
    let Some(flags) = &step.concept_active else {
        return Ok(S::one());
    };
    if step.attention.is_empty() {
        return Err(Error::MissingField {
            step: step.step,
            field: "attention",
        });
    }
    let width = step.attention_width();
    if flags.len() != width {
        return Err(Error::LengthMismatch {
            step: step.step,
            what: "concept_active vs attention width",
            left: flags.len(),
            right: width,
        });
    }
    let mut peaked = 0usize;
    let mut active = 0usize;
    for (i, &flag) in flags.iter().enumerate() {
        let peak = step
            .attention
            .iter()
            .map(|row| row[i])
            .fold(S::neg_infinity(), S::max);
        if peak > cfg.theta {
            peaked += 1;
            if flag {
                active += 1;
            }
        }
    }
    Ok(S::of_usize(active) / (S::of_usize(peaked) + meta.epsilon))
}

/// Proxies for one step given its predecessor.
pub fn step_proxies<S: Scalar>(
    step: &StepRecord<S>,
    prev: Option<&StepRecord<S>>,
    meta: &TraceMeta<S>,
    cfg: &ReuseConfig<S>,
) -> Result<ProxyVector<S>> {
    Ok(ProxyVector {
        entropy: attention_entropy(step, meta)?,
        dispersion: representation_dispersion(step, meta)?,
        miss: cache_miss(step, meta),
        stability: decoding_stability(step, prev, meta)?,
        consolidation: consolidation(step, prev, meta)?,
        reuse: concept_reuse(step, cfg, meta)?,
    })
}

pub fn compute_proxies<S: Scalar>(
    trace: &Trace<S>,
    cfg: &ReuseConfig<S>,
) -> Result<Vec<ProxyVector<S>>> {
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(i, step)| {
            let prev = i.checked_sub(1).map(|j| &trace.steps[j]);
            step_proxies(step, prev, &trace.meta, cfg)
        })
        .collect()
}
