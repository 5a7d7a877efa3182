// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use super::{StepRecord, Trace, TraceMode};
use crate::scalar::Scalar;

/// Probability vectors must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// One broken invariant. `step` is `None` for header/trace-level rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub step: Option<usize>,
    pub field: String,
    pub layer: Option<usize>,
    pub rule: String,
}

impl Violation {
    fn at(step: usize, field: &str, layer: Option<usize>, rule: impl Into<String>) -> Self {
        Self {
            step: Some(step),
            field: field.to_string(),
            layer,
            rule: rule.into(),
        }
    }

    fn global(field: &str, rule: impl Into<String>) -> Self {
        Self {
            step: None,
            field: field.to_string(),
            layer: None,
            rule: rule.into(),
        }
    }

    pub fn field_label(&self) -> String {
        match self.layer {
            Some(l) => format!("{}[layer {l}]", self.field),
            None => self.field.clone(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(s) => write!(f, "step {s}: {}: {}", self.field_label(), self.rule),
            None => write!(f, "trace: {}: {}", self.field_label(), self.rule),
        }
    }
}

/// Checks every trace invariant; an empty list means the trace is valid.
pub fn validate_trace<S: Scalar>(trace: &Trace<S>) -> Vec<Violation> {
    let mut out = Vec::new();
    let meta = &trace.meta;
    if meta.num_layers == 0 {
        out.push(Violation::global("num_layers", "must be at least 1"));
    }
    if meta.hidden_dim == 0 {
        out.push(Violation::global("hidden_dim", "must be at least 1"));
    }
    if !(meta.epsilon > S::zero() && meta.epsilon.is_finite()) {
        out.push(Violation::global("epsilon", "must be positive and finite"));
    }
    if trace.steps.is_empty() {
        out.push(Violation::global(
            "steps",
            "trace must contain at least one step",
        ));
    }
    for (i, rec) in trace.steps.iter().enumerate() {
        if rec.step != i {
            out.push(Violation::at(
                rec.step,
                "step",
                None,
                format!("expected index {i} (indices start at 0 and increase by 1)"),
            ));
        }
        check_step(trace, rec, &mut out);
    }
    out
}

fn check_step<S: Scalar>(trace: &Trace<S>, rec: &StepRecord<S>, out: &mut Vec<Violation>) {
    let meta = &trace.meta;
    let t = rec.step;
    let layers = meta.num_layers;

    if rec.attention.is_empty() {
        if meta.mode == TraceMode::Full {
            out.push(Violation::at(t, "attention", None, "required in full mode"));
        }
    } else {
        if rec.attention.len() != layers {
            out.push(Violation::at(
                t,
                "attention",
                None,
                format!("expected {layers} layers, found {}", rec.attention.len()),
            ));
        }
        let width = rec.attention_width();
        for (l, row) in rec.attention.iter().enumerate() {
            if row.len() != width {
                out.push(Violation::at(
                    t,
                    "attention",
                    Some(l),
                    format!("row width {} differs from layer 0 width {width}", row.len()),
                ));
            }
            if let Some(rule) = probability_rule(row) {
                out.push(Violation::at(t, "attention", Some(l), rule));
            }
        }
        if let Some(flags) = &rec.concept_active {
            if flags.len() != width {
                out.push(Violation::at(
                    t,
                    "concept_active",
                    None,
                    format!(
                        "length {} differs from attention width {width}",
                        flags.len()
                    ),
                ));
            }
        }
    }

    match &rec.hidden {
        Some(hidden) => {
            if hidden.len() != layers {
                out.push(Violation::at(
                    t,
                    "hidden",
                    None,
                    format!("expected {layers} layers, found {}", hidden.len()),
                ));
            }
            for (l, h) in hidden.iter().enumerate() {
                if h.len() != meta.hidden_dim {
                    out.push(Violation::at(
                        t,
                        "hidden",
                        Some(l),
                        format!(
                            "length {} differs from hidden_dim {}",
                            h.len(),
                            meta.hidden_dim
                        ),
                    ));
                }
                if h.iter().any(|v| !v.is_finite()) {
                    out.push(Violation::at(t, "hidden", Some(l), "values must be finite"));
                }
            }
        }
        None if meta.mode == TraceMode::Full => {
            out.push(Violation::at(t, "hidden", None, "required in full mode"));
        }
        None => {}
    }

    if rec.cache_hits > rec.cache_queries {
        out.push(Violation::at(
            t,
            "cache_hits",
            None,
            format!(
                "hits {} exceed queries {}",
                rec.cache_hits, rec.cache_queries
            ),
        ));
    }

    if let Some(rule) = probability_rule(&rec.token_dist) {
        out.push(Violation::at(t, "token_dist", None, rule));
    }
    if let Some(r) = &rec.ref_dist {
        if let Some(rule) = probability_rule(r) {
            out.push(Violation::at(t, "ref_dist", None, rule));
        }
        if r.len() != rec.token_dist.len() {
            out.push(Violation::at(
                t,
                "ref_dist",
                None,
                format!(
                    "length {} differs from token_dist {}",
                    r.len(),
                    rec.token_dist.len()
                ),
            ));
        }
    }

    match &rec.digest {
        Some(d) => {
            if d.len() != layers {
                out.push(Violation::at(
                    t,
                    "digest",
                    None,
                    format!("expected {layers} layers, found {}", d.len()),
                ));
            }
            for (l, g) in d.iter().enumerate() {
                if !(g.entropy >= S::zero() && g.entropy.is_finite()) {
                    out.push(Violation::at(
                        t,
                        "digest.entropy",
                        Some(l),
                        "must be finite and >= 0",
                    ));
                }
                if !(g.dispersion >= S::zero() && g.dispersion.is_finite()) {
                    out.push(Violation::at(
                        t,
                        "digest.dispersion",
                        Some(l),
                        "must be finite and >= 0",
                    ));
                }
            }
        }
        None if meta.mode == TraceMode::Digest && rec.hidden.is_none() => {
            out.push(Violation::at(
                t,
                "digest",
                None,
                "required in digest mode when hidden states are absent",
            ));
        }
        None => {}
    }
}

fn probability_rule<S: Scalar>(p: &[S]) -> Option<String> {
    if p.is_empty() {
        return Some("probability vector must be non-empty".into());
    }
    if p.iter().any(|v| !v.is_finite() || *v < S::zero()) {
        return Some("entries must be finite and non-negative".into());
    }
    let sum: f64 = p.iter().map(|v| v.as_f64()).sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Some(format!(
            "entries sum to {sum}, expected 1 within {SUM_TOLERANCE}"
        ));
    }
    None
}
