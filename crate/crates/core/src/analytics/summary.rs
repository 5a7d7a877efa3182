// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::spikes::{LoadComponent, DEFAULT_SPIKE_THRESHOLD};
use crate::composition::LoadPoint;
use crate::proxies::{ProxyVector, PROXY_NAMES};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ComponentSummary<S> {
    pub component: LoadComponent,
    pub mean: S,
    pub max: S,
    pub argmax: usize,
    pub spikes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct TraceSummary<S> {
    pub steps: usize,
    pub spike_threshold: S,
    /// IL, EL, GL, CLI in that order.
    pub components: [ComponentSummary<S>; 4],
    pub raw_means: ProxyVector<S>,
    pub normalized_means: ProxyVector<S>,
}

/// Per-component mean/max/argmax and spike counts at the default threshold.
///
/// # Panics
/// If `points` is empty.
pub fn trace_summary<S: Scalar>(points: &[LoadPoint<S>]) -> TraceSummary<S> {
    assert!(!points.is_empty(), "summary of an empty series");
    let n = S::of_usize(points.len());
    let threshold = S::of(DEFAULT_SPIKE_THRESHOLD);
    let components = LoadComponent::ALL.map(|c| {
        let mut sum = S::zero();
        let mut max = c.of(&points[0]);
        let mut argmax = points[0].step;
        let mut spikes = 0;
        for p in points {
            let v = c.of(p);
            sum += v;
            if v > max {
                max = v;
                argmax = p.step;
            }
            if v > threshold {
                spikes += 1;
            }
        }
        ComponentSummary {
            component: c,
            mean: sum / n,
            max,
            argmax,
            spikes,
        }
    });
    let mean_of = |f: fn(&LoadPoint<S>) -> [S; 6]| {
        let mut acc = [S::zero(); 6];
        for p in points {
            for (a, v) in acc.iter_mut().zip(f(p)) {
                *a += v;
            }
        }
        ProxyVector::from_array(acc.map(|a| a / n))
    };
    TraceSummary {
        steps: points.len(),
        spike_threshold: threshold,
        components,
        raw_means: mean_of(|p| p.raw.to_array()),
        normalized_means: mean_of(|p| p.normalized.to_array()),
    }
}

impl<S: Scalar> TraceSummary<S> {
    pub fn component(&self, c: LoadComponent) -> &ComponentSummary<S> {
        &self.components[c as usize]
    }

    /// Plain-text report.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "steps: {}", self.steps);
        let _ = writeln!(out, "spike threshold: {}", self.spike_threshold);
        let _ = writeln!(out, "component  mean      max       argmax  spikes");
        for c in &self.components {
            let _ = writeln!(
                out,
                "{:<9}  {:<8.6}  {:<8.6}  {:<6}  {}",
                c.component.name(),
                c.mean.as_f64(),
                c.max.as_f64(),
                c.argmax,
                c.spikes
            );
        }
        let _ = writeln!(out, "proxy          raw_mean      normalized_mean");
        let raw = self.raw_means.to_array();
        let norm = self.normalized_means.to_array();
        for (i, name) in PROXY_NAMES.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<13}  {:<12.6}  {:.6}",
                name,
                raw[i].as_f64(),
                norm[i].as_f64()
            );
        }
        out
    }

    /// Machine-readable rows: `(section, name, statistic, value)`.
    pub fn rows(&self) -> Vec<(String, String, String, String)> {
        let mut rows = Vec::new();
        for c in &self.components {
            let name = c.component.name().to_string();
            rows.push((
                "load".into(),
                name.clone(),
                "mean".into(),
                c.mean.to_string(),
            ));
            rows.push(("load".into(), name.clone(), "max".into(), c.max.to_string()));
            rows.push((
                "load".into(),
                name.clone(),
                "argmax".into(),
                c.argmax.to_string(),
            ));
            rows.push(("load".into(), name, "spikes".into(), c.spikes.to_string()));
        }
        let raw = self.raw_means.to_array();
        let norm = self.normalized_means.to_array();
        for (i, name) in PROXY_NAMES.iter().enumerate() {
            rows.push((
                "proxy".into(),
                name.to_string(),
                "raw_mean".into(),
                raw[i].to_string(),
            ));
            rows.push((
                "proxy".into(),
                name.to_string(),
                "normalized_mean".into(),
                norm[i].to_string(),
            ));
        }
        rows
    }
}
