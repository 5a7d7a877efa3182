// SPDX-License-Identifier: MIT OR Apache-2.0

//! From raw proxies to load points: robust normalization, load composition
//! and the composite load index, plus weight fitting against error labels.

mod fit;
mod norm;
mod weights;

pub use fit::{
    fit_weights, reweigh, FitConfig, FitResult, LabeledPoints, CLI_GRID_STEPS, MIX_GRID_STEPS,
};
pub use norm::{
    fit_norm_stats, normalize, quantile_sorted, robust_stats, robust_stats_sorted, robust_z,
    ExpandingStats, NormStats, RobustStats,
};
pub use weights::{compose_loads, composite_cli, CliWeights, CompositionWeights, Pair};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::proxies::{compute_proxies, ProxyVector, ReuseConfig};
use crate::scalar::Scalar;
use crate::trace::Trace;

/// Where normalization statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// Statistics over the full series.
    #[default]
    Offline,
    /// Expanding-window statistics over steps `0..=t`.
    Causal,
}

impl std::str::FromStr for NormMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "offline" => Ok(NormMode::Offline),
            "causal" => Ok(NormMode::Causal),
            other => Err(format!("unknown normalization mode `{other}`")),
        }
    }
}

/// Load state of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct LoadPoint<S> {
    pub step: usize,
    pub raw: ProxyVector<S>,
    pub normalized: ProxyVector<S>,
    pub il: S,
    pub el: S,
    pub gl: S,
    pub cli: S,
}

impl<S: Scalar> LoadPoint<S> {
    pub fn from_normalized(
        step: usize,
        raw: ProxyVector<S>,
        normalized: ProxyVector<S>,
        cw: &CompositionWeights<S>,
        w: &CliWeights<S>,
    ) -> Self {
        let (il, el, gl) = compose_loads(&normalized, cw);
        Self {
            step,
            raw,
            normalized,
            il,
            el,
            gl,
            cli: composite_cli(il, el, gl, w),
        }
    }

    pub fn loads(&self) -> [S; 3] {
        [self.il, self.el, self.gl]
    }
}

/// Pipeline knobs shared by every entry point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Pipeline<S> {
    #[serde(default)]
    pub composition: CompositionWeights<S>,
    #[serde(default)]
    pub cli: CliWeights<S>,
    #[serde(default)]
    pub reuse: ReuseConfig<S>,
}

impl<S: Scalar> Default for Pipeline<S> {
    fn default() -> Self {
        Self {
            composition: CompositionWeights::default(),
            cli: CliWeights::default(),
            reuse: ReuseConfig::default(),
        }
    }
}

/// Load points for a raw proxy series under the chosen normalization mode.
pub fn loads_from_proxies<S: Scalar>(
    raw: &[ProxyVector<S>],
    cw: &CompositionWeights<S>,
    w: &CliWeights<S>,
    mode: NormMode,
    epsilon: S,
) -> Vec<LoadPoint<S>> {
    match mode {
        NormMode::Offline => {
            let stats = fit_norm_stats(raw);
            loads_with_stats(raw, &stats, cw, w, epsilon)
        }
        NormMode::Causal => {
            let mut window = ExpandingStats::new();
            raw.iter()
                .enumerate()
                .map(|(t, r)| {
                    window.push(r);
                    let n = window.stats().normalize(r, epsilon);
                    LoadPoint::from_normalized(t, *r, n, cw, w)
                })
                .collect()
        }
    }
}

/// Load points normalized against fixed, externally supplied statistics.
pub fn loads_with_stats<S: Scalar>(
    raw: &[ProxyVector<S>],
    stats: &NormStats<S>,
    cw: &CompositionWeights<S>,
    w: &CliWeights<S>,
    epsilon: S,
) -> Vec<LoadPoint<S>> {
    raw.iter()
        .enumerate()
        .map(|(t, r)| LoadPoint::from_normalized(t, *r, stats.normalize(r, epsilon), cw, w))
        .collect()
}

/// Full pipeline: proxies, normalization, loads and load index per step.
pub fn compute_clt<S: Scalar>(
    trace: &Trace<S>,
    pipeline: &Pipeline<S>,
    mode: NormMode,
) -> Result<Vec<LoadPoint<S>>> {
    let raw = compute_proxies(trace, &pipeline.reuse)?;
    Ok(loads_from_proxies(
        &raw,
        &pipeline.composition,
        &pipeline.cli,
        mode,
        trace.meta.epsilon,
    ))
}
