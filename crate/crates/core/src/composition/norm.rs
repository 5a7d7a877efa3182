// SPDX-License-Identifier: MIT OR Apache-2.0

//! Robust median/IQR normalization followed by a logistic squash.

use serde::{Deserialize, Serialize};

use crate::proxies::ProxyVector;
use crate::scalar::{sigmoid, Scalar};

/// Median and interquartile range of one proxy series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct RobustStats<S> {
    pub median: S,
    pub iqr: S,
}

/// Per-proxy robust statistics, in [`crate::proxies::PROXY_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct NormStats<S> {
    pub entropy: RobustStats<S>,
    pub dispersion: RobustStats<S>,
    pub miss: RobustStats<S>,
    pub stability: RobustStats<S>,
    pub consolidation: RobustStats<S>,
    pub reuse: RobustStats<S>,
}

impl<S: Scalar> NormStats<S> {
    pub fn to_array(&self) -> [RobustStats<S>; 6] {
        [
            self.entropy,
            self.dispersion,
            self.miss,
            self.stability,
            self.consolidation,
            self.reuse,
        ]
    }

    pub fn from_array(a: [RobustStats<S>; 6]) -> Self {
        Self {
            entropy: a[0],
            dispersion: a[1],
            miss: a[2],
            stability: a[3],
            consolidation: a[4],
            reuse: a[5],
        }
    }

    /// Squashed normalization of every proxy.
    pub fn normalize(&self, raw: &ProxyVector<S>, epsilon: S) -> ProxyVector<S> {
        let stats = self.to_array();
        raw.map(|i, x| normalize(x, &stats[i], epsilon))
    }
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `q·(n−1)`).
pub fn quantile_sorted<S: Scalar>(sorted: &[S], q: S) -> S {
    assert!(!sorted.is_empty(), "quantile of empty series");
    let n = sorted.len();
    let pos = q * S::of_usize(n - 1);
    let lo = pos.floor();
    let lo_idx = lo.to_usize().unwrap_or(0).min(n - 1);
    let hi_idx = (lo_idx + 1).min(n - 1);
    let frac = pos - lo;
    sorted[lo_idx] + (sorted[hi_idx] - sorted[lo_idx]) * frac
}

pub fn robust_stats_sorted<S: Scalar>(sorted: &[S]) -> RobustStats<S> {
    let q1 = quantile_sorted(sorted, S::of(0.25));
    let q3 = quantile_sorted(sorted, S::of(0.75));
    RobustStats {
        median: quantile_sorted(sorted, S::of(0.5)),
        iqr: (q3 - q1).max(S::zero()),
    }
}

pub fn robust_stats<S: Scalar>(values: &[S]) -> RobustStats<S> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite proxy values"));
    robust_stats_sorted(&sorted)
}

/// Per-proxy median and IQR over the whole series.
pub fn fit_norm_stats<S: Scalar>(proxies: &[ProxyVector<S>]) -> NormStats<S> {
    NormStats::from_array(std::array::from_fn(|k| {
        let column: Vec<S> = proxies.iter().map(|p| p.to_array()[k]).collect();
        robust_stats(&column)
    }))
}

/// `(x − median) / (IQR + ε)` before squashing.
pub fn robust_z<S: Scalar>(value: S, stats: &RobustStats<S>, epsilon: S) -> S {
    (value - stats.median) / (stats.iqr + epsilon)
}

/// Robust z-score squashed into `[0, 1]`; the median maps to 0.5.
pub fn normalize<S: Scalar>(value: S, stats: &RobustStats<S>, epsilon: S) -> S {
    sigmoid(robust_z(value, stats, epsilon))
}

/// Expanding-window statistics for causal normalization: after `push`ing
/// `x_1..x_t`, [`ExpandingStats::stats`] equals `fit_norm_stats(x_1..x_t)`.
#[derive(Debug, Clone, Default)]
pub struct ExpandingStats<S> {
    sorted: [Vec<S>; 6],
}

impl<S: Scalar> ExpandingStats<S> {
    pub fn new() -> Self {
        Self {
            sorted: Default::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.sorted[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, raw: &ProxyVector<S>) {
        for (column, x) in self.sorted.iter_mut().zip(raw.to_array()) {
            let at = column.partition_point(|v| *v <= x);
            column.insert(at, x);
        }
    }

    pub fn stats(&self) -> NormStats<S> {
        NormStats::from_array(std::array::from_fn(|k| {
            robust_stats_sorted(&self.sorted[k])
        }))
    }
}
