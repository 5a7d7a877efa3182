// SPDX-License-Identifier: MIT OR Apache-2.0

//! Deterministic grid search for the load-index weights.
//!
//! The load index is affine in the six normalized proxies, so the
//! point-biserial correlation of any weight setting follows from one pass of
//! sufficient statistics (feature covariance and feature/label covariance).
//! Each grid point then costs a 6×6 quadratic form.

use crate::composition::{CliWeights, CompositionWeights, LoadPoint, Pair};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Grid steps per unit for the load-index weights (pitch 0.05).
pub const CLI_GRID_STEPS: usize = 20;
/// Grid steps per unit for α/β/γ in joint mode (pitch 0.1).
pub const MIX_GRID_STEPS: usize = 10;

/// One labeled series: load points (already normalized) and per-step error labels.
pub type LabeledPoints<'a, S> = (&'a [LoadPoint<S>], &'a [bool]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig<S> {
    /// Search α/β/γ jointly with the load-index weights.
    pub joint: bool,
    /// Mixing weights used when `joint` is false.
    pub base: CompositionWeights<S>,
}

impl<S: Scalar> Default for FitConfig<S> {
    fn default() -> Self {
        Self {
            joint: false,
            base: CompositionWeights::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<S> {
    pub composition: CompositionWeights<S>,
    pub cli: CliWeights<S>,
    /// Point-biserial correlation achieved on the fitting data.
    pub correlation: S,
}

struct Moments<S> {
    cov: [[S; 6]; 6],
    cov_y: [S; 6],
    var_y: S,
}

fn moments<S: Scalar>(data: &[LabeledPoints<'_, S>]) -> Result<Moments<S>> {
    let mut n = 0usize;
    let mut positives = 0usize;
    for (points, labels) in data {
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                step: 0,
                what: "load points vs error labels",
                left: points.len(),
                right: labels.len(),
            });
        }
        n += labels.len();
        positives += labels.iter().filter(|l| **l).count();
    }
    if positives == 0 || positives == n {
        return Err(Error::DegenerateLabels(positives == n && n > 0));
    }
    let nf = S::of_usize(n);
    let rows = || {
        data.iter().flat_map(|(points, labels)| {
            points.iter().zip(labels.iter()).map(|(p, &l)| {
                (
                    p.normalized.to_array(),
                    if l { S::one() } else { S::zero() },
                )
            })
        })
    };
    let mut mean = [S::zero(); 6];
    let mut mean_y = S::zero();
    for (x, y) in rows() {
        for k in 0..6 {
            mean[k] += x[k];
        }
        mean_y += y;
    }
    for m in &mut mean {
        *m /= nf;
    }
    mean_y /= nf;
    let mut cov = [[S::zero(); 6]; 6];
    let mut cov_y = [S::zero(); 6];
    let mut var_y = S::zero();
    for (x, y) in rows() {
        let dy = y - mean_y;
        var_y += dy * dy;
        let d: [S; 6] = std::array::from_fn(|k| x[k] - mean[k]);
        for i in 0..6 {
            cov_y[i] += d[i] * dy;
            for j in 0..6 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    Ok(Moments { cov, cov_y, var_y })
}

/// Coefficients of the load index on the six normalized proxies (constant
/// offsets from the inverted germane terms dropped).
fn coefficients<S: Scalar>(cw: &CompositionWeights<S>, w: &CliWeights<S>) -> [S; 6] {
    let [wi, we, wg] = w.w;
    [
        wi * cw.alpha.0,
        wi * cw.alpha.1,
        we * cw.beta.0,
        we * cw.beta.1,
        -wg * cw.gamma.0,
        -wg * cw.gamma.1,
    ]
}

fn correlation<S: Scalar>(m: &Moments<S>, c: &[S; 6]) -> Option<S> {
    let mut var = S::zero();
    let mut scale = S::zero();
    for i in 0..6 {
        scale += c[i] * c[i] * m.cov[i][i];
        for j in 0..6 {
            var += c[i] * c[j] * m.cov[i][j];
        }
    }
    if var.partial_cmp(&(scale * S::epsilon() * S::of(64.0))) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let num: S = (0..6).map(|i| c[i] * m.cov_y[i]).sum();
    Some(num / (var * m.var_y).sqrt())
}

fn grid3(steps: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..=steps).flat_map(move |i| (0..=steps - i).map(move |j| [i, j, steps - i - j]))
}

fn ratio<S: Scalar>(k: usize, steps: usize) -> S {
    S::of(k as f64 / steps as f64)
}

fn pair<S: Scalar>(k: usize) -> Pair<S> {
    Pair(
        ratio(k, MIX_GRID_STEPS),
        ratio(MIX_GRID_STEPS - k, MIX_GRID_STEPS),
    )
}

/// Distance of a grid point from the uniform weights, used to break ties.
fn off_uniform<S: Scalar>(cw: &CompositionWeights<S>, w: &CliWeights<S>) -> S {
    let third = S::one() / S::of(3.0);
    let half = S::of(0.5);
    w.w.iter().map(|v| (*v - third).abs()).sum::<S>()
        + (cw.alpha.0 - half).abs()
        + (cw.beta.0 - half).abs()
        + (cw.gamma.0 - half).abs()
}

/// Grid search maximizing the point-biserial correlation between the load
/// index and the error labels.
///
/// Ties (within a few ulps) go to the setting closest to uniform weights,
/// then to the first in lexicographic grid order. Settings whose load index
/// is constant are skipped; if all are, the result is [`Error::ConstantCli`].
pub fn fit_weights<S: Scalar>(
    data: &[LabeledPoints<'_, S>],
    cfg: &FitConfig<S>,
) -> Result<FitResult<S>> {
    let m = moments(data)?;
    let mixes: Vec<CompositionWeights<S>> = if cfg.joint {
        let ks = 0..=MIX_GRID_STEPS;
        ks.clone()
            .flat_map(|a| {
                ks.clone().flat_map(move |b| {
                    (0..=MIX_GRID_STEPS).map(move |g| CompositionWeights {
                        alpha: pair(a),
                        beta: pair(b),
                        gamma: pair(g),
                    })
                })
            })
            .collect()
    } else {
        cfg.base.validate()?;
        vec![cfg.base]
    };
    let tol = S::epsilon() * S::of(16.0);
    let mut best: Option<(S, S, FitResult<S>)> = None;
    for w_idx in grid3(CLI_GRID_STEPS) {
        let w = CliWeights {
            w: w_idx.map(|k| ratio(k, CLI_GRID_STEPS)),
        };
        for cw in &mixes {
            let Some(r) = correlation(&m, &coefficients(cw, &w)) else {
                continue;
            };
            let dist = off_uniform(cw, &w);
            let better = match &best {
                None => true,
                Some((best_r, best_dist, _)) => {
                    r > *best_r + tol || ((r - *best_r).abs() <= tol && dist < *best_dist)
                }
            };
            if better {
                best = Some((
                    r,
                    dist,
                    FitResult {
                        composition: *cw,
                        cli: w,
                        correlation: r,
                    },
                ));
            }
        }
    }
    best.map(|(_, _, fit)| fit).ok_or(Error::ConstantCli)
}

/// Re-weights already-normalized load points.
pub fn reweigh<S: Scalar>(
    points: &[LoadPoint<S>],
    cw: &CompositionWeights<S>,
    w: &CliWeights<S>,
) -> Vec<LoadPoint<S>> {
    points
        .iter()
        .map(|p| LoadPoint::from_normalized(p.step, p.raw, p.normalized, cw, w))
        .collect()
}
