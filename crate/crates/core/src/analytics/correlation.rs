// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::composition::LoadPoint;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pearson correlation; `None` when either series has zero variance.
pub fn pearson<S: Scalar>(x: &[S], y: &[S]) -> Option<S> {
    assert_eq!(x.len(), y.len(), "pearson: length mismatch");
    if x.is_empty() {
        return None;
    }
    let n = S::of_usize(x.len());
    let mx = x.iter().copied().sum::<S>() / n;
    let my = y.iter().copied().sum::<S>() / n;
    let (mut sxy, mut sxx, mut syy) = (S::zero(), S::zero(), S::zero());
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (*a - mx, *b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= S::zero() || syy <= S::zero() {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).max(-S::one()).min(S::one()))
}

/// Point-biserial correlation between a continuous series and binary labels.
pub fn point_biserial<S: Scalar>(values: &[S], labels: &[bool]) -> Result<S> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch {
            step: 0,
            what: "values vs labels",
            left: values.len(),
            right: labels.len(),
        });
    }
    let positives = labels.iter().filter(|l| **l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::DegenerateLabels(positives > 0));
    }
    let y: Vec<S> = labels
        .iter()
        .map(|&l| if l { S::one() } else { S::zero() })
        .collect();
    pearson(values, &y).ok_or(Error::ConstantCli)
}

pub fn cli_error_correlation<S: Scalar>(points: &[LoadPoint<S>], labels: &[bool]) -> Result<S> {
    let cli: Vec<S> = points.iter().map(|p| p.cli).collect();
    point_biserial(&cli, labels)
}
