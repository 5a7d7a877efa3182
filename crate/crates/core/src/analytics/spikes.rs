// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::composition::LoadPoint;
use crate::scalar::Scalar;

pub const DEFAULT_SPIKE_THRESHOLD: f64 = 0.8;
/// Trailing window (steps) within which a spike counts as coinciding with an error.
pub const DEFAULT_WINDOW: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LoadComponent {
    Il,
    El,
    Gl,
    Cli,
}

impl LoadComponent {
    pub const ALL: [LoadComponent; 4] = [Self::Il, Self::El, Self::Gl, Self::Cli];

    pub fn of<S: Scalar>(self, p: &LoadPoint<S>) -> S {
        match self {
            Self::Il => p.il,
            Self::El => p.el,
            Self::Gl => p.gl,
            Self::Cli => p.cli,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Il => "IL",
            Self::El => "EL",
            Self::Gl => "GL",
            Self::Cli => "CLI",
        }
    }
}

impl fmt::Display for LoadComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LoadComponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "il" => Ok(Self::Il),
            "el" => Ok(Self::El),
            "gl" => Ok(Self::Gl),
            "cli" => Ok(Self::Cli),
            other => Err(format!("unknown load component `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct SpikeEvent<S> {
    pub step: usize,
    pub component: LoadComponent,
    pub value: S,
    pub threshold: S,
}

/// Steps whose chosen component strictly exceeds `threshold`.
pub fn detect_spikes<S: Scalar>(
    points: &[LoadPoint<S>],
    component: LoadComponent,
    threshold: S,
) -> Vec<SpikeEvent<S>> {
    points
        .iter()
        .filter_map(|p| {
            let value = component.of(p);
            (value > threshold).then_some(SpikeEvent {
                step: p.step,
                component,
                value,
                threshold,
            })
        })
        .collect()
}

/// Counts (errors, errors with an EL spike in `[t − window, t]`).
fn coincidence_counts<S: Scalar>(
    points: &[LoadPoint<S>],
    labels: &[bool],
    threshold: S,
    window: usize,
) -> (usize, usize) {
    let spiking: Vec<bool> = points.iter().map(|p| p.el > threshold).collect();
    let mut errors = 0;
    let mut hits = 0;
    for (t, _) in labels.iter().enumerate().filter(|(_, l)| **l) {
        errors += 1;
        let lo = t.saturating_sub(window);
        let hi = t.min(spiking.len().saturating_sub(1));
        if lo <= hi && spiking[lo..=hi].iter().any(|s| *s) {
            hits += 1;
        }
    }
    (errors, hits)
}

/// Fraction of error steps preceded (or accompanied) by an EL spike within
/// `window` steps. `None` when there are no error steps.
pub fn error_spike_coincidence<S: Scalar>(
    points: &[LoadPoint<S>],
    labels: &[bool],
    threshold: S,
    window: usize,
) -> Option<S> {
    let (errors, hits) = coincidence_counts(points, labels, threshold, window);
    (errors > 0).then(|| S::of_usize(hits) / S::of_usize(errors))
}

/// Coincidence pooled over many traces (total coinciding errors / total errors).
pub fn pooled_coincidence<S: Scalar>(
    runs: &[(&[LoadPoint<S>], &[bool])],
    threshold: S,
    window: usize,
) -> Option<S> {
    let (errors, hits) = runs.iter().fold((0, 0), |(e, h), (p, l)| {
        let (de, dh) = coincidence_counts(p, l, threshold, window);
        (e + de, h + dh)
    });
    (errors > 0).then(|| S::of_usize(hits) / S::of_usize(errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn el_points(el: &[f64]) -> Vec<LoadPoint<f64>> {
        el.iter()
            .enumerate()
            .map(|(t, &e)| LoadPoint {
                step: t,
                raw: Default::default(),
                normalized: Default::default(),
                il: 0.0,
                el: e,
                gl: 0.0,
                cli: e / 3.0,
            })
            .collect()
    }

    #[test]
    fn spike_examples() {
        let pts = el_points(&[0.1, 0.9, 0.2]);
        let s = detect_spikes(&pts, LoadComponent::El, 0.8);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].step, 1);
        assert!(detect_spikes(&el_points(&[0.1, 0.2]), LoadComponent::El, 0.8).is_empty());
        let all = detect_spikes(&el_points(&[0.1, 0.0, 0.3]), LoadComponent::El, 0.0);
        assert_eq!(all.iter().map(|s| s.step).collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn coincidence_examples() {
        let mut el = vec![0.1; 12];
        let mut labels = vec![false; 12];
        labels[5] = true;
        labels[9] = true;
        el[4] = 0.95;
        assert_eq!(
            error_spike_coincidence(&el_points(&el), &labels, 0.8, 3),
            Some(0.5)
        );
        // every error step is itself a spike
        el[9] = 0.9;
        el[5] = 0.9;
        assert_eq!(
            error_spike_coincidence(&el_points(&el), &labels, 0.8, 0),
            Some(1.0)
        );
        let quiet = vec![0.1; 12];
        assert_eq!(
            error_spike_coincidence(&el_points(&quiet), &labels, 0.8, 3),
            Some(0.0)
        );
        assert_eq!(
            error_spike_coincidence(&el_points(&quiet), &[false; 12], 0.8, 3),
            None
        );
    }

    proptest! {
        #[test]
        fn coincidence_is_monotone(
            data in prop::collection::vec((0.0f64..1.0, any::<bool>()), 1..80),
            w in 0usize..6,
            th in 0.0f64..1.0,
            dth in 0.0f64..0.5,
        ) {
            let el: Vec<f64> = data.iter().map(|d| d.0).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            let pts = el_points(&el);
            if let Some(base) = error_spike_coincidence(&pts, &labels, th, w) {
                let wider = error_spike_coincidence(&pts, &labels, th, w + 1).unwrap();
                let higher = error_spike_coincidence(&pts, &labels, th + dth, w).unwrap();
                prop_assert!(wider >= base);
                prop_assert!(higher <= base);
            }
        }
    }
}
