// SPDX-License-Identifier: MIT OR Apache-2.0

//! Plain data tables shared by the command-line outputs.

use super::{num, Table};
use crate::composition::LoadPoint;
use crate::lgd::InterventionHistory;
use crate::proxies::PROXY_NAMES;
use crate::scalar::Scalar;
use crate::synth::Phase;

/// One row per step: raw proxies, normalized proxies, then IL/EL/GL/CLI.
pub fn points_csv<S: Scalar>(points: &[LoadPoint<S>]) -> String {
    let header = std::iter::once("step".to_string())
        .chain(PROXY_NAMES.iter().map(|n| format!("raw_{n}")))
        .chain(PROXY_NAMES.iter().map(|n| format!("norm_{n}")))
        .chain(["il", "el", "gl", "cli"].map(String::from));
    let mut t = Table::new(header);
    for p in points {
        t.row(
            std::iter::once(p.step.to_string())
                .chain(p.raw.to_array().map(num))
                .chain(p.normalized.to_array().map(num))
                .chain(p.loads().map(num))
                .chain(std::iter::once(num(p.cli))),
        );
    }
    t.finish()
}

/// Load rows for several runs, with the error label of each step.
/// One run for [`run_points_csv`]: seed, load points, error labels.
pub type RunRows<'a, S> = (u64, &'a [LoadPoint<S>], Vec<bool>);

pub fn run_points_csv<S: Scalar>(runs: &[RunRows<'_, S>]) -> String {
    let mut t = Table::new(["seed", "step", "il", "el", "gl", "cli", "error"]);
    for (seed, points, labels) in runs {
        for (p, e) in points.iter().zip(labels) {
            t.row([
                seed.to_string(),
                p.step.to_string(),
                num(p.il),
                num(p.el),
                num(p.gl),
                num(p.cli),
                u8::from(*e).to_string(),
            ]);
        }
    }
    t.finish()
}

/// Intervention events, tagged with the seed of the run that produced them.
pub fn history_csv<S: Scalar>(histories: &[(u64, &InterventionHistory<S>)]) -> String {
    let mut t = Table::new([
        "seed",
        "step",
        "tier",
        "intervention",
        "il",
        "el",
        "gl",
        "cli",
    ]);
    for (seed, h) in histories {
        for e in &h.events {
            t.row([
                seed.to_string(),
                e.step.to_string(),
                e.tier.to_string(),
                e.intervention_id.clone(),
                num(e.clt[0]),
                num(e.clt[1]),
                num(e.clt[2]),
                num(e.cli),
            ]);
        }
    }
    t.finish()
}

pub fn phases_csv(phases: &[Phase]) -> String {
    let mut t = Table::new(["step", "phase"]);
    for (i, p) in phases.iter().enumerate() {
        t.row([i.to_string(), p.name().to_string()]);
    }
    t.finish()
}
