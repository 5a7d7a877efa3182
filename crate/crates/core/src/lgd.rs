// SPDX-License-Identifier: MIT OR Apache-2.0

//! Load-guided decoding: a two-tier threshold controller.
//!
//! Each step's load index is compared against `tau_act` first, then
//! `tau_warn`; the matching tier's intervention with the highest score is
//! applied. An intervention's score is the load it targets, minus a penalty
//! of 1 if the same intervention fired within the last `cooldown` steps.
//! Normalization is always causal (expanding window), so a decision at step
//! `t` depends only on steps `0..=t`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::composition::{
    fit_norm_stats, loads_with_stats, ExpandingStats, LoadPoint, NormMode, NormStats, Pipeline,
};
use crate::error::{Error, Result};
use crate::proxies::step_proxies;
use crate::scalar::Scalar;
use crate::synth::{Effect, Generator, SynthConfig};
use crate::trace::{StepRecord, Trace, TraceMeta};

pub const DEFAULT_TAU_WARN: f64 = 0.6;
pub const DEFAULT_TAU_ACT: f64 = 0.8;
pub const DEFAULT_COOLDOWN: usize = 5;
/// Score penalty for an intervention still cooling down.
pub const COOLDOWN_PENALTY: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Warn,
    Act,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Warn => "warn",
            Tier::Act => "act",
        })
    }
}

/// Load an intervention addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Target {
    Il,
    El,
    Gl,
}

impl Target {
    fn pick<S: Scalar>(self, clt: &[S; 3]) -> S {
        clt[self as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intervention {
    pub id: String,
    pub target: Target,
    pub tier: Tier,
    pub effect: Effect,
}

impl Intervention {
    pub fn validate(&self) -> Result<()> {
        self.effect.validate()
    }
}

/// Intervention set as stored in a config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionSet {
    pub interventions: Vec<Intervention>,
}

impl InterventionSet {
    pub fn validate(&self) -> Result<()> {
        self.interventions
            .iter()
            .try_for_each(Intervention::validate)
    }

    /// Planning, efficiency and consolidation aids at both tiers.
    pub fn standard() -> Self {
        let iv = |id: &str, target, tier, mods: &[(&str, f64)], duration| Intervention {
            id: id.to_string(),
            target,
            tier,
            effect: Effect::new(mods.iter().copied(), duration),
        };
        Self {
            interventions: vec![
                iv(
                    "planning-aid",
                    Target::Il,
                    Tier::Warn,
                    &[("attention_concentration", 0.5)],
                    3,
                ),
                iv(
                    "efficiency-aid",
                    Target::El,
                    Tier::Warn,
                    &[("miss_prob", 0.3), ("dist_drift", 0.3)],
                    6,
                ),
                iv(
                    "consolidation-aid",
                    Target::Gl,
                    Tier::Warn,
                    &[("concept_hit_prob", 1.5)],
                    3,
                ),
                iv(
                    "hierarchical-attention",
                    Target::Il,
                    Tier::Act,
                    &[("attention_concentration", 0.25)],
                    4,
                ),
                iv(
                    "cache-stabilization",
                    Target::El,
                    Tier::Act,
                    &[("miss_prob", 0.1), ("dist_drift", 0.1)],
                    8,
                ),
                iv(
                    "schema-rehearsal",
                    Target::Gl,
                    Tier::Act,
                    &[("concept_hit_prob", 2.0)],
                    4,
                ),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar", deny_unknown_fields)]
pub struct LgdConfig<S> {
    pub tau_warn: S,
    pub tau_act: S,
    #[serde(default = "default_cooldown")]
    pub cooldown: usize,
}

fn default_cooldown() -> usize {
    DEFAULT_COOLDOWN
}

impl<S: Scalar> Default for LgdConfig<S> {
    fn default() -> Self {
        Self {
            tau_warn: S::of(DEFAULT_TAU_WARN),
            tau_act: S::of(DEFAULT_TAU_ACT),
            cooldown: DEFAULT_COOLDOWN,
        }
    }
}

impl<S: Scalar> LgdConfig<S> {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: S| v >= S::zero() && v <= S::one();
        if !unit(self.tau_warn) || !unit(self.tau_act) {
            return Err(Error::config("thresholds must lie in [0, 1]"));
        }
        if self.tau_warn >= self.tau_act {
            return Err(Error::config(format!(
                "tau_warn ({}) must be below tau_act ({})",
                self.tau_warn, self.tau_act
            )));
        }
        Ok(())
    }

    /// Controller normalization; causal by construction.
    pub fn mode(&self) -> NormMode {
        NormMode::Causal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct InterventionEvent<S> {
    pub step: usize,
    pub tier: Tier,
    pub intervention_id: String,
    pub clt: [S; 3],
    pub cli: S,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct InterventionHistory<S> {
    pub events: Vec<InterventionEvent<S>>,
}

impl<S: Scalar> InterventionHistory<S> {
    pub fn new() -> Self {
        Self { events: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Whether `id` fired within the `cooldown` steps before `step`.
    pub fn fired_recently(&self, id: &str, step: usize, cooldown: usize) -> bool {
        self.events
            .iter()
            .rev()
            .take_while(|e| e.step + cooldown >= step)
            .any(|e| e.intervention_id == id && e.step < step)
    }

    pub fn at_step(&self, step: usize) -> Option<&InterventionEvent<S>> {
        self.events.iter().find(|e| e.step == step)
    }
}

pub fn score_intervention<S: Scalar>(
    intervention: &Intervention,
    clt: &[S; 3],
    history: &InterventionHistory<S>,
    step: usize,
    cooldown: usize,
) -> S {
    let load = intervention.target.pick(clt);
    if history.fired_recently(&intervention.id, step, cooldown) {
        load - S::of(COOLDOWN_PENALTY)
    } else {
        load
    }
}

/// Highest-scoring intervention of `tier`; ties go to the first declared.
pub fn select_intervention<'a, S: Scalar>(
    interventions: &'a [Intervention],
    tier: Tier,
    clt: &[S; 3],
    history: &InterventionHistory<S>,
    step: usize,
    cooldown: usize,
) -> Result<&'a Intervention> {
    let mut best: Option<(&Intervention, S)> = None;
    for iv in interventions.iter().filter(|i| i.tier == tier) {
        let score = score_intervention(iv, clt, history, step, cooldown);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((iv, score));
        }
    }
    best.map(|(iv, _)| iv)
        .ok_or_else(|| Error::NoInterventionForTier(tier.to_string()))
}

/// Threshold logic over a stream of load points.
#[derive(Debug, Clone)]
pub struct Controller<S> {
    cfg: LgdConfig<S>,
    interventions: Vec<Intervention>,
    history: InterventionHistory<S>,
}

impl<S: Scalar> Controller<S> {
    pub fn new(cfg: LgdConfig<S>, interventions: Vec<Intervention>) -> Result<Self> {
        cfg.validate()?;
        interventions.iter().try_for_each(Intervention::validate)?;
        Ok(Self {
            cfg,
            interventions,
            history: InterventionHistory::new(),
        })
    }

    pub fn history(&self) -> &InterventionHistory<S> {
        &self.history
    }

    pub fn into_history(self) -> InterventionHistory<S> {
        self.history
    }

    /// Act tier if `cli > tau_act`, else warn tier if `cli > tau_warn`.
    pub fn tier_for(&self, cli: S) -> Option<Tier> {
        if cli > self.cfg.tau_act {
            Some(Tier::Act)
        } else if cli > self.cfg.tau_warn {
            Some(Tier::Warn)
        } else {
            None
        }
    }

    /// Records and returns the intervention to apply for this point, if any.
    pub fn observe(&mut self, point: &LoadPoint<S>) -> Result<Option<&Intervention>> {
        let Some(tier) = self.tier_for(point.cli) else {
            return Ok(None);
        };
        let clt = point.loads();
        let chosen = select_intervention(
            &self.interventions,
            tier,
            &clt,
            &self.history,
            point.step,
            self.cfg.cooldown,
        )?;
        self.history.events.push(InterventionEvent {
            step: point.step,
            tier,
            intervention_id: chosen.id.clone(),
            clt,
            cli: point.cli,
        });
        Ok(Some(chosen))
    }
}

/// Where LGD steps come from.
pub trait StepSource<S: Scalar> {
    fn meta(&self) -> TraceMeta<S>;

    fn next_step(&mut self) -> Option<StepRecord<S>>;

    /// Applies an intervention effect to future steps. Recorded sources ignore it.
    fn apply(&mut self, effect: &Effect) -> Result<()>;
}

/// Replays a recorded trace; interventions are logged but have no effect.
#[derive(Debug, Clone)]
pub struct Replay<'a, S> {
    trace: &'a Trace<S>,
    next: usize,
}

impl<'a, S: Scalar> Replay<'a, S> {
    pub fn new(trace: &'a Trace<S>) -> Self {
        Self { trace, next: 0 }
    }
}

impl<S: Scalar> StepSource<S> for Replay<'_, S> {
    fn meta(&self) -> TraceMeta<S> {
        self.trace.meta.clone()
    }

    fn next_step(&mut self) -> Option<StepRecord<S>> {
        let step = self.trace.steps.get(self.next).cloned();
        self.next += 1;
        step
    }

    fn apply(&mut self, _effect: &Effect) -> Result<()> {
        Ok(())
    }
}

/// Live synthetic source; effects change subsequent generation. Ground-truth
/// phases are collected along the way.
#[derive(Debug, Clone)]
pub struct Simulation {
    generator: Generator,
    effects_enabled: bool,
    phases: Vec<crate::synth::Phase>,
}

impl Simulation {
    pub fn new(generator: Generator) -> Self {
        Self {
            generator,
            effects_enabled: true,
            phases: Vec::new(),
        }
    }

    /// Baseline twin: same generator, effects ignored.
    pub fn without_effects(generator: Generator) -> Self {
        Self {
            effects_enabled: false,
            ..Self::new(generator)
        }
    }

    pub fn phases(&self) -> &[crate::synth::Phase] {
        &self.phases
    }
}

impl<S: Scalar> StepSource<S> for Simulation {
    fn meta(&self) -> TraceMeta<S> {
        crate::synth::convert_meta(self.generator.meta())
    }

    fn next_step(&mut self) -> Option<StepRecord<S>> {
        let (record, phase) = self.generator.next_step()?;
        self.phases.push(phase);
        Some(crate::synth::convert_step(record))
    }

    fn apply(&mut self, effect: &Effect) -> Result<()> {
        if self.effects_enabled {
            self.generator.apply_effect(effect)
        } else {
            effect.validate()
        }
    }
}

/// Outcome of one controlled run.
#[derive(Debug, Clone, PartialEq)]
pub struct LgdRun<S> {
    pub points: Vec<LoadPoint<S>>,
    pub history: InterventionHistory<S>,
    /// Steps as emitted by the source.
    pub trace: Trace<S>,
}

/// Runs the controller over a source until it is exhausted.
pub fn run_lgd<S: Scalar, Src: StepSource<S>>(
    source: &mut Src,
    cfg: &LgdConfig<S>,
    pipeline: &Pipeline<S>,
    interventions: &[Intervention],
) -> Result<LgdRun<S>> {
    let mut controller = Controller::new(*cfg, interventions.to_vec())?;
    let meta = source.meta();
    let mut window = ExpandingStats::new();
    let mut points = Vec::new();
    let mut steps: Vec<StepRecord<S>> = Vec::new();
    while let Some(record) = source.next_step() {
        let raw = step_proxies(&record, steps.last(), &meta, &pipeline.reuse)
            .map_err(|e| e.at_step(record.step))?;
        window.push(&raw);
        let normalized = window.stats().normalize(&raw, meta.epsilon);
        let point = LoadPoint::from_normalized(
            record.step,
            raw,
            normalized,
            &pipeline.composition,
            &pipeline.cli,
        );
        if let Some(iv) = controller.observe(&point)? {
            source.apply(&iv.effect)?;
        }
        points.push(point);
        steps.push(record);
    }
    Ok(LgdRun {
        points,
        history: controller.into_history(),
        trace: Trace { meta, steps },
    })
}

/// Totals for one side of a paired comparison.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct RunTotals<S> {
    pub el_spikes: usize,
    pub cumulative_el: S,
    pub errors: usize,
    pub interventions: usize,
}

impl<S: Scalar> RunTotals<S> {
    fn add(&mut self, other: &Self) {
        self.el_spikes += other.el_spikes;
        self.cumulative_el += other.cumulative_el;
        self.errors += other.errors;
        self.interventions += other.interventions;
    }
}

/// A baseline run (effects ignored) and a controlled run from the same seed.
///
/// Both are re-scored against the baseline's offline statistics so their
/// loads share one scale; self-normalized loads would always centre on 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRun<S> {
    pub seed: u64,
    pub baseline: LgdRun<S>,
    pub controlled: LgdRun<S>,
    pub yardstick: NormStats<S>,
    pub baseline_scored: Vec<LoadPoint<S>>,
    pub controlled_scored: Vec<LoadPoint<S>>,
}

impl<S: Scalar> PairedRun<S> {
    pub fn totals(&self, spike_threshold: S) -> (RunTotals<S>, RunTotals<S>) {
        (
            totals(&self.baseline_scored, &self.baseline, spike_threshold),
            totals(&self.controlled_scored, &self.controlled, spike_threshold),
        )
    }
}

fn totals<S: Scalar>(scored: &[LoadPoint<S>], run: &LgdRun<S>, threshold: S) -> RunTotals<S> {
    RunTotals {
        el_spikes: scored.iter().filter(|p| p.el > threshold).count(),
        cumulative_el: scored.iter().map(|p| p.el).sum(),
        errors: run
            .trace
            .steps
            .iter()
            .filter(|s| s.error_event == Some(true))
            .count(),
        interventions: run.history.len(),
    }
}

pub fn run_paired<S: Scalar>(
    synth: &SynthConfig,
    cfg: &LgdConfig<S>,
    pipeline: &Pipeline<S>,
    interventions: &[Intervention],
) -> Result<PairedRun<S>> {
    let mut base_src = Simulation::without_effects(Generator::new(synth.clone())?);
    let baseline = run_lgd(&mut base_src, cfg, pipeline, interventions)?;
    let mut ctrl_src = Simulation::new(Generator::new(synth.clone())?);
    let controlled = run_lgd(&mut ctrl_src, cfg, pipeline, interventions)?;
    let raw = |run: &LgdRun<S>| run.points.iter().map(|p| p.raw).collect::<Vec<_>>();
    let yardstick = fit_norm_stats(&raw(&baseline));
    let eps = baseline.trace.meta.epsilon;
    let score = |run: &LgdRun<S>| {
        loads_with_stats(
            &raw(run),
            &yardstick,
            &pipeline.composition,
            &pipeline.cli,
            eps,
        )
    };
    Ok(PairedRun {
        seed: synth.seed,
        baseline_scored: score(&baseline),
        controlled_scored: score(&controlled),
        baseline,
        controlled,
        yardstick,
    })
}

/// Aggregate outcome of several paired runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Comparison<S> {
    pub runs: usize,
    pub spike_threshold: S,
    pub baseline: RunTotals<S>,
    pub controlled: RunTotals<S>,
}

fn relative_drop(base: f64, ctrl: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        (base - ctrl) / base
    }
}

impl<S: Scalar> Comparison<S> {
    pub fn from_pairs(pairs: &[PairedRun<S>], spike_threshold: S) -> Self {
        let mut baseline = RunTotals::default();
        let mut controlled = RunTotals::default();
        for p in pairs {
            let (b, c) = p.totals(spike_threshold);
            baseline.add(&b);
            controlled.add(&c);
        }
        Self {
            runs: pairs.len(),
            spike_threshold,
            baseline,
            controlled,
        }
    }

    /// Fractional reduction of cumulative EL (positive = fewer).
    pub fn el_reduction(&self) -> f64 {
        relative_drop(
            self.baseline.cumulative_el.as_f64(),
            self.controlled.cumulative_el.as_f64(),
        )
    }

    pub fn spike_reduction(&self) -> f64 {
        relative_drop(
            self.baseline.el_spikes as f64,
            self.controlled.el_spikes as f64,
        )
    }

    /// Fractional change in error count (positive = more errors).
    pub fn error_increase(&self) -> f64 {
        -relative_drop(self.baseline.errors as f64, self.controlled.errors as f64)
    }

    pub fn render(&self) -> String {
        format!(
            "runs {}\n\
             metric baseline controlled change\n\
             el_spikes(>{}) {} {} {:+.4}\n\
             cumulative_el {:.6} {:.6} {:+.4}\n\
             errors {} {} {:+.4}\n\
             interventions {} {}\n",
            self.runs,
            self.spike_threshold,
            self.baseline.el_spikes,
            self.controlled.el_spikes,
            -self.spike_reduction(),
            self.baseline.cumulative_el,
            self.controlled.cumulative_el,
            -self.el_reduction(),
            self.baseline.errors,
            self.controlled.errors,
            self.error_increase(),
            self.baseline.interventions,
            self.controlled.interventions,
        )
    }
}

/// Paired runs for seeds `synth.seed, synth.seed + 1, ...`.
pub fn run_paired_batch<S: Scalar>(
    synth: &SynthConfig,
    runs: usize,
    cfg: &LgdConfig<S>,
    pipeline: &Pipeline<S>,
    interventions: &[Intervention],
) -> Result<Vec<PairedRun<S>>> {
    (0..runs as u64)
        .map(|i| {
            run_paired(
                &synth.clone().with_seed(synth.seed.wrapping_add(i)),
                cfg,
                pipeline,
                interventions,
            )
        })
        .collect()
}
