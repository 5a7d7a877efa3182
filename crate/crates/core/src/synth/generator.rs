// SPDX-License-Identifier: MIT OR Apache-2.0

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Phase, PhaseSpec, SynthConfig};
use crate::error::{Error, Result};
use crate::proxies::{cache_miss, decoding_stability, layer_dispersions, layer_entropies};
use crate::scalar::{sigmoid, Scalar};
use crate::trace::{LayerDigest, StepRecord, Trace, TraceMeta, TraceMode};

/// Generator parameters an [`Effect`] may scale.
pub const PARAMETERS: [&str; 5] = [
    "attention_concentration",
    "walk_scale",
    "miss_prob",
    "dist_drift",
    "concept_hit_prob",
];

const MIN_POSITIVE: f64 = 1e-6;
const MAX_POSITIVE: f64 = 1e6;
const ANCHOR_SCALE: f64 = 3.0;
const LAYER_OFFSET_SCALE: f64 = 0.5;
const TOKEN_CONCENTRATION: f64 = 1.0;

/// Multiplicative modifiers on generator parameters, active for `duration` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Effect {
    pub modifiers: BTreeMap<String, f64>,
    pub duration: usize,
}

impl Effect {
    pub fn new<'a>(modifiers: impl IntoIterator<Item = (&'a str, f64)>, duration: usize) -> Self {
        Self {
            modifiers: modifiers
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            duration,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.duration == 0 {
            return Err(Error::config("effect duration must be >= 1"));
        }
        for (name, m) in &self.modifiers {
            if !PARAMETERS.contains(&name.as_str()) {
                return Err(Error::UnknownParameter(name.clone()));
            }
            if !(*m > 0.0 && m.is_finite()) {
                return Err(Error::config(format!(
                    "modifier for {name} must be positive, got {m}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ActiveEffect {
    modifiers: Vec<(usize, f64)>,
    remaining: usize,
}

#[derive(Clone, Copy)]
enum Stream {
    Phase = 0,
    Attention = 1,
    Hidden = 2,
    Cache = 3,
    Token = 4,
    Concept = 5,
    Error = 6,
}

const STREAMS_PER_STEP: u64 = 8;
const SETUP_STREAM: u64 = u64::MAX;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut v: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = v.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        v.iter_mut().for_each(|x| *x /= sum);
    } else {
        v.iter_mut().for_each(|x| *x = 1.0 / n as f64);
    }
    v
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Step-by-step synthetic trace source whose parameters can be modulated by
/// effects while it runs.
#[derive(Debug, Clone)]
pub struct Generator {
    cfg: SynthConfig,
    meta: TraceMeta<f64>,
    t: usize,
    phase: usize,
    anchors: Vec<Vec<f64>>,
    walk: Vec<Vec<f64>>,
    token_dist: Vec<f64>,
    prev: Option<StepRecord<f64>>,
    effects: Vec<ActiveEffect>,
}

impl Generator {
    pub fn new(cfg: SynthConfig) -> Result<Self> {
        cfg.validate()?;
        let mut setup = stream_rng(cfg.seed, SETUP_STREAM);
        let common: Vec<f64> = normal_vec(&mut setup, cfg.hidden_dim)
            .into_iter()
            .map(|v| v * ANCHOR_SCALE)
            .collect();
        let anchors = (0..cfg.num_layers)
            .map(|_| {
                normal_vec(&mut setup, cfg.hidden_dim)
                    .into_iter()
                    .zip(&common)
                    .map(|(o, c)| c + o * LAYER_OFFSET_SCALE)
                    .collect()
            })
            .collect();
        let token_dist = dirichlet(&mut setup, cfg.vocab, TOKEN_CONCENTRATION);
        let phase = setup.random_range(0..cfg.phases.len());
        let mut meta = TraceMeta::new(cfg.num_layers, cfg.hidden_dim);
        meta.source = format!("synth seed={} kappa={}", cfg.seed, cfg.kappa);
        if cfg.digest {
            meta.mode = TraceMode::Digest;
        }
        Ok(Self {
            walk: vec![vec![0.0; cfg.hidden_dim]; cfg.num_layers],
            cfg,
            meta,
            t: 0,
            phase,
            anchors,
            token_dist,
            prev: None,
            effects: Vec::new(),
        })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.cfg
    }

    pub fn meta(&self) -> &TraceMeta<f64> {
        &self.meta
    }

    /// Steps generated so far.
    pub fn position(&self) -> usize {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.cfg.steps
    }

    /// Phase of the most recent (or upcoming, before the first) step.
    pub fn phase(&self) -> Phase {
        self.cfg.phases[self.phase].name
    }

    /// Effective parameters of the current phase under the active effects,
    /// clamped to valid ranges.
    pub fn params(&self) -> PhaseSpec {
        let mut p = self.cfg.phases[self.phase].clone();
        let mut factor = [1.0f64; PARAMETERS.len()];
        for e in &self.effects {
            for &(k, m) in &e.modifiers {
                factor[k] *= m;
            }
        }
        let positive = |v: f64| v.clamp(MIN_POSITIVE, MAX_POSITIVE);
        p.attention_concentration = positive(p.attention_concentration * factor[0]);
        p.walk_scale = positive(p.walk_scale * factor[1]);
        p.miss_prob = (p.miss_prob * factor[2]).clamp(0.0, 1.0);
        p.dist_drift = (p.dist_drift * factor[3]).clamp(0.0, 1.0);
        p.concept_hit_prob = (p.concept_hit_prob * factor[4]).clamp(0.0, 1.0);
        p
    }

    /// Scales the named parameters for the next `effect.duration` steps.
    /// Overlapping effects compose multiplicatively.
    pub fn apply_effect(&mut self, effect: &Effect) -> Result<()> {
        effect.validate()?;
        let modifiers = effect
            .modifiers
            .iter()
            .map(|(name, m)| {
                (
                    PARAMETERS
                        .iter()
                        .position(|p| p == name)
                        .expect("validated"),
                    *m,
                )
            })
            .collect();
        self.effects.push(ActiveEffect {
            modifiers,
            remaining: effect.duration,
        });
        Ok(())
    }

    fn rng(&self, stream: Stream) -> ChaCha8Rng {
        stream_rng(
            self.cfg.seed,
            self.t as u64 * STREAMS_PER_STEP + stream as u64,
        )
    }

    fn advance_phase(&mut self) {
        let n = self.cfg.phases.len();
        if self.t == 0 || n == 1 {
            return;
        }
        let mut rng = self.rng(Stream::Phase);
        let leave = 1.0 / self.cfg.phases[self.phase].mean_duration;
        if rng.random::<f64>() < leave {
            let next = rng.random_range(0..n - 1);
            self.phase = if next >= self.phase { next + 1 } else { next };
        }
    }

    /// Next step and its ground-truth phase; `None` once `steps` are emitted.
    pub fn next_step(&mut self) -> Option<(StepRecord<f64>, Phase)> {
        if self.is_finished() {
            return None;
        }
        self.advance_phase();
        let p = self.params();
        let cfg = &self.cfg;
        let width = (cfg.context_init + (self.t as f64 * cfg.context_growth).floor() as usize)
            .min(cfg.context_max);

        let mut rng = self.rng(Stream::Attention);
        let attention: Vec<Vec<f64>> = (0..cfg.num_layers)
            .map(|_| dirichlet(&mut rng, width, p.attention_concentration))
            .collect();

        let mut rng = self.rng(Stream::Hidden);
        let rho = p.layer_alignment;
        let keep = (1.0 - rho * rho).max(0.0).sqrt();
        let mut delta = normal_vec(&mut rng, cfg.hidden_dim);
        for l in 0..cfg.num_layers {
            if l > 0 {
                let fresh = normal_vec(&mut rng, cfg.hidden_dim);
                delta = delta
                    .iter()
                    .zip(&fresh)
                    .map(|(d, f)| rho * d + keep * f)
                    .collect();
            }
            for (u, d) in self.walk[l].iter_mut().zip(&delta) {
                *u = (1.0 - cfg.reversion) * *u + p.walk_scale * d;
            }
        }
        let hidden: Vec<Vec<f64>> = self
            .anchors
            .iter()
            .zip(&self.walk)
            .map(|(a, u)| a.iter().zip(u).map(|(x, y)| x + y).collect())
            .collect();

        let mut rng = self.rng(Stream::Cache);
        let queries = width as u64;
        let hits = (0..queries)
            .filter(|_| rng.random::<f64>() >= p.miss_prob)
            .count() as u64;

        let mut rng = self.rng(Stream::Token);
        let fresh = dirichlet(&mut rng, cfg.vocab, TOKEN_CONCENTRATION);
        let mut token: Vec<f64> = self
            .token_dist
            .iter()
            .zip(&fresh)
            .map(|(old, new)| (1.0 - p.dist_drift) * old + p.dist_drift * new)
            .collect();
        let sum: f64 = token.iter().sum();
        token.iter_mut().for_each(|v| *v /= sum);

        let mut rng = self.rng(Stream::Concept);
        let concept: Vec<bool> = (0..width)
            .map(|_| rng.random::<f64>() < p.concept_hit_prob)
            .collect();

        let mut record = StepRecord {
            step: self.t,
            attention,
            hidden: Some(hidden),
            cache_hits: hits,
            cache_queries: queries,
            token_dist: token.clone(),
            ref_dist: None,
            concept_active: Some(concept),
            error_event: None,
            digest: None,
        };

        let miss = cache_miss(&record, &self.meta);
        let stab = decoding_stability(&record, self.prev.as_ref(), &self.meta).expect("same vocab");
        let risk = sigmoid(cfg.kappa * (miss + stab) - cfg.error_offset);
        let mut rng = self.rng(Stream::Error);
        record.error_event = Some(rng.random::<f64>() < risk);

        let prev_record = record.clone();
        if cfg.digest {
            let entropies = layer_entropies(&record).expect("attention present");
            let dispersions = layer_dispersions(&record, &self.meta).expect("hidden present");
            record.digest = Some(
                entropies
                    .into_iter()
                    .zip(dispersions)
                    .map(|(entropy, dispersion)| LayerDigest {
                        entropy,
                        dispersion,
                    })
                    .collect(),
            );
            record.hidden = None;
        }

        self.token_dist = token;
        self.prev = Some(prev_record);
        for e in &mut self.effects {
            e.remaining -= 1;
        }
        self.effects.retain(|e| e.remaining > 0);
        self.t += 1;
        Some((record, self.phase()))
    }
}

pub(crate) fn convert_step<S: Scalar>(r: StepRecord<f64>) -> StepRecord<S> {
    let v = |x: Vec<f64>| x.into_iter().map(S::of).collect::<Vec<S>>();
    let vv = |x: Vec<Vec<f64>>| x.into_iter().map(v).collect::<Vec<_>>();
    StepRecord {
        step: r.step,
        attention: vv(r.attention),
        hidden: r.hidden.map(vv),
        cache_hits: r.cache_hits,
        cache_queries: r.cache_queries,
        token_dist: v(r.token_dist),
        ref_dist: r.ref_dist.map(v),
        concept_active: r.concept_active,
        error_event: r.error_event,
        digest: r.digest.map(|d| {
            d.into_iter()
                .map(|g| LayerDigest {
                    entropy: S::of(g.entropy),
                    dispersion: S::of(g.dispersion),
                })
                .collect()
        }),
    }
}

pub(crate) fn convert_meta<S: Scalar>(m: &TraceMeta<f64>) -> TraceMeta<S> {
    TraceMeta {
        num_layers: m.num_layers,
        hidden_dim: m.hidden_dim,
        source: m.source.clone(),
        mode: m.mode,
        epsilon: S::of(m.epsilon),
    }
}

/// Generates a full trace and its per-step ground-truth phases.
pub fn generate<S: Scalar>(config: &SynthConfig) -> Result<(Trace<S>, Vec<Phase>)> {
    let mut generator = Generator::new(config.clone())?;
    let mut steps = Vec::with_capacity(config.steps);
    let mut phases = Vec::with_capacity(config.steps);
    while let Some((record, phase)) = generator.next_step() {
        steps.push(convert_step(record));
        phases.push(phase);
    }
    Ok((
        Trace {
            meta: convert_meta(generator.meta()),
            steps,
        },
        phases,
    ))
}
