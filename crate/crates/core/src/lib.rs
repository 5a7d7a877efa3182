// SPDX-License-Identifier: MIT OR Apache-2.0

//! Cognitive load traces from recorded transformer internals.
//!
//! The pipeline turns a [`trace::Trace`] of per-step internals into six raw
//! proxies ([`proxies`]), normalizes them robustly and composes intrinsic,
//! extraneous and germane load plus a weighted load index
//! ([`composition`]). On top of that sit spike/correlation/clustering
//! analytics ([`analytics`]), a two-tier load-guided controller ([`lgd`]),
//! a seeded phase-structured trace generator ([`synth`]) and CSV/SVG figure
//! export ([`viz`]).
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64`/`*32` aliases below name the concrete instantiations.

pub mod analytics;
pub mod composition;
pub mod config;
pub mod error;
pub mod lgd;
pub mod proxies;
pub mod scalar;
pub mod synth;
pub mod trace;
pub mod viz;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default ε guarding divisions and KL floors.
pub const DEFAULT_EPSILON: f64 = 1e-8;

pub type Trace64 = trace::Trace<f64>;
pub type Trace32 = trace::Trace<f32>;
pub type StepRecord64 = trace::StepRecord<f64>;
pub type StepRecord32 = trace::StepRecord<f32>;
pub type ProxyVector64 = proxies::ProxyVector<f64>;
pub type ProxyVector32 = proxies::ProxyVector<f32>;
pub type LoadPoint64 = composition::LoadPoint<f64>;
pub type LoadPoint32 = composition::LoadPoint<f32>;
pub type NormStats64 = composition::NormStats<f64>;
pub type NormStats32 = composition::NormStats<f32>;
pub type Pipeline64 = composition::Pipeline<f64>;
pub type Pipeline32 = composition::Pipeline<f32>;
pub type ClusterModel64 = analytics::ClusterModel<f64>;

pub type LgdConfig64 = lgd::LgdConfig<f64>;
pub type LgdRun64 = lgd::LgdRun<f64>;
pub type WeightsFile64 = config::WeightsFile<f64>;
