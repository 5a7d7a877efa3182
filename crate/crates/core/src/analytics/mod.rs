// SPDX-License-Identifier: MIT OR Apache-2.0

//! Post-hoc analysis of load series: spikes, error coincidence, correlation,
//! strategy clustering and summaries.

mod correlation;
mod kmeans;
mod spikes;
mod summary;

pub use correlation::{cli_error_correlation, pearson, point_biserial};
pub use kmeans::{
    best_permutation_agreement, cluster_strategies, ClusterModel, KMEANS_MAX_ITER, KMEANS_TOL,
};
pub use spikes::{
    detect_spikes, error_spike_coincidence, pooled_coincidence, LoadComponent, SpikeEvent,
    DEFAULT_SPIKE_THRESHOLD, DEFAULT_WINDOW,
};
pub use summary::{trace_summary, ComponentSummary, TraceSummary};
