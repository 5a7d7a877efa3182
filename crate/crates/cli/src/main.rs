// SPDX-License-Identifier: MIT OR Apache-2.0

//! `cogload`: validate, analyze and simulate cognitive-load traces.
//!
//! Exit status is 0 on success, 1 when the input or configuration is
//! rejected, 2 for usage errors and missing input files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cogload_core::analytics::LoadComponent;
use cogload_core::composition::NormMode;
use cogload_core::viz::LayerSignal;

#[derive(Debug, Parser)]
#[command(
    name = "cogload",
    version,
    about = "Cognitive load traces from transformer internals"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Override the ε stored in trace metadata.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Seed for generation, paired runs and clustering.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Normalization mode.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Weights file (as written by `fit`).
    #[arg(long, global = true)]
    pub weights: Option<PathBuf>,
    /// Output directory, created if needed.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Offline,
    Causal,
}

impl From<Mode> for NormMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Offline => NormMode::Offline,
            Mode::Causal => NormMode::Causal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Default,
    StrongCoupling,
    WellSeparated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Curves,
    Simplex,
    Heatmap,
    Radar,
    Parallel,
    Bands,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Signal {
    Entropy,
    Dispersion,
}

impl From<Signal> for LayerSignal {
    fn from(s: Signal) -> Self {
        match s {
            Signal::Entropy => LayerSignal::Entropy,
            Signal::Dispersion => LayerSignal::Dispersion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Component {
    Il,
    El,
    Gl,
    Cli,
}

impl From<Component> for LoadComponent {
    fn from(c: Component) -> Self {
        match c {
            Component::Il => LoadComponent::Il,
            Component::El => LoadComponent::El,
            Component::Gl => LoadComponent::Gl,
            Component::Cli => LoadComponent::Cli,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a trace file against the format rules.
    Validate { trace: PathBuf },
    /// Proxies, loads and load index for one trace.
    ///
    /// Writes points.csv, norm_stats.json and summary.txt.
    Compute { trace: PathBuf },
    /// Fit load-index weights on labeled traces.
    ///
    /// Writes weights.json and fit_report.txt.
    Fit {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Also search the α/β/γ mixing weights.
        #[arg(long)]
        joint: bool,
    },
    /// Spikes, error coincidence, correlation and strategy clusters.
    ///
    /// Writes analysis.txt and clusters.csv.
    Analyze {
        trace: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
        #[arg(long, default_value_t = 3)]
        window: usize,
        /// Number of clusters; 0 skips clustering.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Run the load-guided controller.
    ///
    /// With --synth: paired simulations with and without interventions,
    /// writing baseline_points.csv, controlled_points.csv, history.csv,
    /// comparison.txt and comparison.json. With --trace: replay, writing
    /// points.csv and history.csv.
    #[command(visible_alias = "lgd-simulate")]
    Lgd {
        /// Generator config (simulation mode).
        #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
        synth: Option<PathBuf>,
        /// Recorded trace (replay mode).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Controller thresholds and cooldown.
        #[arg(long)]
        lgd: PathBuf,
        /// Intervention set.
        #[arg(long)]
        interventions: PathBuf,
        /// Paired runs, seeded consecutively from the config seed.
        #[arg(long, default_value_t = 50)]
        runs: usize,
    },
    /// Generate a synthetic trace. Writes trace.jsonl and phases.csv.
    Synth {
        /// Generator config file; overrides --preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "default")]
        preset: Preset,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        kappa: Option<f64>,
        /// Write per-layer digests instead of raw rows and states.
        #[arg(long)]
        digest: bool,
    },
    /// Export a figure as <name>.csv and <name>.svg.
    Plot {
        #[arg(value_enum)]
        figure: Figure,
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Per-layer signal for the heatmap.
        #[arg(long, value_enum, default_value = "entropy")]
        signal: Signal,
        /// Load component for bands.
        #[arg(long, value_enum, default_value = "el")]
        component: Component,
        /// Clusters for simplex/parallel coloring; 0 disables.
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
