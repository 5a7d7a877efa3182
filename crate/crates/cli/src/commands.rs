// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cogload_core::analytics::{
    cli_error_correlation, cluster_strategies, detect_spikes, error_spike_coincidence,
    trace_summary, LoadComponent,
};
use cogload_core::composition::{
    compute_clt, fit_norm_stats, fit_weights, FitConfig, LoadPoint, NormMode, Pipeline,
};
use cogload_core::config::{self, WeightsFile};
use cogload_core::lgd::{run_lgd, run_paired_batch, Comparison, Replay};
use cogload_core::synth::{generate, SynthConfig};
use cogload_core::trace::{parse_trace, read_trace, validate_trace, write_trace};
use cogload_core::viz::{self, LayerSignal};
use cogload_core::{Error, Trace64};

use crate::{Cli, Command, Figure, Global, Preset};

/// Why a command failed, and the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn input(path: &Path) -> Outcome<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Failure::Usage(format!("no such file: {}", path.display())))
    }
}

fn out_dir(g: &Global) -> Outcome<&Path> {
    fs::create_dir_all(&g.out).map_err(|e| Error::Io {
        path: g.out.clone(),
        source: e,
    })?;
    Ok(&g.out)
}

fn write(dir: &Path, name: &str, contents: &str) -> Outcome<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

fn load_trace(path: &Path, g: &Global) -> Outcome<Trace64> {
    let mut trace: Trace64 = read_trace(input(path)?)?;
    if let Some(eps) = g.epsilon {
        trace.meta.epsilon = eps;
    }
    Ok(trace)
}

fn weights(g: &Global) -> Outcome<WeightsFile<f64>> {
    match &g.weights {
        Some(p) => Ok(config::load_weights(input(p)?)?),
        None => Ok(WeightsFile::default()),
    }
}

fn mode(g: &Global) -> NormMode {
    g.mode.map_or(NormMode::Offline, Into::into)
}

fn points_for(trace: &Trace64, g: &Global) -> Outcome<Vec<LoadPoint<f64>>> {
    let w = weights(g)?;
    Ok(compute_clt(trace, &w.pipeline(), mode(g))?)
}

pub fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    if let Some(eps) = g.epsilon {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Failure::Usage(format!(
                "--epsilon must be positive, got {eps}"
            )));
        }
    }
    match &cli.command {
        Command::Validate { trace } => validate(trace),
        Command::Compute { trace } => compute(trace, g),
        Command::Fit { traces, joint } => fit(traces, *joint, g),
        Command::Analyze {
            trace,
            threshold,
            window,
            k,
        } => analyze(trace, *threshold, *window, *k, g),
        Command::Lgd {
            synth,
            trace,
            lgd,
            interventions,
            runs,
        } => self::lgd(
            synth.as_deref(),
            trace.as_deref(),
            lgd,
            interventions,
            *runs,
            g,
        ),
        Command::Synth {
            config,
            preset,
            steps,
            kappa,
            digest,
        } => synth(config.as_deref(), *preset, *steps, *kappa, *digest, g),
        Command::Plot {
            figure,
            traces,
            signal,
            component,
            k,
        } => plot(
            *figure,
            traces,
            (*signal).into(),
            (*component).into(),
            *k,
            g,
        ),
    }
}

fn validate(path: &Path) -> Outcome {
    let trace: Trace64 = parse_trace(input(path)?)?;
    let violations = validate_trace(&trace);
    if violations.is_empty() {
        println!(
            "ok: {} steps, {} layers",
            trace.len(),
            trace.meta.num_layers
        );
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    let first = &violations[0];
    Err(Error::InvariantViolation {
        step: first.step.unwrap_or(0),
        field: first.field_label(),
        rule: format!("{} ({} violations in total)", first.rule, violations.len()),
    }
    .into())
}

fn compute(path: &Path, g: &Global) -> Outcome {
    let trace = load_trace(path, g)?;
    let points = points_for(&trace, g)?;
    let dir = out_dir(g)?;
    let raw: Vec<_> = points.iter().map(|p| p.raw).collect();
    write(dir, "points.csv", &viz::points_csv(&points))?;
    write(
        dir,
        "norm_stats.json",
        &config::to_json(&fit_norm_stats(&raw)),
    )?;
    write(dir, "summary.txt", &trace_summary(&points).render())?;
    Ok(())
}

fn labeled(path: &Path, g: &Global) -> Outcome<(Vec<LoadPoint<f64>>, Vec<bool>)> {
    let trace = load_trace(path, g)?;
    let labels = trace.error_labels().ok_or(Error::MissingField {
        step: 0,
        field: "error_event",
    })?;
    let points = compute_clt(&trace, &Pipeline::default(), mode(g))?;
    Ok((points, labels))
}

fn fit(paths: &[PathBuf], joint: bool, g: &Global) -> Outcome {
    let sets = paths
        .iter()
        .map(|p| labeled(p, g))
        .collect::<Outcome<Vec<_>>>()?;
    let data: Vec<_> = sets
        .iter()
        .map(|(p, l)| (p.as_slice(), l.as_slice()))
        .collect();
    let cfg = FitConfig {
        joint,
        ..FitConfig::default()
    };
    let fit = fit_weights(&data, &cfg)?;
    let file = WeightsFile {
        composition: fit.composition,
        cli: fit.cli,
        correlation: Some(fit.correlation),
        ..WeightsFile::default()
    };
    let steps: usize = sets.iter().map(|(p, _)| p.len()).sum();
    let errors: usize = sets
        .iter()
        .map(|(_, l)| l.iter().filter(|e| **e).count())
        .sum();
    let mut report = String::new();
    let _ = writeln!(report, "traces: {}", sets.len());
    let _ = writeln!(report, "steps: {steps}");
    let _ = writeln!(report, "errors: {errors}");
    let _ = writeln!(report, "joint: {joint}");
    let _ = writeln!(
        report,
        "alpha: {} {}",
        fit.composition.alpha.0, fit.composition.alpha.1
    );
    let _ = writeln!(
        report,
        "beta: {} {}",
        fit.composition.beta.0, fit.composition.beta.1
    );
    let _ = writeln!(
        report,
        "gamma: {} {}",
        fit.composition.gamma.0, fit.composition.gamma.1
    );
    let _ = writeln!(
        report,
        "w: {} {} {}",
        fit.cli.w[0], fit.cli.w[1], fit.cli.w[2]
    );
    let _ = writeln!(report, "point_biserial: {}", fit.correlation);
    let dir = out_dir(g)?;
    write(dir, "weights.json", &config::to_json(&file))?;
    write(dir, "fit_report.txt", &report)?;
    print!("{report}");
    Ok(())
}

fn analyze(path: &Path, threshold: f64, window: usize, k: usize, g: &Global) -> Outcome {
    let trace = load_trace(path, g)?;
    let points = points_for(&trace, g)?;
    let mut out = trace_summary(&points).render();
    let _ = writeln!(out, "spikes above {threshold}:");
    for c in LoadComponent::ALL {
        let steps: Vec<String> = detect_spikes(&points, c, threshold)
            .iter()
            .map(|s| s.step.to_string())
            .collect();
        let _ = writeln!(out, "  {}: [{}]", c.name(), steps.join(", "));
    }
    match trace.error_labels() {
        Some(labels) => {
            let errors = labels.iter().filter(|e| **e).count();
            let _ = writeln!(out, "errors: {errors}");
            match error_spike_coincidence(&points, &labels, threshold, window) {
                Some(c) => {
                    let _ = writeln!(out, "error/EL-spike coincidence (window {window}): {c}");
                }
                None => {
                    let _ = writeln!(
                        out,
                        "error/EL-spike coincidence (window {window}): no errors"
                    );
                }
            }
            match cli_error_correlation(&points, &labels) {
                Ok(r) => {
                    let _ = writeln!(out, "CLI/error point-biserial: {r}");
                }
                Err(e) => {
                    let _ = writeln!(out, "CLI/error point-biserial: undefined ({e})");
                }
            }
        }
        None => {
            let _ = writeln!(out, "errors: unlabeled");
        }
    }
    let dir = out_dir(g)?;
    if k > 0 {
        let seed = g.seed.unwrap_or(0);
        let model = cluster_strategies(&points, k, seed)?;
        let _ = writeln!(out, "clusters (k={k}, seed {seed}):");
        for (c, centroid) in model.centroids.iter().enumerate() {
            let size = model.assignments.iter().filter(|a| **a == c).count();
            let _ = writeln!(
                out,
                "  {c}: size {size}, centroid IL {} EL {} GL {}",
                centroid[0], centroid[1], centroid[2]
            );
        }
        let _ = writeln!(
            out,
            "  inertia: {}",
            model.inertia.last().copied().unwrap_or(0.0)
        );
        let mut csv = String::from("step,cluster\n");
        for (p, a) in points.iter().zip(&model.assignments) {
            let _ = writeln!(csv, "{},{a}", p.step);
        }
        write(dir, "clusters.csv", &csv)?;
    }
    write(dir, "analysis.txt", &out)?;
    print!("{out}");
    Ok(())
}

fn lgd(
    synth: Option<&Path>,
    trace: Option<&Path>,
    lgd_path: &Path,
    interventions: &Path,
    runs: usize,
    g: &Global,
) -> Outcome {
    if g.mode == Some(crate::Mode::Offline) {
        return Err(Error::InvalidConfig(
            "the controller normalizes causally; --mode offline is not allowed".into(),
        )
        .into());
    }
    let cfg = config::load_lgd::<f64>(input(lgd_path)?)?;
    let set = config::load_interventions(input(interventions)?)?;
    let pipeline = weights(g)?.pipeline();
    let dir = out_dir(g)?;
    if let Some(path) = trace {
        let trace = load_trace(path, g)?;
        let run = run_lgd(
            &mut Replay::new(&trace),
            &cfg,
            &pipeline,
            &set.interventions,
        )?;
        write(dir, "points.csv", &viz::points_csv(&run.points))?;
        write(dir, "history.csv", &viz::history_csv(&[(0, &run.history)]))?;
        println!(
            "replayed {} steps, {} interventions logged",
            run.points.len(),
            run.history.len()
        );
        return Ok(());
    }
    let synth_path = synth.expect("clap requires --synth or --trace");
    let mut synth_cfg = config::load_synth(input(synth_path)?)?;
    if let Some(seed) = g.seed {
        synth_cfg.seed = seed;
    }
    if runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".into()));
    }
    let pairs = run_paired_batch(&synth_cfg, runs, &cfg, &pipeline, &set.interventions)?;
    let comparison = Comparison::from_pairs(&pairs, viz::SPIKE_MARKER);
    let labels = |t: &Trace64| t.error_labels().unwrap_or_else(|| vec![false; t.len()]);
    let base: Vec<_> = pairs
        .iter()
        .map(|p| {
            (
                p.seed,
                p.baseline_scored.as_slice(),
                labels(&p.baseline.trace),
            )
        })
        .collect();
    let ctrl: Vec<_> = pairs
        .iter()
        .map(|p| {
            (
                p.seed,
                p.controlled_scored.as_slice(),
                labels(&p.controlled.trace),
            )
        })
        .collect();
    let history: Vec<_> = pairs
        .iter()
        .map(|p| (p.seed, &p.controlled.history))
        .collect();
    write(dir, "baseline_points.csv", &viz::run_points_csv(&base))?;
    write(dir, "controlled_points.csv", &viz::run_points_csv(&ctrl))?;
    write(dir, "history.csv", &viz::history_csv(&history))?;
    let mut report = comparison.render();
    let _ = writeln!(
        report,
        "cumulative_el_reduction {}",
        comparison.el_reduction()
    );
    let _ = writeln!(
        report,
        "el_spike_reduction {}",
        comparison.spike_reduction()
    );
    let _ = writeln!(report, "error_increase {}", comparison.error_increase());
    write(dir, "comparison.txt", &report)?;
    write(dir, "comparison.json", &config::to_json(&comparison))?;
    print!("{report}");
    Ok(())
}

fn synth(
    path: Option<&Path>,
    preset: Preset,
    steps: Option<usize>,
    kappa: Option<f64>,
    digest: bool,
    g: &Global,
) -> Outcome {
    let mut cfg = match path {
        Some(p) => config::load_synth(input(p)?)?,
        None => match preset {
            Preset::Default => SynthConfig::default(),
            Preset::StrongCoupling => SynthConfig::strong_coupling(),
            Preset::WellSeparated => SynthConfig::well_separated(),
        },
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(steps) = steps {
        cfg.steps = steps;
    }
    if let Some(kappa) = kappa {
        cfg.kappa = kappa;
    }
    cfg.digest |= digest;
    let (mut trace, phases) = generate::<f64>(&cfg)?;
    if let Some(eps) = g.epsilon {
        trace.meta.epsilon = eps;
    }
    let dir = out_dir(g)?;
    let path = dir.join("trace.jsonl");
    write_trace(&trace, &path)?;
    write(dir, "phases.csv", &viz::phases_csv(&phases))?;
    println!("wrote {} steps to {}", trace.len(), path.display());
    Ok(())
}

fn plot(
    figure: Figure,
    paths: &[PathBuf],
    signal: LayerSignal,
    component: LoadComponent,
    k: usize,
    g: &Global,
) -> Outcome {
    let traces = paths
        .iter()
        .map(|p| load_trace(p, g))
        .collect::<Outcome<Vec<_>>>()?;
    if figure != Figure::Bands && traces.len() != 1 {
        return Err(Failure::Usage(
            format!("{figure:?} takes exactly one trace").to_lowercase(),
        ));
    }
    let first = &traces[0];
    let classes = |points: &[LoadPoint<f64>]| -> Outcome<Option<_>> {
        if k == 0 {
            return Ok(None);
        }
        Ok(Some(cluster_strategies(points, k, g.seed.unwrap_or(0))?))
    };
    let fig = match figure {
        Figure::Curves => {
            let points = points_for(first, g)?;
            viz::export_load_curves(&points, first.error_labels().as_deref(), None)?
        }
        Figure::Simplex => {
            let points = points_for(first, g)?;
            let model = classes(&points)?;
            viz::export_simplex(&points, model.as_ref().map(|m| m.assignments.as_slice()))?
        }
        Figure::Heatmap => viz::export_heatmap(first, signal)?,
        Figure::Radar => viz::export_radar(&trace_summary(&points_for(first, g)?))?,
        Figure::Parallel => {
            let points = points_for(first, g)?;
            let model = classes(&points)?;
            viz::export_parallel_coords(&points, model.as_ref())?
        }
        Figure::Bands => {
            let series = traces
                .iter()
                .map(|t| points_for(t, g))
                .collect::<Outcome<Vec<_>>>()?;
            viz::export_bands(&series, component)?
        }
    };
    let [csv, svg] = fig.write(out_dir(g)?)?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
