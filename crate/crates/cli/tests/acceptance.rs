// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cogload_core::analytics::{
    best_permutation_agreement, cluster_strategies, point_biserial, pooled_coincidence,
};
use cogload_core::composition::{
    compute_clt, fit_weights, normalize, reweigh, robust_stats, robust_z, FitConfig, LoadPoint,
    NormMode, Pipeline,
};
use cogload_core::lgd::{run_lgd, Controller, InterventionSet, LgdConfig, Replay, Tier};
use cogload_core::proxies::{compute_proxies, ReuseConfig};
use cogload_core::synth::{generate, SynthConfig};
use cogload_core::trace::{read_trace, write_trace_to, StepRecord, Trace, TraceMeta};
use cogload_core::{LoadPoint64, Trace64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-8;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cogload(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cogload"))
        .args(args)
        .current_dir(root())
        .output()
        .expect("binary runs")
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(cond: bool, detail: String) -> Outcome {
    Outcome { pass: cond, detail }
}

// ---------------------------------------------------------------- proxies

fn random_dist(rng: &mut ChaCha8Rng, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < zero_prob {
                0.0
            } else {
                rng.random::<f64>() + 1e-3
            }
        })
        .collect();
    if v.iter().all(|x| *x == 0.0) {
        v[0] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn random_trace(seed: u64) -> Trace64 {
    let (layers, dim, steps, vocab) = (4, 16, 50, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut meta = TraceMeta::new(layers, dim);
    meta.source = format!("acceptance random seed={seed}");
    let records = (0..steps)
        .map(|t| {
            let width = 6 + t / 4;
            let queries = if rng.random::<f64>() < 0.05 {
                0
            } else {
                rng.random_range(1..40u64)
            };
            StepRecord {
                step: t,
                attention: (0..layers)
                    .map(|_| random_dist(&mut rng, width, 0.15))
                    .collect(),
                hidden: Some(
                    (0..layers)
                        .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
                        .collect(),
                ),
                cache_hits: rng.random_range(0..=queries),
                cache_queries: queries,
                token_dist: random_dist(&mut rng, vocab, 0.2),
                ref_dist: (rng.random::<f64>() < 0.3).then(|| random_dist(&mut rng, vocab, 0.3)),
                concept_active: (rng.random::<f64>() < 0.8)
                    .then(|| (0..width).map(|_| rng.random()).collect()),
                error_event: Some(rng.random::<f64>() < 0.1),
                digest: None,
            }
        })
        .collect();
    Trace {
        meta,
        steps: records,
    }
}

/// Direct per-step recomputation of the six proxies.
fn naive_proxies(trace: &Trace64) -> Vec<[f64; 6]> {
    let eps = trace.meta.epsilon;
    let mut out = Vec::new();
    for (t, s) in trace.steps.iter().enumerate() {
        let layers = s.attention.len() as f64;
        let mut h = 0.0;
        for row in &s.attention {
            let mut e = 0.0;
            for p in row {
                if *p > 0.0 {
                    e -= p * p.ln();
                }
            }
            h += e;
        }
        h /= layers;

        let hid = s.hidden.as_ref().unwrap();
        let dim = hid[0].len();
        let mut mean = vec![0.0; dim];
        for l in hid {
            for j in 0..dim {
                mean[j] += l[j] / hid.len() as f64;
            }
        }
        let mean_norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut disp = 0.0;
        for l in hid {
            let d: f64 = (0..dim)
                .map(|j| (l[j] - mean[j]).powi(2))
                .sum::<f64>()
                .sqrt();
            disp += d / (mean_norm + eps);
        }
        disp /= hid.len() as f64;

        let miss = 1.0 - s.cache_hits as f64 / (s.cache_queries as f64 + eps);

        let reference = match (&s.ref_dist, t) {
            (Some(r), _) => Some(r.clone()),
            (None, 0) => None,
            (None, _) => Some(trace.steps[t - 1].token_dist.clone()),
        };
        let stab = match reference {
            None => 0.0,
            Some(q) => {
                let mut kl = 0.0;
                for (p, q) in s.token_dist.iter().zip(&q) {
                    if *p > 0.0 {
                        kl += p * (p / q.max(eps)).ln();
                    }
                }
                kl.clamp(0.0, 50.0)
            }
        };

        let consol = if t == 0 {
            1.0
        } else {
            let prev = trace.steps[t - 1].hidden.as_ref().unwrap();
            let delta: Vec<Vec<f64>> = hid
                .iter()
                .zip(prev)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect();
            let mut sum = 0.0;
            for l in 1..delta.len() {
                let dot: f64 = delta[l].iter().zip(&delta[l - 1]).map(|(a, b)| a * b).sum();
                let na = delta[l].iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = delta[l - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
                sum += if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    dot / (na * nb)
                };
            }
            sum / (delta.len() - 1) as f64
        };

        let reuse = match &s.concept_active {
            None => 1.0,
            Some(flags) => {
                let mut peaked = 0.0;
                let mut active = 0.0;
                for (i, f) in flags.iter().enumerate() {
                    let peak = s.attention.iter().map(|r| r[i]).fold(f64::MIN, f64::max);
                    if peak > 0.1 {
                        peaked += 1.0;
                        if *f {
                            active += 1.0;
                        }
                    }
                }
                active / (peaked + eps)
            }
        };
        out.push([h, disp, miss, stab, consol, reuse]);
    }
    out
}

fn proxy_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut values = 0usize;
    for seed in 0..100 {
        let trace = random_trace(seed);
        let ours = compute_proxies(&trace, &ReuseConfig::default()).unwrap();
        for (a, b) in ours.iter().zip(naive_proxies(&trace)) {
            for (x, y) in a.to_array().iter().zip(b) {
                worst = worst.max((x - y).abs());
                values += 1;
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("100 traces, {values} values, max |diff| {worst:.3e} (tol 1e-9)"),
    )
}

// ---------------------------------------------------------- normalization

fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn normalization_contract() -> Outcome {
    // ε far below the tolerance, so the guard term does not bias the spread
    let eps = 1e-15;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_median = 0.0f64;
    let mut worst_iqr = 0.0f64;
    let mut worst_default = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(5..300);
        let scale = 10f64.powf(rng.random_range(-2.0..3.0));
        let shift = rng.random_range(-100.0..100.0);
        let xs: Vec<f64> = (0..n)
            .map(|_| shift + scale * rng.random::<f64>().powi(3))
            .collect();
        let stats = robust_stats(&xs);
        if stats.iqr <= 0.0 {
            continue;
        }
        let mut z: Vec<f64> = xs.iter().map(|x| robust_z(*x, &stats, eps)).collect();
        z.sort_by(f64::total_cmp);
        let med = interpolated_quantile(&z, 0.5);
        let iqr = interpolated_quantile(&z, 0.75) - interpolated_quantile(&z, 0.25);
        worst_median = worst_median.max(med.abs());
        worst_iqr = worst_iqr.max((iqr - 1.0).abs());
        let mut zd: Vec<f64> = xs.iter().map(|x| robust_z(*x, &stats, EPS)).collect();
        zd.sort_by(f64::total_cmp);
        let iqr_d = interpolated_quantile(&zd, 0.75) - interpolated_quantile(&zd, 0.25);
        worst_default = worst_default.max((iqr_d - 1.0).abs());
    }
    let constant = [3.25; 17];
    let cs = robust_stats(&constant);
    let flat = constant.iter().all(|x| normalize(*x, &cs, EPS) == 0.5);
    check(
        worst_median <= 1e-9 && worst_iqr <= 1e-9 && flat,
        format!(
            "200 series: max |median| {worst_median:.2e}, max |IQR-1| {worst_iqr:.2e} at eps 1e-15 \
             ({worst_default:.2e} at eps 1e-8); constant series -> 0.5: {flat}"
        ),
    )
}

// ------------------------------------------------------ synthetic analogues

fn strong_set() -> Vec<(Vec<LoadPoint64>, Vec<bool>)> {
    (0..200)
        .map(|seed| {
            let (t, _) = generate::<f64>(&SynthConfig::strong_coupling().with_seed(seed)).unwrap();
            let labels = t.error_labels().unwrap();
            (
                compute_clt(&t, &Pipeline::default(), NormMode::Offline).unwrap(),
                labels,
            )
        })
        .collect()
}

fn coincidence(set: &[(Vec<LoadPoint64>, Vec<bool>)]) -> Outcome {
    let runs: Vec<_> = set
        .iter()
        .map(|(p, l)| (p.as_slice(), l.as_slice()))
        .collect();
    let c = pooled_coincidence(&runs, 0.8, 3).unwrap();
    let errors: usize = set
        .iter()
        .map(|(_, l)| l.iter().filter(|e| **e).count())
        .sum();
    check(
        (0.65..=0.90).contains(&c),
        format!(
            "200 traces x 200 steps, {errors} errors, coincidence {c:.4} (target [0.65, 0.90])"
        ),
    )
}

fn correlation(set: &[(Vec<LoadPoint64>, Vec<bool>)]) -> Outcome {
    let (train, test) = set.split_at(100);
    let data: Vec<_> = train
        .iter()
        .map(|(p, l)| (p.as_slice(), l.as_slice()))
        .collect();
    let fit = fit_weights(&data, &FitConfig::default()).unwrap();
    let mut cli = Vec::new();
    let mut labels = Vec::new();
    for (p, l) in test {
        cli.extend(reweigh(p, &fit.composition, &fit.cli).iter().map(|q| q.cli));
        labels.extend_from_slice(l);
    }
    let held_out = point_biserial(&cli, &labels).unwrap();

    let null: Vec<_> = (0..100)
        .map(|seed| {
            let (t, _) = generate::<f64>(&SynthConfig::default().with_seed(seed)).unwrap();
            let labels = t.error_labels().unwrap();
            (
                compute_clt(&t, &Pipeline::default(), NormMode::Offline).unwrap(),
                labels,
            )
        })
        .collect();
    let data: Vec<_> = null
        .iter()
        .map(|(p, l)| (p.as_slice(), l.as_slice()))
        .collect();
    let null_fit = fit_weights(&data, &FitConfig::default()).unwrap();
    check(
        held_out >= 0.6 && null_fit.correlation.abs() < 0.1,
        format!(
            "held-out r {held_out:.4} (>= 0.6) with w {:?}; kappa=0 fitted |r| {:.4} (< 0.1)",
            fit.cli.w,
            null_fit.correlation.abs()
        ),
    )
}

fn lgd_efficiency() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = cogload(&[
        "lgd",
        "--synth",
        "configs/synth-strong-coupling.json",
        "--lgd",
        "configs/lgd.json",
        "--interventions",
        "configs/interventions.json",
        "--weights",
        "configs/weights-strong-coupling.json",
        "--runs",
        "50",
        "--out",
        out,
    ]);
    if !run.status.success() {
        return check(
            false,
            format!(
                "cogload lgd failed: {}",
                String::from_utf8_lossy(&run.stderr)
            ),
        );
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("comparison.json")).unwrap())
            .unwrap();
    let get = |side: &str, key: &str| report[side][key].as_f64().unwrap();
    let drop = |key: &str| (get("baseline", key) - get("controlled", key)) / get("baseline", key);
    let el = drop("cumulative_el");
    let spikes = drop("el_spikes");
    let errors = -drop("errors");
    check(
        el >= 0.15 && spikes >= 0.30 && errors <= 0.05,
        format!(
            "50 paired runs: cumulative EL -{:.1}% (>= 15%), EL spikes {} -> {} (-{:.1}%, >= 30%), errors {} -> {} ({:+.1}%, <= +5%)",
            100.0 * el,
            get("baseline", "el_spikes"),
            get("controlled", "el_spikes"),
            100.0 * spikes,
            get("baseline", "errors"),
            get("controlled", "errors"),
            100.0 * errors
        ),
    )
}

fn clusters() -> Outcome {
    let cfg = SynthConfig::well_separated();
    let (t, phases) = generate::<f64>(&cfg).unwrap();
    let points = compute_clt(&t, &Pipeline::default(), NormMode::Offline).unwrap();
    let model = cluster_strategies(&points, 3, 0).unwrap();
    let truth: Vec<usize> = phases.iter().map(|p| *p as usize).collect();
    let agreement = best_permutation_agreement(&model.assignments, &truth, 3);
    check(
        agreement >= 0.85,
        format!(
            "{} steps, k=3, agreement {agreement:.4} (>= 0.85)",
            points.len()
        ),
    )
}

// ------------------------------------------------ determinism and format

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn determinism_and_format() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let runs: [&[&str]; 3] = [
        &["synth", "--preset", "strong-coupling", "--seed", "17"],
        &["analyze", "fixtures/golden_full.jsonl", "--seed", "3"],
        &[
            "lgd",
            "--synth",
            "configs/synth-default.json",
            "--lgd",
            "configs/lgd.json",
            "--interventions",
            "configs/interventions.json",
            "--runs",
            "3",
            "--seed",
            "11",
        ],
    ];
    for args in runs {
        let outputs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let mut a = args.to_vec();
                a.extend(["--out", dir.path().to_str().unwrap()]);
                let status = cogload(&a).status;
                (status.success(), files(dir.path()))
            })
            .collect();
        let same = outputs[0].0 && outputs[0] == outputs[1];
        ok &= same;
        notes.push(format!("{} identical: {same}", args[0]));
    }

    let mut roundtrip = true;
    for name in ["golden_full.jsonl", "golden_digest.jsonl"] {
        let path = root().join("fixtures").join(name);
        let trace: Trace64 = read_trace(&path).unwrap();
        let mut buf = Vec::new();
        write_trace_to(&trace, &mut buf).unwrap();
        roundtrip &= buf == std::fs::read(&path).unwrap();
    }
    ok &= roundtrip;
    notes.push(format!("fixture roundtrip: {roundtrip}"));

    let dir = tempfile::tempdir().unwrap();
    let run = cogload(&[
        "compute",
        "fixtures/golden_full.jsonl",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let golden =
        run.status.success() && files(dir.path()) == files(&root().join("fixtures/golden_compute"));
    ok &= golden;
    notes.push(format!("golden compute: {golden}"));
    check(ok, notes.join(", "))
}

// ------------------------------------------------------------ controller

fn algorithm_conformance() -> Outcome {
    use cogload_core::lgd::{Intervention, Target};
    use cogload_core::proxies::ProxyVector;
    use cogload_core::synth::Effect;
    let point = |step, cli: f64| LoadPoint {
        step,
        raw: ProxyVector::default(),
        normalized: ProxyVector::default(),
        il: cli,
        el: cli,
        gl: cli,
        cli,
    };
    let set = vec![
        Intervention {
            id: "warn".into(),
            target: Target::El,
            tier: Tier::Warn,
            effect: Effect::new([("miss_prob", 0.5)], 2),
        },
        Intervention {
            id: "act".into(),
            target: Target::El,
            tier: Tier::Act,
            effect: Effect::new([("miss_prob", 0.2)], 2),
        },
    ];
    let mut notes = Vec::new();

    let mut c = Controller::new(LgdConfig::default(), set.clone()).unwrap();
    for (t, cli) in [0.5, 0.7, 0.9].into_iter().enumerate() {
        c.observe(&point(t, cli)).unwrap();
    }
    let seq: Vec<_> = c
        .history()
        .events
        .iter()
        .map(|e| (e.step, e.tier))
        .collect();
    let sequence = seq == [(1, Tier::Warn), (2, Tier::Act)];
    notes.push(format!("[0.5, 0.7, 0.9] -> {seq:?}"));

    // a CLI above both thresholds takes the act branch only
    let mut c = Controller::new(LgdConfig::default(), set.clone()).unwrap();
    c.observe(&point(0, 0.95)).unwrap();
    let precedence = c.history().len() == 1 && c.history().events[0].tier == Tier::Act;
    notes.push(format!("act before warn: {precedence}"));

    let high = LgdConfig {
        tau_warn: 0.99,
        tau_act: 0.999,
        cooldown: 5,
    };
    let mut c = Controller::new(high, set.clone()).unwrap();
    for t in 0..100 {
        c.observe(&point(t, (0.99 * t as f64 / 99.0).min(0.99)))
            .unwrap();
    }
    let silent = c.history().is_empty();
    notes.push(format!("unreachable thresholds silent: {silent}"));

    let (trace, _) = generate::<f64>(&SynthConfig::strong_coupling().with_seed(1)).unwrap();
    let pipeline = Pipeline {
        cli: cogload_core::composition::CliWeights::new([0.0, 0.7, 0.3]).unwrap(),
        ..Pipeline::default()
    };
    let interventions = InterventionSet::standard().interventions;
    let full = run_lgd(
        &mut Replay::new(&trace),
        &LgdConfig::default(),
        &pipeline,
        &interventions,
    )
    .unwrap();
    let mut causal = true;
    for k in (1..=trace.len()).step_by(13) {
        let part = run_lgd(
            &mut Replay::new(&trace.truncated(k)),
            &LgdConfig::default(),
            &pipeline,
            &interventions,
        )
        .unwrap();
        let expected: Vec<_> = full
            .history
            .events
            .iter()
            .filter(|e| e.step < k)
            .cloned()
            .collect();
        causal &= part.history.events == expected && part.points[..] == full.points[..k];
    }
    notes.push(format!(
        "prefix causal over {} events: {causal}",
        full.history.len()
    ));
    check(sequence && precedence && silent && causal, notes.join("; "))
}

fn main() {
    type Criterion = (&'static str, Box<dyn Fn() -> Outcome>, Option<Duration>);
    let set = std::rc::Rc::new(std::cell::OnceCell::new());
    let (s1, s2) = (set.clone(), set.clone());
    let criteria: Vec<Criterion> = vec![
        (
            "proxy oracle equivalence",
            Box::new(proxy_oracle),
            Some(Duration::from_secs(10)),
        ),
        (
            "normalization contract",
            Box::new(normalization_contract),
            None,
        ),
        (
            "error/EL-spike coincidence",
            Box::new(move || coincidence(s1.get_or_init(strong_set))),
            Some(Duration::from_secs(60)),
        ),
        (
            "load-index correlation",
            Box::new(move || correlation(s2.get_or_init(strong_set))),
            Some(Duration::from_secs(120)),
        ),
        (
            "load-guided decoding efficiency",
            Box::new(lgd_efficiency),
            Some(Duration::from_secs(60)),
        ),
        ("strategy clusters", Box::new(clusters), None),
        (
            "determinism and format",
            Box::new(determinism_and_format),
            None,
        ),
        (
            "controller threshold conformance",
            Box::new(algorithm_conformance),
            None,
        ),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let Some(b) = budget {
            if elapsed > b {
                outcome.pass = false;
                outcome
                    .detail
                    .push_str(&format!("; over time budget {}s", b.as_secs()));
            }
        }
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.2}s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
