// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use cogload_core::synth::{generate, SynthConfig};
use cogload_core::trace::{
    read_trace, read_trace_from, validate_trace, write_trace, write_trace_to, Trace, TraceMode,
};
use cogload_core::{Error, Trace32, Trace64};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn small(seed: u64, steps: usize, digest: bool) -> SynthConfig {
    SynthConfig {
        num_layers: 3,
        hidden_dim: 5,
        context_init: 4,
        context_max: 9,
        context_growth: 0.5,
        vocab: 6,
        digest,
        ..SynthConfig::default()
            .with_seed(seed)
            .with_steps(steps)
            .with_kappa(2.0)
    }
}

fn encode<S: cogload_core::Scalar>(t: &Trace<S>) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace_to(t, &mut buf).unwrap();
    buf
}

#[test]
fn fixtures_roundtrip_exactly() {
    for name in ["golden_full.jsonl", "golden_digest.jsonl"] {
        let path = fixture(name);
        let trace: Trace64 = read_trace(&path).unwrap();
        assert!(validate_trace(&trace).is_empty());
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(encode(&trace), bytes, "{name} does not re-encode to itself");
        let dir = tempfile::tempdir().unwrap();
        let copy = dir.path().join(name);
        write_trace(&trace, &copy).unwrap();
        assert_eq!(read_trace::<f64>(&copy).unwrap(), trace);
    }
    let digest: Trace64 = read_trace(fixture("golden_digest.jsonl")).unwrap();
    assert_eq!(digest.meta.mode, TraceMode::Digest);
    assert!(digest
        .steps
        .iter()
        .all(|s| s.hidden.is_none() && s.digest.is_some()));
}

#[test]
fn fixtures_match_their_generator_config() {
    let cfg: SynthConfig = cogload_core::config::load_synth(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/synth-fixture.json"),
    )
    .unwrap();
    let (full, _) = generate::<f64>(&cfg).unwrap();
    assert_eq!(
        full,
        read_trace::<f64>(fixture("golden_full.jsonl")).unwrap()
    );
    let (digest, _) = generate::<f64>(&SynthConfig {
        digest: true,
        ..cfg
    })
    .unwrap();
    assert_eq!(
        digest,
        read_trace::<f64>(fixture("golden_digest.jsonl")).unwrap()
    );
}

#[test]
fn unreadable_and_missing_files() {
    assert!(matches!(
        read_trace::<f64>(fixture("does-not-exist.jsonl")),
        Err(Error::Io { .. })
    ));
    let err = read_trace_from::<f64, _>(&b"{\"format\":\"cogload-trace\",\"version\":1,\"num_layers\":1,\"hidden_dim\":1,\"source\":\"\",\"mode\":\"full\",\"epsilon\":1e-8}\n{\"step\":0,"[..])
        .unwrap_err();
    assert!(matches!(err, Error::MalformedRecord { line: 2, .. }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roundtrip_is_bit_exact(seed in any::<u64>(), steps in 1usize..30, digest in any::<bool>()) {
        let (t, _) = generate::<f64>(&small(seed, steps, digest)).unwrap();
        let back: Trace64 = read_trace_from(encode(&t).as_slice()).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(encode(&back), encode(&t));
    }

    #[test]
    fn roundtrip_f32(seed in any::<u64>(), steps in 1usize..20) {
        let (t, _) = generate::<f32>(&small(seed, steps, false)).unwrap();
        let back: Trace32 = read_trace_from(encode(&t).as_slice()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn generated_traces_validate(seed in any::<u64>(), steps in 1usize..40, digest in any::<bool>()) {
        let (t, _) = generate::<f64>(&small(seed, steps, digest)).unwrap();
        prop_assert!(validate_trace(&t).is_empty());
    }

    /// Any single corrupted field is reported.
    #[test]
    fn single_corruptions_are_caught(seed in any::<u64>(), which in 0usize..9, at in 0usize..8) {
        let (mut t, _) = generate::<f64>(&small(seed, 8, false)).unwrap();
        let s = &mut t.steps[at];
        match which {
            0 => s.attention[0][0] += 0.5,
            1 => s.attention[1][0] = -0.1,
            2 => s.attention[2].push(0.0),
            3 => s.cache_hits = s.cache_queries + 1,
            4 => s.token_dist[0] = f64::NAN,
            5 => s.token_dist.pop().map(|_| ()).unwrap(),
            6 => s.hidden.as_mut().unwrap()[0].pop().map(|_| ()).unwrap(),
            7 => s.step += 1,
            _ => s.concept_active.as_mut().unwrap().push(true),
        }
        prop_assert!(!validate_trace(&t).is_empty());
    }
}
