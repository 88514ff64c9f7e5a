mod common;

use std::sync::Arc;

use common::stats::*;
use finitekey::gf2::{sample_subcode, BinaryCode, SyndromeDecoder};
use finitekey::numerics::binary_entropy;
use finitekey::protocol::*;
use finitekey::{ProtocolParams, SlackSchedule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn noiseless_configs() -> Vec<SimConfig> {
    let zero = prob(0.0);
    let mut out = vec![hamming_config(3, 30, 0.0, 0.0, 1)];
    let rep = BinaryCode::repetition(15);
    let params = ProtocolParams::new(15, 20, 1.0, 0, 5, SlackSchedule::constant(0.0)).unwrap();
    out.push(SimConfig::new(params, 20, 15, (0, 20), zero, zero, rep, 2).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random = sample_subcode(20, 12, &mut rng).unwrap();
    let params = ProtocolParams::new(20, 30, 1.0, 1, 4, SlackSchedule::constant(0.05)).unwrap();
    let cfg = SimConfig::new(params, 30, 20, (0, 30), zero, zero, random.clone(), 3).unwrap();
    out.push(cfg.with_decoder(Arc::new(SyndromeDecoder::new(&random).unwrap())).unwrap());
    out
}

#[test]
fn noiseless_runs_always_agree() {
    for cfg in noiseless_configs() {
        for run in simulate_transcripts(&cfg, 300).unwrap() {
            let t = &run[0];
            assert!(!t.is_aborted());
            assert!(t.agree);
            assert_eq!(t.bit_errors, 0);
        }
    }
}

#[test]
fn repeated_noiseless_blocks_agree_and_share_counts() {
    let cfg = hamming_config(2, 20, 0.0, 0.0, 8).with_repeat(2).unwrap();
    let run = simulate_modified(&cfg).unwrap();
    assert_eq!(run.len(), 2);
    assert!(run.iter().all(|t| t.agree));
    assert_eq!((run[0].k_plus, run[0].k_times), (run[1].k_plus, run[1].k_times));
}

#[test]
fn hamming_agreement_matches_block_success() {
    let a = hamming_agreement(4, 0.03, 4_000, 10);
    assert!((a.observed - a.expected).abs() < 4.0 * a.sigma, "{a:?}");
}

#[test]
fn check_counts_fit_the_composition_law() {
    let (plus, times) = check_count_fit(4_000, 11);
    assert!(plus.passed(), "{plus:?}");
    assert!(times.passed(), "{times:?}");
}

#[test]
fn composition_law_is_binomial() {
    let law = composed_check_law(30, 12, 0.2);
    for (k, q) in law.iter().enumerate() {
        let b = finitekey::numerics::log2_binomial(12, k as i64).value() * 0.2f64.powi(k as i32) * 0.8f64.powi(12 - k as i32);
        assert!((q - b).abs() < 1e-12);
    }
}

#[test]
fn abort_flags_follow_the_thresholds() {
    let cfg = hamming_config(2, 30, 0.1, 0.1, 12);
    for run in simulate_transcripts(&cfg, 500).unwrap() {
        let t = &run[0];
        assert_eq!(t.aborted_times, t.k_plus > cfg.k_high_plus);
        assert_eq!(t.aborted_plus, t.k_times > cfg.params.k_high);
        if !t.is_aborted() {
            let k = t.k_times.max(cfg.params.k_low);
            let s = (cfg.n_plus as f64 * binary_entropy(prob(k as f64 / cfg.l_times as f64))).ceil() as u64;
            assert_eq!(t.subcode_dim, s);
            assert_eq!(t.key_len, t.code_dim - s);
        }
    }
}

#[test]
fn outputs_are_reproducible() {
    let cfg = hamming_config(3, 30, 0.05, 0.05, 13).with_repeat(3).unwrap();
    let a = serde_json::to_vec(&simulate_transcripts(&cfg, 50).unwrap()).unwrap();
    let b = serde_json::to_vec(&simulate_transcripts(&cfg, 50).unwrap()).unwrap();
    assert_eq!(a, b);
    let c = serde_json::to_vec(&simulate_transcripts(&cfg.clone().with_seed(14), 50).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn repetition_reduces_estimator_variance() {
    let cmp = repeat_comparison(3, 5, 3_000, 20);
    assert!(cmp.consistent(), "{cmp:?}");
}

#[test]
fn attached_bounds_are_finite() {
    let cfg = hamming_config(3, 30, 0.02, 0.02, 15);
    for run in simulate_transcripts(&cfg, 100).unwrap() {
        let t = &run[0];
        match attach_bound(t, &cfg.params) {
            Ok(v) => assert!(v.is_finite() && v >= 0.0),
            Err(_) => assert!(t.is_aborted()),
        }
    }
}
