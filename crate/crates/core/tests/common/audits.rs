//! Batch runners for the lemma audits, shared by the property tests and
//! the acceptance report.

use finitekey::gf2::{sample_subcode, AdditiveChannel};
use finitekey::oracles::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    /// Inequalities checked.
    pub instances: u64,
    pub violations: u64,
    /// Smallest `bound - value` seen.
    pub min_slack: f64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            instances: 0,
            violations: 0,
            min_slack: f64::INFINITY,
        }
    }

    fn record(&mut self, value: f64, bound: f64, tol: f64) {
        self.instances += 1;
        let slack = bound - value;
        self.min_slack = self.min_slack.min(slack);
        if slack < -tol {
            self.violations += 1;
        }
    }
}

/// Both steps of the chain `I <= H(P_Z) <= eta_n(1 - P_Z(0))`.
pub fn lemma1_audit(samples: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for _ in 0..samples {
        let n = rng.random_range(1..=3);
        let d = PauliDistribution::random(n, &mut rng).unwrap();
        let info = lemma1_eve_information(&d);
        let phase = d.phase_entropy();
        tally.record(info, phase, 1e-12);
        tally.record(phase, lemma1_bound(&d), 1e-12);
    }
    tally
}

/// Random distributions on `2..=16` outcomes; returns the tally and the
/// largest gap seen on uniform distributions.
pub fn lemma7_audit(samples: usize, seed: u64) -> (Tally, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for _ in 0..samples {
        let d = rng.random_range(2..=16);
        let mut p: Vec<f64> = (0..d)
            .map(|_| if rng.random_bool(0.8) { -(1.0 - rng.random::<f64>()).ln() } else { 0.0 })
            .collect();
        if p.iter().all(|&x| x == 0.0) {
            p[0] = 1.0;
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        let (h, b) = lemma7_check(&p).unwrap();
        tally.record(h, b, 1e-12);
    }
    let uniform_gap = (2..=16)
        .map(|d| {
            let (h, b) = lemma7_check(&vec![1.0 / d as f64; d]).unwrap();
            (b - h).abs()
        })
        .fold(0.0, f64::max);
    (tally, uniform_gap)
}

/// Every `(n, t, s)` with `n <= 6` whose ensemble is within the
/// enumeration guard, for `channels` random channels per length.
pub fn lemma2_audit(channels: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for n in 1..=ENSEMBLE_LENGTH_LIMIT {
        for _ in 0..channels {
            let w = AdditiveChannel::random(n, &mut rng).unwrap();
            for t in 0..n {
                let c1 = sample_subcode(n, t, &mut rng).unwrap();
                for s in 0..=n - t {
                    if extension_count(n, t, s) > ENSEMBLE_SIZE_LIMIT {
                        continue;
                    }
                    let audit = lemma2_oracle(&c1, s, &w, 0, &mut rng).unwrap();
                    assert!(audit.exhaustive);
                    tally.record(audit.average_error, audit.bound, 1e-12);
                }
            }
        }
    }
    tally
}
