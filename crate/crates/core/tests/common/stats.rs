//! Monte-Carlo statistics of simulated runs against closed forms.

use finitekey::gf2::{BinaryCode, BlockDecoder, SyndromeDecoder};
use finitekey::numerics::{hypergeom_pmf, log2_binomial};
use finitekey::protocol::{simulate_transcripts, summarize, SimConfig};
use finitekey::{Probability, ProtocolParams, SlackSchedule};
use std::sync::Arc;

pub fn prob(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

/// `b` Hamming blocks; × basis thresholds `0..=k_high`, slack zero.
pub fn hamming_config(blocks: usize, l: u64, p_bit: f64, p_phase: f64, seed: u64) -> SimConfig {
    let n = 7 * blocks as u64;
    let k_high = ((n - 1) / 2).min(l);
    let params = ProtocolParams::new(n, l, 1.0, 0, k_high, SlackSchedule::constant(0.0)).unwrap();
    let dec = BlockDecoder::new(Box::new(SyndromeDecoder::new(&BinaryCode::hamming74()).unwrap()), blocks);
    SimConfig::with_code_decoder(params, l, n, (0, l), prob(p_bit), prob(p_phase), Arc::new(dec), seed).unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct Agreement {
    pub observed: f64,
    pub expected: f64,
    pub sigma: f64,
}

/// Agreement rate of `runs` Hamming runs against the block success
/// probability `((1-p)^7 + 7p(1-p)^6)^b`.
pub fn hamming_agreement(blocks: usize, p: f64, runs: usize, seed: u64) -> Agreement {
    let cfg = hamming_config(blocks, 40, p, 0.0, seed);
    let summary = summarize(&cfg, &simulate_transcripts(&cfg, runs).unwrap());
    let q = (1.0 - p).powi(7) + 7.0 * p * (1.0 - p).powi(6);
    let expected = q.powi(blocks as i32);
    Agreement {
        observed: summary.agreement_rate.unwrap(),
        expected,
        sigma: (expected * (1.0 - expected) / runs as f64).sqrt(),
    }
}

/// Law of the check count when `j` errors out of `n + l` are binomial and
/// spread uniformly: `sum_j Bin(j; n + l, p) P_hg(k | n, l, j)`.
pub fn composed_check_law(n: u64, l: u64, p: f64) -> Vec<f64> {
    let total = n + l;
    let mut law = vec![0.0; l as usize + 1];
    for j in 0..=total {
        let w = (log2_binomial(total, j as i64).log2() + j as f64 * p.log2() + (total - j) as f64 * (1.0 - p).log2()).exp2();
        if w < 1e-300 {
            continue;
        }
        for (k, slot) in law.iter_mut().enumerate() {
            *slot += w * hypergeom_pmf(k as i64, n, l, j).unwrap().value();
        }
    }
    law
}

#[derive(Debug, Clone, Copy)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    /// `dof + 4 sqrt(2 dof)`.
    pub threshold: f64,
}

impl ChiSquare {
    pub fn passed(&self) -> bool {
        self.statistic < self.threshold
    }
}

/// Pearson statistic with adjacent cells pooled until each expects at least five.
pub fn chi_square(counts: &[u64], law: &[f64]) -> ChiSquare {
    let total: u64 = counts.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (c, q) in counts.iter().zip(law) {
        o += *c as f64;
        e += q * total as f64;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    let statistic = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = cells.len().saturating_sub(1).max(1);
    ChiSquare {
        statistic,
        dof,
        threshold: dof as f64 + 4.0 * (2.0 * dof as f64).sqrt(),
    }
}

/// Goodness of fit of both check-count histograms.
pub fn check_count_fit(runs: usize, seed: u64) -> (ChiSquare, ChiSquare) {
    let (p_bit, p_phase, l) = (0.08, 0.12, 60u64);
    let cfg = hamming_config(7, l, p_bit, p_phase, seed);
    let summary = summarize(&cfg, &simulate_transcripts(&cfg, runs).unwrap());
    let plus = chi_square(&summary.k_plus_hist, &composed_check_law(cfg.n_plus, l, p_bit));
    let times = chi_square(&summary.k_times_hist, &composed_check_law(cfg.n_times, l, p_phase));
    (plus, times)
}

#[derive(Debug, Clone, Copy)]
pub struct Spread {
    pub variance: f64,
    /// Standard error of `variance`.
    pub std_error: f64,
}

/// Sample variance of `k_times / l_times - hidden / (a n_plus)` where
/// `hidden` counts phase errors over all `a` blocks of a run.
pub fn estimator_spread(cfg: &SimConfig, runs: usize) -> Spread {
    let all = simulate_transcripts(cfg, runs).unwrap();
    let a = cfg.repeat_a as f64;
    let values: Vec<f64> = all
        .iter()
        .map(|run| {
            let hidden: u64 = run.iter().map(|t| t.hidden_phase_errors).sum();
            run[0].k_times as f64 / cfg.l_times as f64 - hidden as f64 / (a * cfg.n_plus as f64)
        })
        .collect();
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / m;
    Spread {
        variance: var,
        std_error: ((m4 - var * var) / m).sqrt(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RepeatComparison {
    /// Repeated protocol with `a` blocks and `l` checks.
    pub repeated: Spread,
    /// Base protocol with `a l` checks.
    pub base_al: Spread,
    /// Base protocol with `l` checks.
    pub base_l: Spread,
    /// `p (1 - p) (1/l + 1/(a n))`.
    pub predicted: f64,
}

impl RepeatComparison {
    pub fn consistent(&self) -> bool {
        let se = (self.repeated.std_error.powi(2) + self.base_al.std_error.powi(2)).sqrt();
        (self.repeated.variance - self.base_al.variance).abs() < 4.0 * se
            && (self.repeated.variance - self.predicted).abs() < 4.0 * self.repeated.std_error
            && self.repeated.variance < self.base_l.variance
    }
}

/// Compares estimator spreads at `n_plus = l_times = 7 b`, where the
/// repeated protocol and the base protocol with `a l` checks have the
/// same variance.
pub fn repeat_comparison(blocks: usize, a: u32, runs: usize, seed: u64) -> RepeatComparison {
    let p = 0.05;
    let n = 7 * blocks as u64;
    let repeated_cfg = hamming_config(blocks, n, 0.0, p, seed).with_repeat(a).unwrap();
    let base_al = hamming_config(blocks, a as u64 * n, 0.0, p, seed + 1);
    let base_l = hamming_config(blocks, n, 0.0, p, seed + 2);
    RepeatComparison {
        repeated: estimator_spread(&repeated_cfg, runs),
        base_al: estimator_spread(&base_al, runs),
        base_l: estimator_spread(&base_l, runs),
        predicted: p * (1.0 - p) * (1.0 / n as f64 + 1.0 / (a as f64 * n as f64)),
    }
}
