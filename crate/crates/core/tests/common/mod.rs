//! A second, deliberately plain implementation of the finite bounds.
//!
//! Small sizes use exact big-integer binomials. Large sizes use
//! compensated sums of `ln i` for the factorials. Entropies are computed
//! with natural logarithms and rescaled.

#![allow(dead_code)]

pub mod audits;
pub mod stats;

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

pub fn entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -(x * x.ln() + (1.0 - x) * (1.0 - x).ln()) / std::f64::consts::LN_2
}

pub fn clipped(x: f64) -> f64 {
    if x >= 0.5 {
        1.0
    } else {
        entropy(x)
    }
}

pub fn pascal_row(n: u64) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 0..n {
        let next = &row[i as usize] * BigInt::from(n - i) / BigInt::from(i + 1);
        row.push(next);
    }
    row
}

/// Hypergeometric probabilities `P(k | n, l, j)`, exactly then rounded.
pub trait Hypergeometric {
    fn prob(&self, k: i64, j: u64) -> f64;
}

pub struct ExactHypergeometric {
    n_row: Vec<BigInt>,
    l_row: Vec<BigInt>,
    total_row: Vec<BigInt>,
}

impl ExactHypergeometric {
    pub fn new(n: u64, l: u64) -> Self {
        ExactHypergeometric {
            n_row: pascal_row(n),
            l_row: pascal_row(l),
            total_row: pascal_row(n + l),
        }
    }
}

impl Hypergeometric for ExactHypergeometric {
    fn prob(&self, k: i64, j: u64) -> f64 {
        let kp = j as i64 - k;
        if k < 0 || kp < 0 || k as usize >= self.l_row.len() || kp as usize >= self.n_row.len() {
            return 0.0;
        }
        let num = &self.l_row[k as usize] * &self.n_row[kp as usize];
        if num.is_zero() {
            return 0.0;
        }
        BigRational::new(num, self.total_row[j as usize].clone()).to_f64().unwrap()
    }
}

/// `ln i!` for `i = 0..=max` with Neumaier summation.
pub struct LnFactorials {
    n: u64,
    l: u64,
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(n: u64, l: u64) -> Self {
        let max = n + l;
        let mut table = Vec::with_capacity(max as usize + 1);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        table.push(0.0);
        for i in 1..=max {
            let x = (i as f64).ln();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        LnFactorials { n, l, table }
    }

    fn ln_choose(&self, a: u64, b: u64) -> f64 {
        self.table[a as usize] - self.table[b as usize] - self.table[(a - b) as usize]
    }
}

impl Hypergeometric for LnFactorials {
    fn prob(&self, k: i64, j: u64) -> f64 {
        let kp = j as i64 - k;
        if k < 0 || kp < 0 || k as u64 > self.l || kp as u64 > self.n {
            return 0.0;
        }
        (self.ln_choose(self.l, k as u64) + self.ln_choose(self.n, kp as u64) - self.ln_choose(self.n + self.l, j)).exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub n: u64,
    pub l: u64,
    pub rate: f64,
    pub k_low: u64,
    pub k_high: u64,
    pub delta: f64,
    /// Use `f(j - k, k_low)` below the lower threshold instead of
    /// `f(j - k_low, k_low)`.
    pub derived_low: bool,
}

pub fn f_value(kp: i64, k: u64, n: u64, l: u64, delta: f64) -> f64 {
    if kp < 0 {
        return 0.0;
    }
    if 2 * kp as u64 >= n {
        return 1.0;
    }
    let e = n as f64 * (entropy(kp as f64 / n as f64) - entropy(k as f64 / l as f64 + delta));
    e.exp2().min(1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    pub total: f64,
    pub per_bit: Option<f64>,
    pub term1: f64,
    pub term2: f64,
    pub mass: f64,
}

pub fn evaluate(c: &Config, hg: &dyn Hypergeometric) -> OracleReport {
    let len = |k: u64| c.n as f64 * (c.rate - entropy(k as f64 / c.l as f64 + c.delta));
    let mut best_h = 0.0f64;
    let mut best_w = 0.0f64;
    let mut best_s = 0.0f64;
    for j in 0..=c.n + c.l {
        let mut s = 0.0;
        let mut w = 0.0;
        for k in 0..=c.k_high {
            let p = hg.prob(k as i64, j);
            if p == 0.0 {
                continue;
            }
            let (f, kk) = if k <= c.k_low {
                let kp = if c.derived_low { j as i64 - k as i64 } else { j as i64 - c.k_low as i64 };
                (f_value(kp, c.k_low, c.n, c.l, c.delta), c.k_low)
            } else {
                (f_value(j as i64 - k as i64, k, c.n, c.l, c.delta), k)
            };
            s += p * f;
            w += p * f * len(kk);
        }
        best_h = best_h.max(clipped(s));
        best_w = best_w.max(w);
        best_s = best_s.max(s);
    }
    let top = len(c.k_high);
    OracleReport {
        total: best_h + best_w,
        per_bit: (top > 0.0).then(|| best_h / top + best_s),
        term1: best_h,
        term2: best_w,
        mass: best_s,
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// A random valid configuration with `n + l <= 200` whose key length at
/// `k_high` is strictly positive.
pub fn random_small_config<R: rand::Rng>(rng: &mut R) -> Config {
    loop {
        let n = rng.random_range(4..=150u64);
        let l = rng.random_range(1..=200 - n);
        let k_high = rng.random_range(0..=l.min((n - 1) / 2));
        let k_low = rng.random_range(0..=k_high);
        let delta = rng.random_range(0.0..0.15);
        if k_high as f64 / l as f64 + delta > 1.0 {
            continue;
        }
        let worst = (k_low..=k_high)
            .map(|k| entropy(k as f64 / l as f64 + delta))
            .fold(0.0, f64::max);
        if worst > 0.97 {
            continue;
        }
        let rate = worst + rng.random_range(0.01..=1.0) * (1.0 - worst);
        return Config {
            n,
            l,
            rate,
            k_low,
            k_high,
            delta,
            derived_low: rng.random_bool(0.25),
        };
    }
}

pub fn params_of(c: &Config) -> finitekey::ProtocolParams {
    use finitekey::secbounds::LowCountRule;
    let rule = if c.derived_low { LowCountRule::Derived } else { LowCountRule::Displayed };
    finitekey::ProtocolParams::new(c.n, c.l, c.rate, c.k_low, c.k_high, finitekey::SlackSchedule::constant(c.delta))
        .expect("generated configuration is valid")
        .with_low_rule(rule)
}
