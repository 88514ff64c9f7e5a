//! Finite-length upper bounds on the eavesdropper's information.
//!
//! The main evaluators work on a [`ProtocolParams`]: raw-key length `n`,
//! check-bit count `l`, error-correcting code rate `R`, the lower and upper
//! thresholds on the observed check-error count, and the slack `delta_k`
//! added to the observed error rate before sizing privacy amplification.
//!
//! For every total error count `j` over the `n + l` positions the bound
//! forms
//!
//! ```text
//! S_j = sum_{k <= k_low}         P_hg(k | n, l, j) f(j - k_low, k_low)
//!     + sum_{k_low < k <= k_high} P_hg(k | n, l, j) f(j - k, k)
//! W_j = the same sum with every summand weighted by n (R - h(k/l + delta_k))
//! ```
//!
//! and reports `max_j hbar(S_j) + max_j W_j` (total information) and
//! `max_j hbar(S_j) / (n (R - h(k_high/l + delta_k_high))) + max_j S_j`
//! (information per key bit).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gf2::g_factor;
use crate::numerics::{clipped_entropy_bits, entropy_bits, eta, hypergeom_ln_range, Probability};

/// Slack `delta_k` added to the observed check-error rate `k / l`.
#[derive(Clone)]
pub enum SlackSchedule {
    Constant(f64),
    /// Values for `k = first, first + 1, ...`.
    Table { first: u64, values: Vec<f64> },
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl SlackSchedule {
    pub fn constant(delta: f64) -> Self {
        SlackSchedule::Constant(delta)
    }

    pub fn custom(f: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        SlackSchedule::Custom(Arc::new(f))
    }

    /// Slack chosen through the normal approximation so that the per-bit
    /// bound sits near `target` for every count.
    pub fn for_target_level(n: u64, l: u64, target: Probability) -> Result<Self> {
        let z = crate::numerics::gauss_quantile(target)?;
        let scale = ((n + l) as f64 / (n as f64 * l as f64)).sqrt();
        Ok(SlackSchedule::custom(move |k| {
            let rate = (k as f64 / l as f64).min(1.0);
            (-scale * (rate * (1.0 - rate)).sqrt() * z).max(0.0)
        }))
    }

    pub fn get(&self, k: u64) -> Option<f64> {
        match self {
            SlackSchedule::Constant(d) => Some(*d),
            SlackSchedule::Table { first, values } => {
                k.checked_sub(*first).and_then(|i| values.get(i as usize)).copied()
            }
            SlackSchedule::Custom(f) => Some(f(k)),
        }
    }

    /// Slack at `k`; panics if the table does not cover `k`.
    /// [`ProtocolParams::new`] checks coverage of the threshold range.
    pub fn at(&self, k: u64) -> f64 {
        self.get(k)
            .unwrap_or_else(|| panic!("slack schedule does not cover k = {k}"))
    }
}

impl fmt::Debug for SlackSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlackSchedule::Constant(d) => f.debug_tuple("Constant").field(d).finish(),
            SlackSchedule::Table { first, values } => f
                .debug_struct("Table")
                .field("first", first)
                .field("values", values)
                .finish(),
            SlackSchedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// How counts below the lower threshold enter the bound.
///
/// Such counts are replaced by `k_low` before privacy amplification is
/// sized. The displayed bound then evaluates `f(j - k_low, k_low)`;
/// the derivation it comes from evaluates `f(j - k, k_low)` with the count
/// actually observed, which is never smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LowCountRule {
    #[default]
    Displayed,
    Derived,
}

/// Sizes, thresholds and slack for one basis of the protocol.
#[derive(Debug, Clone)]
pub struct ProtocolParams {
    /// Raw-key length.
    pub n: u64,
    /// Number of check bits.
    pub l: u64,
    /// Rate of the error-correcting code.
    pub rate: f64,
    pub k_low: u64,
    pub k_high: u64,
    pub slack: SlackSchedule,
    pub low_rule: LowCountRule,
}

impl ProtocolParams {
    pub fn new(n: u64, l: u64, rate: f64, k_low: u64, k_high: u64, slack: SlackSchedule) -> Result<Self> {
        let params = ProtocolParams {
            n,
            l,
            rate,
            k_low,
            k_high,
            slack,
            low_rule: LowCountRule::Displayed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_low_rule(mut self, rule: LowCountRule) -> Self {
        self.low_rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n == 0 || self.l == 0 {
            return bad(format!("n = {} and l = {} must be positive", self.n, self.l));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(domain("rate", self.rate, "0 < R <= 1"));
        }
        if self.k_low > self.k_high || self.k_high > self.l {
            return bad(format!(
                "thresholds must satisfy k_low <= k_high <= l, got {} <= {} <= {}",
                self.k_low, self.k_high, self.l
            ));
        }
        if 2 * self.k_high >= self.n {
            return bad(format!("k_high = {} must be below n/2 = {}", self.k_high, self.n as f64 / 2.0));
        }
        for k in self.k_low..=self.k_high {
            let Some(d) = self.slack.get(k) else {
                return bad(format!("slack schedule does not cover k = {k}"));
            };
            if !(d >= 0.0) {
                return Err(domain("delta_k", d, "delta_k >= 0"));
            }
            if k as f64 / self.l as f64 + d > 1.0 {
                return Err(domain("k/l + delta_k", k as f64 / self.l as f64 + d, "<= 1"));
            }
        }
        Ok(())
    }

    /// `h(k/l + delta_k)`: the fraction of the raw key sacrificed at count `k`.
    pub fn sacrificed_fraction(&self, k: u64) -> f64 {
        entropy_bits(k as f64 / self.l as f64 + self.slack.at(k))
    }

    /// `n (R - h(k/l + delta_k))`, the final key length at count `k`.
    pub fn key_length(&self, k: u64) -> f64 {
        self.n as f64 * (self.rate - self.sacrificed_fraction(k))
    }

    fn check_key_lengths(&self) -> Result<()> {
        for k in self.k_low..=self.k_high {
            let margin = self.rate - self.sacrificed_fraction(k);
            if margin < 0.0 {
                return Err(Error::NegativeKeyLength { k, margin });
            }
        }
        Ok(())
    }
}

/// Evaluated bounds with the maximising error counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// Bound on the total information, `term1 + term2`.
    pub total_bound: f64,
    /// Bound on the information per final key bit; `None` when the key
    /// length at `k_high` is not positive.
    pub per_bit_bound: Option<f64>,
    /// `max_j hbar(S_j)`.
    pub term1: f64,
    /// `max_j W_j`.
    pub term2: f64,
    /// `max_j S_j`, the second summand of the per-bit bound.
    pub mass_term: f64,
    pub argmax_j_term1: u64,
    pub argmax_j_term2: u64,
    pub argmax_j_mass: u64,
}

/// The min-clipped exponential factor
/// `f(k', k | n, l, delta) = min{2^{n (h(k'/n) - h(k/l + delta))}, 1}`,
/// exactly one when `k' >= n/2` and zero for negative `k'`.
pub fn f_factor(k_prime: i64, k: u64, n: u64, l: u64, delta: f64) -> Result<Probability> {
    if n == 0 || l == 0 || k > l {
        return Err(Error::InvalidParams(format!("need n, l > 0 and k <= l (n = {n}, l = {l}, k = {k})")));
    }
    let x = k as f64 / l as f64 + delta;
    if !(delta >= 0.0) || x > 1.0 {
        return Err(domain("k/l + delta", x, "delta >= 0 and k/l + delta <= 1"));
    }
    Ok(Probability::saturating(
        f_log2(k_prime, n, n as f64 * entropy_bits(x), |kp| n as f64 * entropy_bits(kp as f64 / n as f64)).exp2(),
    ))
}

#[inline]
fn f_log2(k_prime: i64, n: u64, n_h_threshold: f64, n_h: impl Fn(u64) -> f64) -> f64 {
    if k_prime < 0 {
        f64::NEG_INFINITY
    } else if 2 * k_prime as u64 >= n {
        0.0
    } else {
        (n_h(k_prime as u64) - n_h_threshold).min(0.0)
    }
}

/// The two sums at a fixed total error count `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSums {
    /// `S_j`.
    pub mass: f64,
    /// `W_j`.
    pub weighted: f64,
}

/// Precomputed per-count quantities shared by every `j`.
struct Evaluator<'a> {
    params: &'a ProtocolParams,
    /// `n h(k'/n)` for `k' = 0..=n`.
    n_h: Vec<f64>,
    /// `n h(k/l + delta_k)` for `k = 0..=k_high` (entries below `k_low` unused).
    n_h_threshold: Vec<f64>,
    key_len: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(params: &'a ProtocolParams) -> Self {
        let n = params.n;
        let n_h = (0..=n).map(|kp| n as f64 * entropy_bits(kp as f64 / n as f64)).collect();
        let mut n_h_threshold = vec![0.0; params.k_high as usize + 1];
        let mut key_len = vec![0.0; params.k_high as usize + 1];
        for k in params.k_low..=params.k_high {
            n_h_threshold[k as usize] = n as f64 * params.sacrificed_fraction(k);
            key_len[k as usize] = params.key_length(k);
        }
        Evaluator {
            params,
            n_h,
            n_h_threshold,
            key_len,
        }
    }

    fn f_log2(&self, k_prime: i64, k: u64) -> f64 {
        f_log2(k_prime, self.params.n, self.n_h_threshold[k as usize], |kp| self.n_h[kp as usize])
    }

    fn row(&self, j: u64) -> RowSums {
        let p = self.params;
        let (n, l) = (p.n, p.l);
        let k_min = j.saturating_sub(n);
        let k_max = j.min(l).min(p.k_high);
        let mut mass = 0.0;
        let mut weighted = 0.0;
        if k_min > k_max {
            return RowSums { mass, weighted };
        }
        let low_len = self.key_len[p.k_low as usize];
        let displayed_low = self.f_log2(j as i64 - p.k_low as i64, p.k_low);
        let ln_row = hypergeom_ln_range(n, l, j, k_min, k_max);
        for k in k_min..=k_max {
            let log_p = ln_row[(k - k_min) as usize] / std::f64::consts::LN_2;
            let (log_f, len) = if k <= p.k_low {
                let lf = match p.low_rule {
                    LowCountRule::Displayed => displayed_low,
                    LowCountRule::Derived => self.f_log2(j as i64 - k as i64, p.k_low),
                };
                (lf, low_len)
            } else {
                (self.f_log2(j as i64 - k as i64, k), self.key_len[k as usize])
            };
            let term = (log_p + log_f).exp2();
            mass += term;
            weighted += term * len;
        }
        RowSums { mass, weighted }
    }

    fn report(&self) -> BoundReport {
        let p = self.params;
        let rows: Vec<RowSums> = (0..=p.n + p.l).into_par_iter().map(|j| self.row(j)).collect();
        let argmax = |value: &dyn Fn(&RowSums) -> f64| -> (u64, f64) {
            rows.iter().enumerate().fold((0u64, f64::NEG_INFINITY), |best, (j, r)| {
                let v = value(r);
                if v > best.1 {
                    (j as u64, v)
                } else {
                    best
                }
            })
        };
        let (j1, term1) = argmax(&|r| clipped_entropy_bits(r.mass));
        let (j2, term2) = argmax(&|r| r.weighted);
        let (jm, mass_term) = argmax(&|r| r.mass);
        let len_high = self.key_len[p.k_high as usize];
        BoundReport {
            total_bound: term1 + term2,
            per_bit_bound: (len_high > 0.0).then(|| term1 / len_high + mass_term),
            term1,
            term2,
            mass_term,
            argmax_j_term1: j1,
            argmax_j_term2: j2,
            argmax_j_mass: jm,
        }
    }
}

/// `S_j` and `W_j` at one total error count.
pub fn row_sums(params: &ProtocolParams, j: u64) -> Result<RowSums> {
    params.validate()?;
    if j > params.n + params.l {
        return Err(Error::InvalidParams(format!("j = {j} exceeds n + l = {}", params.n + params.l)));
    }
    Ok(Evaluator::new(params).row(j))
}

/// Bound on the average total information leaked to the eavesdropper.
///
/// Fails with [`Error::NegativeKeyLength`] when some admissible count would
/// leave a negative key length.
pub fn theorem1_bound(params: &ProtocolParams) -> Result<BoundReport> {
    params.validate()?;
    params.check_key_lengths()?;
    Ok(Evaluator::new(params).report())
}

/// Bound on the average information per final key bit.
///
/// Same report as [`theorem1_bound`]; additionally requires a strictly
/// positive key length at `k_high`.
pub fn theorem5_bound(params: &ProtocolParams) -> Result<BoundReport> {
    params.validate()?;
    params.check_key_lengths()?;
    let margin = params.rate - params.sacrificed_fraction(params.k_high);
    if margin <= 0.0 {
        return Err(Error::NegativeKeyLength {
            k: params.k_high,
            margin,
        });
    }
    Ok(Evaluator::new(params).report())
}

/// Per-outcome bound at a realised check count and raw-key phase-error count.
///
/// This is the summand the total bound averages: `hbar(F) + len * F` with
/// `F = f(k', k_eff)` and `len` the key length at the effective count.
/// Counts above `k_high` discard the key and leak nothing.
pub fn outcome_bound(params: &ProtocolParams, check_errors: u64, key_errors: u64) -> Result<f64> {
    params.validate()?;
    if key_errors > params.n || check_errors > params.l {
        return Err(Error::InvalidParams(format!(
            "error counts out of range: key {key_errors} > n or check {check_errors} > l"
        )));
    }
    if check_errors > params.k_high {
        return Ok(0.0);
    }
    let (k_eff, k_prime) = if check_errors < params.k_low {
        let kp = match params.low_rule {
            LowCountRule::Displayed => (key_errors + check_errors) as i64 - params.k_low as i64,
            LowCountRule::Derived => key_errors as i64,
        };
        (params.k_low, kp)
    } else {
        (check_errors, key_errors as i64)
    };
    let len = params.key_length(k_eff);
    if len < 0.0 {
        return Err(Error::NegativeKeyLength {
            k: k_eff,
            margin: len / params.n as f64,
        });
    }
    let f = f_factor(k_prime, k_eff, params.n, params.l, params.slack.at(k_eff))?.value();
    Ok(clipped_entropy_bits(f) + len * f)
}

/// Distribution of the phase-error Hamming weight over `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseWeightDistribution {
    weights: Vec<f64>,
}

impl PhaseWeightDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParams("empty weight distribution".into()));
        }
        if let Some(&w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(domain("weight", w, ">= 0"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(domain("total weight", total, "1 within 1e-9"));
        }
        Ok(PhaseWeightDistribution { weights })
    }

    /// Point mass at weight `k` over `0..=n`.
    pub fn point_mass(n: usize, k: usize) -> Result<Self> {
        let mut w = vec![0.0; n + 1];
        *w.get_mut(k).ok_or_else(|| Error::InvalidParams(format!("k = {k} exceeds n = {n}")))? = 1.0;
        Ok(PhaseWeightDistribution { weights: w })
    }

    /// Binomial weights of an i.i.d. phase-flip channel.
    pub fn binomial(n: usize, p: Probability) -> Self {
        let weights = (0..=n)
            .map(|k| {
                let lw = crate::numerics::log2_binomial(n as u64, k as i64).log2()
                    + k as f64 * p.value().log2()
                    + (n - k) as f64 * (1.0 - p.value()).log2();
                if lw.is_nan() {
                    0.0
                } else {
                    lw.exp2()
                }
            })
            .collect();
        PhaseWeightDistribution { weights }
    }

    /// Block length `n`.
    pub fn len_n(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Known-channel bound `eta_{m-s}(sum_k P(k) g(2^{-s} | n, k))`.
pub fn theorem2_bound(m: u64, s: u64, phase_weights: &PhaseWeightDistribution) -> Result<f64> {
    let n = phase_weights.len_n() as u64;
    if s > m || m > n {
        return Err(Error::InvalidParams(format!("need s <= m <= n, got s = {s}, m = {m}, n = {n}")));
    }
    let x = (-(s as f64)).exp2();
    let arg: f64 = phase_weights
        .weights
        .iter()
        .enumerate()
        .map(|(k, &w)| w * g_factor(Probability::saturating(x), n, k as u64).map(|g| g.value()).unwrap_or(1.0))
        .sum();
    eta(m - s, arg)
}

/// Markov's inequality: an average bound `avg_bound` on the leaked
/// information guarantees `P(I >= eps2) <= avg_bound / eps2`.
pub fn probabilistic_guarantee(avg_bound: f64, eps2: f64) -> Result<Probability> {
    if !(avg_bound >= 0.0) {
        return Err(domain("average bound", avg_bound, ">= 0"));
    }
    if !(eps2 > 0.0) {
        return Err(domain("eps2", eps2, "> 0"));
    }
    Ok(Probability::saturating(avg_bound / eps2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn f_factor_examples() {
        assert_eq!(f_factor(6, 1, 10, 10, 0.0).unwrap().value(), 1.0);
        assert_abs_diff_eq!(f_factor(1, 2, 10, 10, 0.0).unwrap().value(), 0.173_219_708_057_309, epsilon = 1e-12);
        assert_eq!(f_factor(2, 1, 10, 10, 0.0).unwrap().value(), 1.0);
        assert_eq!(f_factor(-1, 1, 10, 10, 0.0).unwrap().value(), 0.0);
        assert!(f_factor(1, 9, 10, 10, 0.2).is_err());
    }

    #[test]
    fn params_validation() {
        let s = SlackSchedule::constant(0.01);
        assert!(ProtocolParams::new(10, 10, 0.5, 3, 2, s.clone()).is_err());
        assert!(ProtocolParams::new(10, 10, 0.5, 0, 5, s.clone()).is_err());
        assert!(ProtocolParams::new(10, 10, 0.0, 0, 2, s.clone()).is_err());
        assert!(ProtocolParams::new(10, 10, 0.5, 0, 11, s).is_err());
        let table = SlackSchedule::Table {
            first: 1,
            values: vec![0.1, 0.1],
        };
        assert!(ProtocolParams::new(10, 10, 0.5, 0, 2, table.clone()).is_err());
        assert!(ProtocolParams::new(10, 10, 0.5, 1, 2, table).is_ok());
    }

    #[test]
    fn negative_key_length_is_an_error() {
        let p = ProtocolParams::new(100, 100, 0.3, 10, 20, SlackSchedule::constant(0.05)).unwrap();
        assert!(matches!(theorem1_bound(&p), Err(Error::NegativeKeyLength { .. })));
    }

    #[test]
    fn zero_key_length_forces_linear_term_to_vanish() {
        // j = 9, n = l = 10: P(k <= 4) = 1/2 by symmetry and f(5, 4) = 1.
        let rate = entropy_bits(0.4);
        let p = ProtocolParams::new(10, 10, rate, 4, 4, SlackSchedule::constant(0.0)).unwrap();
        let r = theorem1_bound(&p).unwrap();
        assert_abs_diff_eq!(r.term2, 0.0, epsilon = 1e-12);
        assert_eq!(r.term1, 1.0);
        assert_eq!(r.total_bound, r.term1 + r.term2);
        assert!(theorem5_bound(&p).is_err());
    }

    #[test]
    fn full_mass_gives_unit_second_term() {
        let p = ProtocolParams::new(10, 4, 0.5, 0, 0, SlackSchedule::constant(0.0)).unwrap();
        let r = theorem5_bound(&p).unwrap();
        assert_abs_diff_eq!(r.mass_term, 1.0, epsilon = 1e-12);
        assert_eq!(r.argmax_j_mass, 0);
        assert_abs_diff_eq!(r.per_bit_bound.unwrap(), 1.0 / 5.0 + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_error_row_is_zero_under_displayed_rule() {
        let p = ProtocolParams::new(20, 10, 0.9, 3, 3, SlackSchedule::constant(0.01)).unwrap();
        let row = row_sums(&p, 0).unwrap();
        assert_eq!(row.mass, 0.0);
        assert_eq!(row.weighted, 0.0);
        let derived = p.clone().with_low_rule(LowCountRule::Derived);
        assert!(row_sums(&derived, 0).unwrap().mass > 0.0);
    }

    #[test]
    fn term1_is_hbar_of_max_mass() {
        let p = ProtocolParams::new(300, 120, 0.6, 5, 15, SlackSchedule::constant(0.02)).unwrap();
        let r = theorem1_bound(&p).unwrap();
        assert_abs_diff_eq!(r.term1, clipped_entropy_bits(r.mass_term), epsilon = 1e-12);
    }

    #[test]
    fn theorem2_examples() {
        let w = PhaseWeightDistribution::point_mass(8, 0).unwrap();
        for s in 0..4 {
            let expected = eta(5 - s, (-(s as f64)).exp2()).unwrap();
            assert_abs_diff_eq!(theorem2_bound(5, s, &w).unwrap(), expected, epsilon = 1e-12);
        }
        let w = PhaseWeightDistribution::new(vec![0.7, 0.2, 0.05, 0.05]).unwrap();
        // g(1/2|3,0) = 1/2; 3 h(1/3) - 1 > 0 clips g(1/2|3,1) to one; k > 1 is clipped.
        let arg = 0.7 * 0.5 + 0.2 + 0.05 + 0.05;
        assert_abs_diff_eq!(theorem2_bound(2, 1, &w).unwrap(), eta(1, arg).unwrap(), epsilon = 1e-12);
        assert!(theorem2_bound(4, 1, &w).is_err());
    }

    #[test]
    fn theorem2_nonincreasing_in_s() {
        let w = PhaseWeightDistribution::binomial(40, Probability::new(0.05).unwrap());
        let values: Vec<f64> = (0..=30).map(|s| theorem2_bound(30, s, &w).unwrap()).collect();
        assert!(values.windows(2).all(|v| v[1] <= v[0] + 1e-12));
    }

    #[test]
    fn theorem2_point_mass_argument_is_exponential() {
        // h(1/16) * 16 = 5.4 < s = 8
        let w = PhaseWeightDistribution::point_mass(16, 1).unwrap();
        let arg = (16.0 * entropy_bits(1.0 / 16.0) - 8.0).exp2();
        assert_abs_diff_eq!(theorem2_bound(12, 8, &w).unwrap(), eta(4, arg).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn markov_examples() {
        assert_eq!(probabilistic_guarantee(0.0, 0.1).unwrap().value(), 0.0);
        assert_abs_diff_eq!(probabilistic_guarantee(0.001, 0.1).unwrap().value(), 0.01, epsilon = 1e-15);
        assert_eq!(probabilistic_guarantee(5.0, 0.1).unwrap().value(), 1.0);
        assert!(probabilistic_guarantee(1.0, 0.0).is_err());
    }

    #[test]
    fn outcome_bound_branches() {
        let p = ProtocolParams::new(200, 100, 0.8, 2, 10, SlackSchedule::constant(0.02)).unwrap();
        assert_eq!(outcome_bound(&p, 11, 5).unwrap(), 0.0);
        // boundary count at k_low uses the k_low branch directly
        let f = f_factor(4, 2, 200, 100, 0.02).unwrap().value();
        assert_abs_diff_eq!(
            outcome_bound(&p, 2, 4).unwrap(),
            clipped_entropy_bits(f) + p.key_length(2) * f,
            epsilon = 1e-12
        );
        // replaced count under the displayed rule shifts k'
        let f = f_factor(3, 2, 200, 100, 0.02).unwrap().value();
        assert_abs_diff_eq!(
            outcome_bound(&p, 1, 4).unwrap(),
            clipped_entropy_bits(f) + p.key_length(2) * f,
            epsilon = 1e-12
        );
    }
}
