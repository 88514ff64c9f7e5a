//! Asymptotic approximations of the finite-length bounds.
//!
//! Two regimes are covered. In the normal regime the slack shrinks like
//! `1/sqrt(n + l)` and the per-bit bound tends to a Gaussian tail
//! probability; [`table_statistic`] and [`solve_delta`] convert between the
//! slack and that tail. In the large-deviation regime the slack is a fixed
//! function `eps(p)` of the error rate and the bound decays as
//! `2^{-(n + l) E}` with the exponent computed by [`exponent`].

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{clipped_entropy_bits, entropy_bits, gauss_cdf, gauss_quantile, Probability};
use crate::secbounds::{theorem1_bound, ProtocolParams, SlackSchedule};

const GRID_POINTS: usize = 1024;
const REFINE_TOL: f64 = 1e-9;
const GOLDEN_MAX_ITER: usize = 200;

/// Ratio, error-rate range and slack function of an asymptotic family.
#[derive(Clone)]
pub struct AsymptoticConfig {
    /// `n / (n + l)`.
    pub r: f64,
    pub p_low: f64,
    pub p_high: f64,
    slack: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl AsymptoticConfig {
    pub fn new(
        r: f64,
        p_low: Probability,
        p_high: Probability,
        slack: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(domain("r", r, "0 < r < 1"));
        }
        let (p_low, p_high) = (p_low.value(), p_high.value());
        if p_low > p_high || p_high >= 0.5 {
            return Err(Error::InvalidParams(format!(
                "need p_low <= p_high < 1/2, got {p_low} and {p_high}"
            )));
        }
        let cfg = AsymptoticConfig {
            r,
            p_low,
            p_high,
            slack: Arc::new(slack),
        };
        for p in cfg.grid() {
            let e = cfg.slack_at(p);
            if !(e.is_finite() && e >= 0.0) {
                return Err(domain("slack", e, "finite and >= 0 on [p_low, p_high]"));
            }
        }
        Ok(cfg)
    }

    /// Constant slack `eps` on the whole range.
    pub fn constant(r: f64, p_low: Probability, p_high: Probability, eps: f64) -> Result<Self> {
        Self::new(r, p_low, p_high, move |_| eps)
    }

    /// The ratio `n / (n + l)` of the given sizes.
    pub fn ratio(n: u64, l: u64) -> f64 {
        n as f64 / (n + l) as f64
    }

    pub fn slack_at(&self, p: f64) -> f64 {
        (self.slack)(p)
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        let (a, b) = (self.p_low, self.p_high);
        let points = if b > a { GRID_POINTS } else { 1 };
        (0..points).map(move |i| if points == 1 { a } else { a + (b - a) * i as f64 / (points - 1) as f64 })
    }
}

impl fmt::Debug for AsymptoticConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AsymptoticConfig")
            .field("r", &self.r)
            .field("p_low", &self.p_low)
            .field("p_high", &self.p_high)
            .finish_non_exhaustive()
    }
}

/// Golden-section minimisation of a unimodal `f` on `[a, b]`.
fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_MAX_ITER {
        if b - a <= REFINE_TOL {
            let x = (a + b) / 2.0;
            return Ok((x, f(x)));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NonConvergence(format!("golden section stalled on [{a}, {b}]")))
}

/// Grid pass followed by golden-section refinement around the best point.
/// Never returns a value worse than the best grid point.
fn minimize(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if b <= a {
        return Ok((a, f(a)));
    }
    let step = (b - a) / (GRID_POINTS - 1) as f64;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..GRID_POINTS {
        let v = f(a + step * i as f64);
        if v.is_nan() {
            return Err(Error::NonConvergence(format!("objective is NaN at {}", a + step * i as f64)));
        }
        if v < best {
            best_i = i;
            best = v;
        }
    }
    let lo = a + step * best_i.saturating_sub(1) as f64;
    let hi = (a + step * (best_i + 1) as f64).min(b);
    let (x, v) = golden_section(f, lo, hi)?;
    if v <= best {
        Ok((x, v))
    } else {
        Ok((a + step * best_i as f64, best))
    }
}

/// Limit of the per-bit bound in the normal regime:
/// `max_p Phi(-sqrt(r (1 - r)) eps(p) / sqrt(p (1 - p)))`.
///
/// The slack function here is the rescaled `eps(p) = delta sqrt(n + l)`.
pub fn normal_limit(cfg: &AsymptoticConfig) -> Result<Probability> {
    let rr = (cfg.r * (1.0 - cfg.r)).sqrt();
    let neg_level = |p: f64| {
        let sd = (p * (1.0 - p)).sqrt();
        let eps = cfg.slack_at(p);
        let z = if eps == 0.0 { 0.0 } else { -rr * eps / sd };
        -gauss_cdf(z).value()
    };
    let (_, v) = minimize(&neg_level, cfg.p_low, cfg.p_high)?;
    Ok(Probability::saturating(-v))
}

/// The normal-regime statistic `-sqrt(n l / (n + l)) delta / sqrt(q (1 - q))`
/// with `q = k / l`.
pub fn table_statistic(n: u64, l: u64, k: u64, delta: f64) -> Result<f64> {
    let q = check_rate(n, l, k)?;
    let scale = (n as f64 * l as f64 / (n + l) as f64).sqrt();
    Ok(-scale * delta / (q * (1.0 - q)).sqrt())
}

/// Slack at count `k` for which the normal-regime level equals `target`:
/// `delta_k = -sqrt((n + l) / (n l)) sqrt(q (1 - q)) Phi^{-1}(target)`.
pub fn solve_delta(n: u64, l: u64, k: u64, target: Probability) -> Result<f64> {
    let q = check_rate(n, l, k)?;
    let t = target.value();
    if !(t > 0.0 && t <= 0.5) {
        return Err(domain("target level", t, "0 < eps <= 1/2"));
    }
    if t == 0.5 {
        return Ok(0.0);
    }
    let scale = ((n + l) as f64 / (n as f64 * l as f64)).sqrt();
    Ok(-scale * (q * (1.0 - q)).sqrt() * gauss_quantile(target)?)
}

fn check_rate(n: u64, l: u64, k: u64) -> Result<f64> {
    if n == 0 || l == 0 || k == 0 || k >= l {
        return Err(Error::InvalidParams(format!("need n > 0 and 0 < k < l (n = {n}, l = {l}, k = {k})")));
    }
    Ok(k as f64 / l as f64)
}

/// One row of the normal-regime security table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub n: u64,
    pub l: u64,
    pub k: u64,
    pub delta: f64,
    pub statistic: f64,
    pub level: f64,
}

/// Raw-key length of the published table.
pub const TABLE_N: u64 = 10_000;
/// Observed error rate `k / l` of the published table.
pub const TABLE_ERROR_RATE: f64 = 0.075;
pub const TABLE_DELTA: f64 = 0.01;
pub const TABLE_CHECK_SIZES: [u64; 6] = [1_000, 10_000, 20_000, 30_000, 40_000, 50_000];
/// The row whose printed statistic (-4.00) disagrees with its own level.
pub const TABLE_ERRATUM_L: u64 = 40_000;

/// The published table at its default parameters.
pub fn default_security_table() -> Result<Vec<TableRow>> {
    security_table(TABLE_N, TABLE_ERROR_RATE, TABLE_DELTA, &TABLE_CHECK_SIZES)
}

/// Statistic and Gaussian level for every check size in `ls`, with
/// `k = round(error_rate * l)`.
pub fn security_table(n: u64, error_rate: f64, delta: f64, ls: &[u64]) -> Result<Vec<TableRow>> {
    ls.iter()
        .map(|&l| {
            let k = (error_rate * l as f64).round() as u64;
            let statistic = table_statistic(n, l, k, delta)?;
            Ok(TableRow {
                n,
                l,
                k,
                delta,
                statistic,
                level: gauss_cdf(statistic).value(),
            })
        })
        .collect()
}

fn exponent_objective(r: f64, p: f64, eps: f64, eps_prime: f64) -> f64 {
    let d = eps - eps_prime;
    entropy_bits(p + r * d) - (1.0 - r) * entropy_bits(p) - 2.0 * r * entropy_bits(p + d) + r * entropy_bits(p + eps)
}

/// Value and minimising `eps'` of the inner minimisation at rate `p`.
pub fn exponent_at(cfg: &AsymptoticConfig, p: f64) -> Result<(f64, f64)> {
    let eps = cfg.slack_at(p);
    if p + eps >= 0.5 {
        return Err(domain("p + eps(p)", p + eps, "< 1/2"));
    }
    let obj = |e: f64| exponent_objective(cfg.r, p, eps, e);
    let (arg, v) = minimize(&obj, 0.0, eps)?;
    Ok((v, arg))
}

/// The large-deviation exponent
/// `E = min_{p, 0 <= eps' <= eps(p)} [h(p + r(eps - eps')) - (1 - r) h(p)
///      - 2r h(p + eps - eps') + r h(p + eps)]`.
pub fn exponent(cfg: &AsymptoticConfig) -> Result<f64> {
    for p in cfg.grid() {
        let eps = cfg.slack_at(p);
        if p + eps >= 0.5 {
            return Err(domain("p + eps(p)", p + eps, "< 1/2"));
        }
    }
    let outer = |p: f64| exponent_at(cfg, p).map(|(v, _)| v).unwrap_or(f64::NAN);
    let (_, v) = minimize(&outer, cfg.p_low, cfg.p_high)?;
    if !v.is_finite() {
        return Err(Error::NonConvergence(format!("exponent evaluated to {v}")));
    }
    Ok(v.max(0.0))
}

/// Upper bound for a family with exponent `e`:
/// `A n (R - h(p_low + delta)) + hbar(A)` with
/// `A = k_high (n + l + 1) 2^{-(n + l) e}`.
pub fn large_deviation_bound(params: &ProtocolParams, cfg: &AsymptoticConfig, e: f64) -> Result<f64> {
    params.validate()?;
    if !(e >= 0.0) {
        return Err(domain("exponent", e, ">= 0"));
    }
    let ratio = AsymptoticConfig::ratio(params.n, params.l);
    if (ratio - cfg.r).abs() > 1e-6 {
        return Err(Error::InvalidParams(format!(
            "sizes give r = {ratio}, configuration has r = {}",
            cfg.r
        )));
    }
    let len = params.key_length(params.k_low);
    if !(len > 0.0) {
        return Err(Error::NegativeKeyLength {
            k: params.k_low,
            margin: len / params.n as f64,
        });
    }
    if params.k_high == 0 {
        return Ok(0.0);
    }
    let log2_a = (params.k_high as f64).log2() + ((params.n + params.l + 1) as f64).log2() - (params.n + params.l) as f64 * e;
    let a = log2_a.exp2();
    Ok(a * len + clipped_entropy_bits(a))
}

/// `(-r / n) log2` of the total bound for each member of a growing family.
pub fn exponent_convergence_check(family: &[ProtocolParams], cfg: &AsymptoticConfig) -> Result<Vec<f64>> {
    family
        .iter()
        .map(|params| {
            let report = theorem1_bound(params)?;
            Ok(-cfg.r / params.n as f64 * report.total_bound.log2())
        })
        .collect()
}

/// Slack `eps(p)` that keeps the approximate exponent
/// `r (1 - r) eps^2 / (ln 2 (p + r eps)(1 - p - r eps))` equal to `e`.
pub fn epsilon_for_exponent(e: f64, r: f64, p: Probability) -> Result<f64> {
    if !(e >= 0.0) {
        return Err(domain("exponent", e, ">= 0"));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(domain("r", r, "0 < r < 1"));
    }
    let p = p.value();
    if !(p > 0.0 && p < 0.5) {
        return Err(domain("p", p, "0 < p < 1/2"));
    }
    let le = std::f64::consts::LN_2 * e;
    let denom = 2.0 * (r * (1.0 - r) + le * r * r);
    let disc = le * le * r * r + 4.0 * p * (1.0 - p) * r * (1.0 - r) * le;
    Ok((le * r * (1.0 - 2.0 * p) + disc.sqrt()) / denom)
}

/// The quadratic approximation of the exponent that [`epsilon_for_exponent`] inverts.
pub fn approximate_exponent(eps: f64, r: f64, p: f64) -> f64 {
    let q = p + r * eps;
    r * (1.0 - r) * eps * eps / (std::f64::consts::LN_2 * q * (1.0 - q))
}

/// The earlier bound `hbar(2(n/2+1)^2 err + 4(n+1)^2 e^{-eps^2 n/4})
/// + 4n(n/2+1)^2 err + 8n(n+1)^2 e^{-eps^2 n/4}` it is compared against.
pub fn watanabe_bound(n: u64, eps_p: f64, err_prob: Probability) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    if !(eps_p > 0.0) {
        return Err(domain("eps_p", eps_p, "> 0"));
    }
    let nf = n as f64;
    let err = err_prob.value();
    let half = (nf / 2.0 + 1.0).powi(2);
    let full = (nf + 1.0).powi(2);
    let decay = (-eps_p * eps_p * nf / 4.0).exp();
    let arg = 2.0 * half * err + 4.0 * full * decay;
    Ok(clipped_entropy_bits(arg) + 4.0 * nf * half * err + 8.0 * nf * full * decay)
}

/// Both bounds for a family with `l = n`, `k = round(p n)`, slack `eps` and
/// the exponent that slack attains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub n: u64,
    pub p: f64,
    pub eps: f64,
    pub exponent: f64,
    pub large_deviation: f64,
    pub watanabe: f64,
}

pub fn compare_with_watanabe(n: u64, p: Probability, eps: f64, rate: f64) -> Result<Comparison> {
    let cfg = AsymptoticConfig::constant(0.5, p, p, eps)?;
    let e = exponent(&cfg)?;
    let k = (p.value() * n as f64).round() as u64;
    let params = ProtocolParams::new(n, n, rate, k, k, SlackSchedule::constant(eps))?;
    Ok(Comparison {
        n,
        p: p.value(),
        eps,
        exponent: e,
        large_deviation: large_deviation_bound(&params, &cfg, e)?,
        watanabe: watanabe_bound(n, eps, Probability::ZERO)?,
    })
}
