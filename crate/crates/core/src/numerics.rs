//! Scalar special functions and log-domain combinatorics.
//!
//! Everything here is a pure function. Binomial and hypergeometric masses are
//! carried as base-2 logarithms ([`LogWeight`]) because the bounds are
//! evaluated at block lengths of order 10^4 to 10^5, where direct factorials
//! overflow long before the ratios of interest become small.

use std::f64::consts::{LN_2, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma;

use crate::error::{domain, Result};

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);
    pub const HALF: Probability = Probability(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(domain("probability", value, "[0, 1]"))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to zero.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            Probability(0.0)
        } else {
            Probability(value.clamp(0.0, 1.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = crate::Error;
    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A nonnegative weight stored as its base-2 logarithm.
///
/// Negative infinity encodes the zero weight, so products and sums of
/// out-of-support terms need no special casing.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogWeight {
    log2_value: f64,
}

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight {
        log2_value: f64::NEG_INFINITY,
    };
    pub const ONE: LogWeight = LogWeight { log2_value: 0.0 };

    pub fn from_log2(log2_value: f64) -> Self {
        LogWeight { log2_value }
    }

    pub fn from_value(value: f64) -> Self {
        debug_assert!(value >= 0.0);
        LogWeight {
            log2_value: value.log2(),
        }
    }

    #[inline]
    pub fn log2(self) -> f64 {
        self.log2_value
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.log2_value.exp2()
    }

    pub fn is_zero(self) -> bool {
        self.log2_value == f64::NEG_INFINITY
    }

    /// Log-sum-exp in base 2.
    pub fn add(self, other: LogWeight) -> LogWeight {
        let (hi, lo) = if self.log2_value >= other.log2_value {
            (self.log2_value, other.log2_value)
        } else {
            (other.log2_value, self.log2_value)
        };
        if hi == f64::NEG_INFINITY {
            return LogWeight::ZERO;
        }
        LogWeight {
            log2_value: hi + ((lo - hi).exp2()).ln_1p() / LN_2,
        }
    }
}

impl std::ops::Mul for LogWeight {
    type Output = LogWeight;
    fn mul(self, rhs: LogWeight) -> LogWeight {
        LogWeight {
            log2_value: self.log2_value + rhs.log2_value,
        }
    }
}

impl std::ops::Div for LogWeight {
    type Output = LogWeight;
    fn div(self, rhs: LogWeight) -> LogWeight {
        LogWeight {
            log2_value: self.log2_value - rhs.log2_value,
        }
    }
}

impl std::iter::Sum for LogWeight {
    fn sum<I: Iterator<Item = LogWeight>>(iter: I) -> LogWeight {
        iter.fold(LogWeight::ZERO, LogWeight::add)
    }
}

/// Binary entropy `-p log2 p - (1-p) log2 (1-p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: Probability) -> f64 {
    entropy_bits(p.value())
}

/// Unchecked binary entropy for callers that already validated `0 <= p <= 1`.
///
/// The smaller of `p` and `1-p` is used as the primary variable so that the
/// two mirrored inputs go through the same arithmetic.
#[inline]
pub(crate) fn entropy_bits(p: f64) -> f64 {
    let a = if p <= 0.5 { p } else { 1.0 - p };
    if a <= 0.0 {
        return 0.0;
    }
    -(a * a.log2()) - (1.0 - a) * (-a).ln_1p() / LN_2
}

/// `h(x)` below one half and exactly `1` from one half on.
///
/// Arguments above one are legal: several bounds feed unnormalised masses
/// through this function.
pub fn clipped_entropy(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain("x", x, "x >= 0"));
    }
    Ok(clipped_entropy_bits(x))
}

#[inline]
pub(crate) fn clipped_entropy_bits(x: f64) -> f64 {
    if x >= 0.5 {
        1.0
    } else {
        entropy_bits(x.max(0.0))
    }
}

/// `eta_k(x) = hbar(x) + k x`.
pub fn eta(k: u64, x: f64) -> Result<f64> {
    Ok(clipped_entropy(x)? + k as f64 * x)
}

/// Kullback-Leibler divergence between Bernoulli(p) and Bernoulli(q), in bits.
pub fn kl_bernoulli(p: Probability, q: Probability) -> Result<f64> {
    let (p, q) = (p.value(), q.value());
    let term = |a: f64, b: f64| -> Result<f64> {
        if a == 0.0 {
            Ok(0.0)
        } else if b == 0.0 {
            Err(domain("q", q, "0 < q < 1 unless p = q"))
        } else {
            Ok(a * (a / b).log2())
        }
    };
    Ok((term(p, q)? + term(1.0 - p, 1.0 - q)?).max(0.0))
}

/// `log2 C(n, k)` via log-gamma; the zero weight outside `0 <= k <= n`.
pub fn log2_binomial(n: u64, k: i64) -> LogWeight {
    if k < 0 || k as u64 > n {
        return LogWeight::ZERO;
    }
    let k = k as u64;
    if k == 0 || k == n {
        return LogWeight::ONE;
    }
    let ln = gamma::ln_gamma(n as f64 + 1.0)
        - gamma::ln_gamma(k as f64 + 1.0)
        - gamma::ln_gamma((n - k) as f64 + 1.0);
    LogWeight::from_log2(ln / LN_2)
}

/// Hypergeometric mass `C(l,k) C(n,j-k) / C(n+l,j)`: the number of errors
/// that land in `l` check positions when `j` errors are spread uniformly
/// over `n + l` positions.
pub fn hypergeom_pmf(k: i64, n: u64, l: u64, j: u64) -> Result<Probability> {
    if j > n + l {
        return Err(crate::Error::InvalidParams(format!(
            "hypergeometric draw count j = {j} exceeds population n + l = {}",
            n + l
        )));
    }
    if n + l <= SMALL_POPULATION && k >= 0 && k as u64 <= l.min(j) && j - (k as u64) <= n {
        let k = k as u64;
        let num = small_binomial(l, k) * small_binomial(n, j - k);
        return Ok(Probability::saturating(num as f64 / small_binomial(n + l, j) as f64));
    }
    Ok(Probability::saturating(hypergeom_ln(k, n, l, j).exp()))
}

/// Populations small enough that every binomial fits in a `u128`.
const SMALL_POPULATION: u64 = 120;

fn small_binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `ln(m!) - (m + 1/2) ln m + m - ln sqrt(2 pi)` for `1 <= m <= 15`.
const STIRLING_ERROR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

/// Error of Stirling's formula for `ln(m!)`.
fn stirling_error(m: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if m < 16 {
        return STIRLING_ERROR[m as usize];
    }
    let x = m as f64;
    let xx = x * x;
    if m > 500 {
        (S0 - S1 / xx) / x
    } else if m > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if m > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance `x ln(x / np) + np - x`, evaluated without cancellation when
/// `x` is close to `np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let v2 = v * v;
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        for j in 1.. {
            ej *= v2;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        unreachable!()
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Natural log of the binomial mass `C(m, x) p^x q^(m - x)` with `q = 1 - p`
/// given separately to avoid rounding.
fn ln_binomial_mass(x: u64, m: u64, p: f64, q: f64) -> f64 {
    if x > m {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == m { 0.0 } else { f64::NEG_INFINITY };
    }
    let mf = m as f64;
    if x == 0 {
        if m == 0 {
            return 0.0;
        }
        return if p < 0.1 { -deviance(mf, mf * q) - mf * p } else { mf * q.ln() };
    }
    if x == m {
        return if q < 0.1 { -deviance(mf, mf * p) - mf * q } else { mf * p.ln() };
    }
    let xf = x as f64;
    let lc = stirling_error(m) - stirling_error(x) - stirling_error(m - x) - deviance(xf, mf * p) - deviance(mf - xf, mf * q);
    let lf = (2.0 * std::f64::consts::PI).ln() + xf.ln() + (-xf / mf).ln_1p();
    lc - 0.5 * lf
}

/// Natural log of the hypergeometric mass, as a ratio of three binomial
/// masses at the common success rate `j / (n + l)` (Loader's saddle-point
/// form), accurate to a few ulps in relative terms.
pub(crate) fn hypergeom_ln(k: i64, n: u64, l: u64, j: u64) -> f64 {
    if k < 0 || k as u64 > l || k as u64 > j || j - k as u64 > n {
        return f64::NEG_INFINITY;
    }
    let k = k as u64;
    let total = n + l;
    let p = j as f64 / total as f64;
    let q = (total - j) as f64 / total as f64;
    ln_binomial_mass(k, l, p, q) + ln_binomial_mass(j - k, n, p, q) - ln_binomial_mass(j, total, p, q)
}

/// `ln P_hg(k | n, l, j)` for `k = k_from..=k_to`, anchored once and then
/// advanced with the ratio of consecutive masses.
pub(crate) fn hypergeom_ln_range(n: u64, l: u64, j: u64, k_from: u64, k_to: u64) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; (k_to + 1).saturating_sub(k_from) as usize];
    let lo = k_from.max(j.saturating_sub(n));
    let hi = k_to.min(l).min(j);
    if lo > hi {
        return out;
    }
    let mut cur = hypergeom_ln(lo as i64, n, l, j);
    out[(lo - k_from) as usize] = cur;
    for k in lo..hi {
        let num = ((l - k) * (j - k)) as f64;
        let den = ((k + 1) * (n + k + 1 - j)) as f64;
        cur += (num / den).ln();
        out[(k + 1 - k_from) as usize] = cur;
    }
    out
}

/// Standard normal distribution function.
pub fn gauss_cdf(x: f64) -> Probability {
    Probability::saturating(0.5 * libm::erfc(-x / SQRT_2))
}

fn gauss_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`gauss_cdf`] on `(0, 1)`.
///
/// Wichura's AS241 rational approximation followed by one Newton step on
/// `gauss_cdf`.
pub fn gauss_quantile(eps: Probability) -> Result<f64> {
    let p = eps.value();
    if p <= 0.0 || p >= 1.0 {
        return Err(domain("eps", p, "0 < eps < 1"));
    }
    let x = as241(p);
    let pdf = gauss_pdf(x);
    if pdf > 0.0 {
        Ok(x - (gauss_cdf(x).value() - p) / pdf)
    } else {
        Ok(x)
    }
}

fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn as241(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_6,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_4e3,
        1.373_169_376_550_946_1e4,
        4.592_195_393_154_987_1e4,
        6.726_577_092_700_870_1e4,
        3.343_057_558_358_812_8e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_1e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_854_5e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_545_3,
        5.769_497_221_460_691,
        3.647_848_324_763_204_6,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_8,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_8e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_049e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_7e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_8e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}
