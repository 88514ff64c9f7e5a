//! Exact small-scale audits of the inequalities the bounds rest on.
//!
//! * Phase-error bound: for a channel acting on bit/phase flip pairs
//!   `(x, z)` with joint law `P(x, z)`, the eavesdropper's information on a
//!   uniformly chosen input is `sum_x P_X(x) H(P_{Z|X}(.|x))`, which is at
//!   most `H(P_Z)` and at most `eta_n(1 - P_Z(0))`.
//! * Entropy bound: `H(P) <= h(1 - P(0)) + log2(d - 1) (1 - P(0))`.
//! * Random extension: a uniformly random `C_2 ⊇ C_1` with
//!   `dim C_2 = t + s` has average decoding error at most
//!   `sum_k P_W(k) g(2^{s + t - n} | n, k)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gf2::{exact_error_probability, g_factor, sample_extension, AdditiveChannel, BinaryCode, BitMatrix, BitVec};
use crate::numerics::{entropy_bits, eta, Probability};

/// Largest qubit count for a [`PauliDistribution`] (a `4^n` table).
pub const PAULI_LIMIT: usize = 12;
/// Largest length for enumerating every extension exactly.
pub const ENSEMBLE_LENGTH_LIMIT: usize = 6;
/// Largest extension ensemble enumerated exactly.
pub const ENSEMBLE_SIZE_LIMIT: u128 = 10_000;

/// Joint law of bit-flip and phase-flip patterns on `n` qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliDistribution {
    n: usize,
    /// Indexed by `x * 2^n + z` with bit-string indices.
    joint: Vec<f64>,
}

/// Marginals of a [`PauliDistribution`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginals {
    pub bit: Vec<f64>,
    pub phase: Vec<f64>,
    /// Phase-error weight distribution over `0..=n`.
    pub phase_weight: Vec<f64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > PAULI_LIMIT {
        return Err(Error::SizeGuard {
            what: "qubit count",
            value: n,
            limit: PAULI_LIMIT,
        });
    }
    Ok(())
}

fn shannon(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&q| q > 0.0).map(|q| -q * q.log2()).sum()
}

impl PauliDistribution {
    pub fn new(n: usize, joint: Vec<f64>) -> Result<Self> {
        check_qubits(n)?;
        if joint.len() != 1 << (2 * n) {
            return Err(Error::Dimension(format!("{} entries for 4^{n} flip pairs", joint.len())));
        }
        if let Some(&p) = joint.iter().find(|p| !(**p >= 0.0)) {
            return Err(domain("probability", p, ">= 0"));
        }
        let total: f64 = joint.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain("total probability", total, "1 within 1e-12"));
        }
        Ok(PauliDistribution { n, joint })
    }

    pub fn point_mass(x: &BitVec, z: &BitVec) -> Result<Self> {
        let n = x.len();
        check_qubits(n)?;
        if z.len() != n {
            return Err(Error::Dimension("flip patterns of different lengths".into()));
        }
        let mut joint = vec![0.0; 1 << (2 * n)];
        joint[((x.to_index() << n) | z.to_index()) as usize] = 1.0;
        Ok(PauliDistribution { n, joint })
    }

    /// Random table; a random subset of entries is zeroed so that sparse
    /// and structured laws are exercised too.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        check_qubits(n)?;
        let keep = rng.random_range(0.2..=1.0);
        let len = 1usize << (2 * n);
        let mut raw: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(keep) {
                    -(1.0 - rng.random::<f64>()).ln()
                } else {
                    0.0
                }
            })
            .collect();
        if raw.iter().all(|&w| w == 0.0) {
            raw[rng.random_range(0..len)] = 1.0;
        }
        let total: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|w| *w /= total);
        Ok(PauliDistribution { n, joint: raw })
    }

    /// Law of independent flips on the qubits of `self` followed by those of `other`.
    pub fn product(&self, other: &PauliDistribution) -> Result<Self> {
        let (a, b) = (self.n, other.n);
        check_qubits(a + b)?;
        let mut joint = vec![0.0; 1 << (2 * (a + b))];
        for (i, &p) in self.joint.iter().enumerate() {
            let (x1, z1) = (i >> a, i & ((1 << a) - 1));
            for (j, &q) in other.joint.iter().enumerate() {
                let (x2, z2) = (j >> b, j & ((1 << b) - 1));
                let x = (x1 << b) | x2;
                let z = (z1 << b) | z2;
                joint[(x << (a + b)) | z] += p * q;
            }
        }
        Ok(PauliDistribution { n: a + b, joint })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn prob(&self, x: &BitVec, z: &BitVec) -> f64 {
        self.joint[((x.to_index() << self.n) | z.to_index()) as usize]
    }

    pub fn marginals(&self) -> Marginals {
        let size = 1usize << self.n;
        let mut bit = vec![0.0; size];
        let mut phase = vec![0.0; size];
        for x in 0..size {
            for z in 0..size {
                let p = self.joint[x * size + z];
                bit[x] += p;
                phase[z] += p;
            }
        }
        let mut phase_weight = vec![0.0; self.n + 1];
        for (z, &p) in phase.iter().enumerate() {
            phase_weight[z.count_ones() as usize] += p;
        }
        Marginals {
            bit,
            phase,
            phase_weight,
        }
    }

    /// `H(P_Z)`.
    pub fn phase_entropy(&self) -> f64 {
        shannon(self.marginals().phase)
    }
}

/// `sum_x P_X(x) H(P_{Z|X}(.|x))`.
pub fn lemma1_eve_information(p: &PauliDistribution) -> f64 {
    let size = 1usize << p.n;
    (0..size)
        .map(|x| {
            let row = &p.joint[x * size..(x + 1) * size];
            let px: f64 = row.iter().sum();
            if px == 0.0 {
                0.0
            } else {
                px * shannon(row.iter().map(|&q| q / px))
            }
        })
        .sum()
}

/// `eta_n(1 - P_Z(0))`.
pub fn lemma1_bound(p: &PauliDistribution) -> f64 {
    let m = p.marginals();
    eta(p.n as u64, (1.0 - m.phase[0]).max(0.0)).expect("argument is nonnegative")
}

/// Both sides of `H(P) <= h(1 - P(0)) + log2(d - 1) (1 - P(0))`.
pub fn lemma7_check(p: &[f64]) -> Result<(f64, f64)> {
    if p.len() < 2 {
        return Err(Error::InvalidParams(format!("need at least two outcomes, got {}", p.len())));
    }
    if let Some(&q) = p.iter().find(|q| !(**q >= 0.0)) {
        return Err(domain("probability", q, ">= 0"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(domain("total probability", total, "1 within 1e-9"));
    }
    let tail = (1.0 - p[0]).clamp(0.0, 1.0);
    let bound = entropy_bits(tail) + ((p.len() - 1) as f64).log2() * tail;
    Ok((shannon(p.iter().copied()), bound))
}

/// Outcome of [`lemma2_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Audit {
    /// Average decoding error over the ensemble (exact) or the samples.
    pub average_error: f64,
    pub bound: f64,
    /// Whether every extension was enumerated.
    pub exhaustive: bool,
    /// Extensions enumerated or sampled.
    pub codes: u64,
    /// Standard error of the sampled mean; zero when exhaustive.
    pub std_error: f64,
    pub passed: bool,
}

/// `sum_k P_W(k) g(2^{s + t - n} | n, k)`.
pub fn lemma2_bound(w: &AdditiveChannel, t: usize, s: usize) -> Result<f64> {
    let n = w.len();
    let x = Probability::saturating(((s + t) as f64 - n as f64).exp2());
    w.weight_distribution()
        .iter()
        .enumerate()
        .map(|(k, &pk)| Ok(pk * g_factor(x, n as u64, k as u64)?.value()))
        .sum()
}

/// Number of `(t + s)`-dimensional extensions of a `t`-dimensional code in
/// `F_2^n`: the Gaussian binomial `[n - t, s]_2`.
pub fn extension_count(n: usize, t: usize, s: usize) -> u128 {
    let m = n - t;
    if s > m {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..s {
        num = num.saturating_mul((1u128 << (m - i)) - 1);
        den = den.saturating_mul((1u128 << (i + 1)) - 1);
    }
    num / den
}

/// Every code `C_2 ⊇ C_1` with `dim C_2 = dim C_1 + s`.
///
/// Extensions correspond one to one with `s`-dimensional subspaces of the
/// complement spanned by unit vectors at the non-pivot columns of `C_1`;
/// those are listed through their reduced echelon forms.
pub fn all_extensions(c1: &BinaryCode, s: usize) -> Result<Vec<BinaryCode>> {
    let n = c1.len();
    let t = c1.dim();
    if t + s > n {
        return Err(Error::Dimension(format!("cannot extend dimension {t} by {s} in F_2^{n}")));
    }
    let count = extension_count(n, t, s);
    if n > ENSEMBLE_LENGTH_LIMIT || count > ENSEMBLE_SIZE_LIMIT {
        return Err(Error::SizeGuard {
            what: "extension ensemble",
            value: count.min(usize::MAX as u128) as usize,
            limit: ENSEMBLE_SIZE_LIMIT as usize,
        });
    }
    let pivots: Vec<usize> = {
        let e = c1.generator().rref();
        e.pivots
    };
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let m = free.len();
    let mut out = Vec::with_capacity(count as usize);
    for_each_subset(m, s, |piv| {
        // Free entries: column c > pivot of row i and c not a pivot.
        let slots: Vec<(usize, usize)> = piv
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| ((p + 1)..m).filter(|c| !piv.contains(c)).map(move |c| (i, c)))
            .collect();
        for fill in 0..1u64 << slots.len() {
            let mut rows: Vec<BitVec> = piv.iter().map(|&p| BitVec::unit(n, free[p])).collect();
            for (b, &(i, c)) in slots.iter().enumerate() {
                if fill >> b & 1 == 1 {
                    rows[i].set(free[c], true);
                }
            }
            let mut all = c1.generator().rows().to_vec();
            all.extend(rows);
            out.push(BinaryCode::new(BitMatrix::from_rows(n, all).expect("lengths match")).expect("independent"));
        }
    });
    Ok(out)
}

fn for_each_subset(m: usize, s: usize, mut f: impl FnMut(&[usize])) {
    fn rec(cur: &mut Vec<usize>, start: usize, m: usize, s: usize, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == s {
            f(cur);
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(cur, i + 1, m, s, f);
            cur.pop();
        }
    }
    rec(&mut Vec::new(), 0, m, s, &mut f);
}

/// Audits the random-extension error bound.
///
/// When the ensemble is small enough it is enumerated and the exact
/// average must not exceed the bound; otherwise `trials` extensions are
/// sampled and the mean may exceed the bound by at most four standard
/// errors.
pub fn lemma2_oracle<R: Rng + ?Sized>(
    c1: &BinaryCode,
    sub_add_dim: usize,
    w: &AdditiveChannel,
    trials: usize,
    rng: &mut R,
) -> Result<Lemma2Audit> {
    let n = c1.len();
    if w.len() != n {
        return Err(Error::Dimension(format!("channel length {} against code length {n}", w.len())));
    }
    if n > PAULI_LIMIT {
        return Err(Error::SizeGuard {
            what: "block length",
            value: n,
            limit: PAULI_LIMIT,
        });
    }
    let t = c1.dim();
    let bound = lemma2_bound(w, t, sub_add_dim)?;
    let count = extension_count(n, t, sub_add_dim);
    if n <= ENSEMBLE_LENGTH_LIMIT && count <= ENSEMBLE_SIZE_LIMIT {
        let codes = all_extensions(c1, sub_add_dim)?;
        let errors = codes
            .par_iter()
            .map(|c2| exact_error_probability(w, c1, c2).map(|p| p.value()))
            .collect::<Result<Vec<_>>>()?;
        let average_error = errors.iter().sum::<f64>() / errors.len() as f64;
        return Ok(Lemma2Audit {
            average_error,
            bound,
            exhaustive: true,
            codes: codes.len() as u64,
            std_error: 0.0,
            passed: average_error <= bound + 1e-12,
        });
    }
    if trials < 2 {
        return Err(Error::InvalidParams("sampled audit needs at least two trials".into()));
    }
    let seeds: Vec<u64> = (0..trials).map(|_| rng.random()).collect();
    let errors = seeds
        .par_iter()
        .map(|&seed| {
            let mut local = ChaCha8Rng::seed_from_u64(seed);
            let c2 = sample_extension(c1, sub_add_dim, &mut local)?;
            exact_error_probability(w, c1, &c2).map(|p| p.value())
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = errors.iter().sum::<f64>() / trials as f64;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let std_error = (var / trials as f64).sqrt();
    Ok(Lemma2Audit {
        average_error: mean,
        bound,
        exhaustive: false,
        codes: trials as u64,
        std_error,
        passed: mean <= bound + 4.0 * std_error + 1e-12,
    })
}
