//! Linear algebra over GF(2): packed bit vectors and matrices, linear codes,
//! coset decoding and random subcode sampling.
//!
//! Bits are stored most-significant first inside `u64` words, so comparing
//! the word vectors of two equal-length [`BitVec`]s is the lexicographic
//! order of the bit strings. Every tie between equal-weight candidates is
//! broken by that order.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{entropy_bits, Probability};

/// Largest length for which decoders and audits enumerate `F_2^n`.
pub const EXHAUSTIVE_LIMIT: usize = 24;

const WORD: usize = 64;

/// A fixed-length bit string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// The string whose bits are the binary digits of `index`, most
    /// significant first; numeric order of indices is lexicographic order.
    pub fn from_index(len: usize, index: u64) -> Self {
        assert!(len <= WORD, "from_index needs len <= 64");
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = index << (WORD - len);
        }
        v
    }

    pub fn to_index(&self) -> u64 {
        assert!(self.len <= WORD, "to_index needs len <= 64");
        if self.len == 0 {
            0
        } else {
            self.words[0] >> (WORD - self.len)
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = BitVec::zeros(len);
        v.set(i, true);
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.words[i / WORD] >> (WORD - 1 - i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (WORD - 1 - i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut v = self.clone();
        v.xor_assign(other);
        v
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// Bits `start..start + len` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        let mut v = BitVec::zeros(len);
        for i in 0..len {
            v.set(i, self.get(start + i));
        }
        v
    }

    /// Concatenation of `parts`.
    pub fn concat(parts: &[BitVec]) -> BitVec {
        let mut v = BitVec::zeros(parts.iter().map(BitVec::len).sum());
        let mut at = 0;
        for p in parts {
            for (i, b) in p.iter().enumerate() {
                v.set(at + i, b);
            }
            at += p.len();
        }
        v
    }

    /// Index of the first set bit.
    fn leading_one(&self) -> Option<usize> {
        self.words
            .iter()
            .position(|&w| w != 0)
            .map(|wi| wi * WORD + self.words[wi].leading_zeros() as usize)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut v = BitVec::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => return Err(Error::Parse(format!("unexpected character {other:?} in bit string"))),
            }
        }
        Ok(v)
    }
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Row-major packed matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BitMatrix {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            cols: n,
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::Dimension(format!("row of length {} in a matrix with {cols} columns", r.len())));
        }
        Ok(BitMatrix { cols, rows })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.rows[i].set(j, bit)
    }

    /// `x^T M`: the sum of the rows selected by `x`.
    pub fn left_mul(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.num_rows() {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} rows",
                x.len(),
                self.num_rows()
            )));
        }
        let mut out = BitVec::zeros(self.cols);
        for (i, row) in self.rows.iter().enumerate() {
            if x.get(i) {
                out.xor_assign(row);
            }
        }
        Ok(out)
    }

    /// `M x`: one inner product per row.
    pub fn right_mul(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} against {} columns", x.len(), self.cols)));
        }
        Ok(BitVec::from_bits(&self.rows.iter().map(|r| r.dot(x)).collect::<Vec<_>>()))
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.num_rows());
        for (i, row) in self.rows.iter().enumerate() {
            for j in 0..self.cols {
                if row.get(j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Reduced row echelon form, pivot columns and the transform `T` with
    /// `T M = rref` (zero rows kept at the bottom).
    pub fn rref(&self) -> Echelon {
        let m = self.num_rows();
        let mut rows = self.rows.clone();
        let mut transform: Vec<BitVec> = (0..m).map(|i| BitVec::unit(m, i)).collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| rows[i].get(c)) else {
                continue;
            };
            rows.swap(r, p);
            transform.swap(r, p);
            for i in 0..m {
                if i != r && rows[i].get(c) {
                    let (pr, pt) = (rows[r].clone(), transform[r].clone());
                    rows[i].xor_assign(&pr);
                    transform[i].xor_assign(&pt);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon {
            reduced: BitMatrix { cols: self.cols, rows },
            transform: BitMatrix { cols: m, rows: transform },
            pivots,
        }
    }

    /// One row per line, characters `0` and `1`; blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self> {
        let rows: Vec<BitVec> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<_>>()?;
        let cols = rows
            .first()
            .map(BitVec::len)
            .ok_or_else(|| Error::Parse("empty generator matrix".into()))?;
        BitMatrix::from_rows(cols, rows)
    }

    pub fn to_text(&self) -> String {
        self.rows.iter().map(|r| format!("{r}\n")).collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.num_rows(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

/// Output of [`BitMatrix::rref`].
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: BitMatrix,
    pub transform: BitMatrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

pub fn rank(m: &BitMatrix) -> usize {
    m.rref().rank()
}

fn random_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitVec {
    let mut v = BitVec::zeros(len);
    for (wi, w) in v.words.iter_mut().enumerate() {
        let used = (len - wi * WORD).min(WORD);
        *w = rng.random::<u64>() & (u64::MAX << (WORD - used));
    }
    v
}

/// Uniform `rows x cols` matrix conditioned on full row rank.
pub fn sample_full_rank_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<BitMatrix> {
    if rows > cols {
        return Err(Error::Dimension(format!("cannot have rank {rows} with {cols} columns")));
    }
    loop {
        let m = BitMatrix {
            cols,
            rows: (0..rows).map(|_| random_vec(cols, rng)).collect(),
        };
        if rank(&m) == rows {
            return Ok(m);
        }
    }
}

/// Incremental span with a reduced basis, used for rejection of
/// dependent vectors.
#[derive(Debug, Clone)]
struct Span {
    basis: Vec<BitVec>,
}

impl Span {
    fn new() -> Self {
        Span { basis: Vec::new() }
    }

    /// Reduces `v` against the basis; the basis is kept with distinct leading ones.
    fn reduce(&self, mut v: BitVec) -> BitVec {
        for b in &self.basis {
            let lead = b.leading_one().expect("basis vectors are nonzero");
            if v.get(lead) {
                v.xor_assign(b);
            }
        }
        v
    }

    /// Adds `v` if independent; returns whether it was added.
    fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v.clone());
        let Some(lead) = r.leading_one() else {
            return false;
        };
        for b in &mut self.basis {
            if b.get(lead) {
                b.xor_assign(&r);
            }
        }
        self.basis.push(r);
        true
    }
}

/// A linear code given by a full-rank generator matrix.
#[derive(Clone)]
pub struct BinaryCode {
    generator: BitMatrix,
    reduced: BitMatrix,
    pivots: Vec<usize>,
    /// `T` with `T G = reduced`.
    transform: BitMatrix,
}

impl BinaryCode {
    pub fn new(generator: BitMatrix) -> Result<Self> {
        let ech = generator.rref();
        if ech.rank() != generator.num_rows() {
            return Err(Error::Dimension(format!(
                "generator has rank {} but {} rows",
                ech.rank(),
                generator.num_rows()
            )));
        }
        Ok(BinaryCode {
            generator,
            reduced: ech.reduced,
            pivots: ech.pivots,
            transform: ech.transform,
        })
    }

    /// The code spanned by `rows`, which may be dependent.
    pub fn span(len: usize, rows: &[BitVec]) -> Result<Self> {
        let mut s = Span::new();
        for r in rows {
            if r.len() != len {
                return Err(Error::Dimension(format!("vector of length {} in F_2^{len}", r.len())));
            }
            s.insert(r);
        }
        s.basis.sort();
        s.basis.reverse();
        BinaryCode::new(BitMatrix { cols: len, rows: s.basis })
    }

    pub fn zero(len: usize) -> Self {
        BinaryCode::new(BitMatrix::zeros(0, len)).expect("empty generator has full rank")
    }

    pub fn full(len: usize) -> Self {
        BinaryCode::new(BitMatrix::identity(len)).expect("identity has full rank")
    }

    pub fn repetition(len: usize) -> Self {
        let mut g = BitMatrix::zeros(1, len);
        for j in 0..len {
            g.set(0, j, true);
        }
        BinaryCode::new(g).expect("nonzero row")
    }

    /// The [7, 4] Hamming code in systematic form.
    pub fn hamming74() -> Self {
        let text = "1000110\n0100101\n0010011\n0001111\n";
        BinaryCode::new(BitMatrix::parse_text(text).expect("valid literal")).expect("full rank")
    }

    /// Direct sum of `copies` copies of `self` on consecutive blocks.
    pub fn direct_sum(&self, copies: usize) -> Self {
        let n = self.len();
        let mut g = BitMatrix::zeros(self.dim() * copies, n * copies);
        for c in 0..copies {
            for (i, row) in self.generator.rows().iter().enumerate() {
                for j in 0..n {
                    if row.get(j) {
                        g.set(c * self.dim() + i, c * n + j, true);
                    }
                }
            }
        }
        BinaryCode::new(g).expect("block-diagonal of full-rank blocks")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        BinaryCode::new(BitMatrix::parse_text(text)?)
    }

    pub fn to_text(&self) -> String {
        self.generator.to_text()
    }

    /// Block length `n`.
    pub fn len(&self) -> usize {
        self.generator.num_cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.generator.num_rows()
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// `m^T G`.
    pub fn encode(&self, message: &BitVec) -> Result<BitVec> {
        self.generator.left_mul(message)
    }

    /// Canonical representative of the coset `v + C`: the unique element
    /// with zeros at every pivot column.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.len(), "length mismatch");
        let mut out = v.clone();
        for (row, &p) in self.reduced.rows().iter().zip(&self.pivots) {
            if out.get(p) {
                out.xor_assign(row);
            }
        }
        out
    }

    /// Coordinates of the coset `v + C` in `F_2^n / C`: the bits of the
    /// canonical representative outside the pivot columns.
    pub fn quotient_label(&self, v: &BitVec) -> BitVec {
        let r = self.reduce(v);
        let mut is_pivot = vec![false; self.len()];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        BitVec::from_bits(&(0..self.len()).filter(|&i| !is_pivot[i]).map(|i| r.get(i)).collect::<Vec<_>>())
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        v.len() == self.len() && self.reduce(v).is_zero()
    }

    /// Message `m` with `m^T G = codeword`, or `None` for non-codewords.
    pub fn message_of(&self, codeword: &BitVec) -> Option<BitVec> {
        if !self.contains(codeword) {
            return None;
        }
        let coeffs = BitVec::from_bits(&self.pivots.iter().map(|&p| codeword.get(p)).collect::<Vec<_>>());
        Some(self.transform.left_mul(&coeffs).expect("square transform"))
    }

    pub fn is_subcode_of(&self, other: &BinaryCode) -> bool {
        self.len() == other.len() && self.generator.rows().iter().all(|r| other.contains(r))
    }

    /// The orthogonal complement.
    pub fn dual(&self) -> BinaryCode {
        let n = self.len();
        let mut rows = Vec::new();
        let mut is_pivot = vec![false; n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        for f in (0..n).filter(|&f| !is_pivot[f]) {
            let mut v = BitVec::unit(n, f);
            for (row, &p) in self.reduced.rows().iter().zip(&self.pivots) {
                if row.get(f) {
                    v.set(p, true);
                }
            }
            rows.push(v);
        }
        BinaryCode::new(BitMatrix { cols: n, rows }).expect("null-space basis is independent")
    }

    /// Every codeword in index order of the messages (needs `dim <= 24`).
    pub fn codewords(&self) -> Result<Vec<BitVec>> {
        guard("code dimension", self.dim())?;
        Ok((0..1u64 << self.dim())
            .map(|m| self.encode(&BitVec::from_index(self.dim(), m)).expect("message length"))
            .collect())
    }

    /// The code obtained by mapping each message-space vector of `sub`
    /// through this generator.
    pub fn compose(&self, sub: &BinaryCode) -> Result<BinaryCode> {
        if sub.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "subcode lives in F_2^{} but the message space is F_2^{}",
                sub.len(),
                self.dim()
            )));
        }
        let rows = sub
            .generator
            .rows()
            .iter()
            .map(|m| self.encode(m))
            .collect::<Result<Vec<_>>>()?;
        BinaryCode::new(BitMatrix { cols: self.len(), rows })
    }
}

impl fmt::Debug for BinaryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryCode [{}, {}] {:?}", self.len(), self.dim(), self.generator)
    }
}

impl PartialEq for BinaryCode {
    /// Equality as subspaces.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.reduced == other.reduced
    }
}

impl Eq for BinaryCode {}

fn guard(what: &'static str, value: usize) -> Result<()> {
    if value > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeGuard {
            what,
            value,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    Ok(())
}

/// Uniformly random `sub_dim`-dimensional subspace of `F_2^parent_dim`,
/// built from sequentially drawn generators with dependent draws rejected.
pub fn sample_subcode<R: Rng + ?Sized>(parent_dim: usize, sub_dim: usize, rng: &mut R) -> Result<BinaryCode> {
    sample_extension(&BinaryCode::zero(parent_dim), sub_dim, rng)
}

/// Uniformly random code `C_2` with `C_1 ⊆ C_2` and
/// `dim C_2 = dim C_1 + add_dim`, drawn the same way.
pub fn sample_extension<R: Rng + ?Sized>(c1: &BinaryCode, add_dim: usize, rng: &mut R) -> Result<BinaryCode> {
    let n = c1.len();
    if c1.dim() + add_dim > n {
        return Err(Error::Dimension(format!(
            "cannot extend a {}-dimensional code by {add_dim} in F_2^{n}",
            c1.dim()
        )));
    }
    let mut span = Span::new();
    for r in c1.generator.rows() {
        span.insert(r);
    }
    let mut rows = c1.generator.rows().to_vec();
    while rows.len() < c1.dim() + add_dim {
        let v = random_vec(n, rng);
        if span.insert(&v) {
            rows.push(v);
        }
    }
    BinaryCode::new(BitMatrix { cols: n, rows })
}

/// Minimum-weight coset leaders of a code, one per coset of `F_2^n`.
///
/// Each leader is the lexicographically smallest of the minimum-weight
/// elements of its coset.
#[derive(Debug, Clone)]
pub struct CosetLeaders {
    code: BinaryCode,
    /// Indexed by the canonical representative of the coset.
    leaders: HashMap<BitVec, BitVec>,
}

impl CosetLeaders {
    pub fn new(code: &BinaryCode) -> Result<Self> {
        let n = code.len();
        guard("block length", n)?;
        let mut leaders: HashMap<BitVec, BitVec> = HashMap::with_capacity(1 << (n - code.dim()));
        // Ascending index is ascending lexicographic order, so the first
        // minimum-weight element seen in each coset wins ties.
        for idx in 0..1u64 << n {
            let v = BitVec::from_index(n, idx);
            let label = code.reduce(&v);
            match leaders.get(&label) {
                Some(cur) if cur.weight() <= v.weight() => {}
                _ => {
                    leaders.insert(label, v);
                }
            }
        }
        Ok(CosetLeaders {
            code: code.clone(),
            leaders,
        })
    }

    pub fn code(&self) -> &BinaryCode {
        &self.code
    }

    /// Leader of the coset containing `v`.
    pub fn leader(&self, v: &BitVec) -> &BitVec {
        &self.leaders[&self.code.reduce(v)]
    }

    pub fn leaders(&self) -> impl Iterator<Item = &BitVec> {
        self.leaders.values()
    }
}

/// Decodes `y` to the coset `[y + Gamma([y]_2)]_1` of `C_2 / C_1`, where
/// `Gamma` picks the coset leader of `y + C_2`. The label is the canonical
/// representative of the `C_1`-coset.
pub fn min_distance_decode(y: &BitVec, c1: &BinaryCode, c2: &BinaryCode) -> Result<BitVec> {
    check_pair(c1, c2)?;
    if y.len() != c2.len() {
        return Err(Error::Dimension(format!("received word of length {} for length {}", y.len(), c2.len())));
    }
    let leader = lexmin_leader(y, c2)?;
    Ok(c1.reduce(&y.xor(&leader)))
}

fn check_pair(c1: &BinaryCode, c2: &BinaryCode) -> Result<()> {
    guard("block length", c2.len())?;
    if !c1.is_subcode_of(c2) {
        return Err(Error::NotContained);
    }
    Ok(())
}

/// Coset leader of `y + C` by enumeration of `C`.
fn lexmin_leader(y: &BitVec, code: &BinaryCode) -> Result<BitVec> {
    let mut best: Option<BitVec> = None;
    for c in code.codewords()? {
        let cand = y.xor(&c);
        let better = match &best {
            None => true,
            Some(b) => (cand.weight(), &cand) < (b.weight(), b),
        };
        if better {
            best = Some(cand);
        }
    }
    Ok(best.expect("a code has at least one codeword"))
}

/// Additive noise on `F_2^n` with an explicit probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveChannel {
    n: usize,
    /// Indexed by [`BitVec::to_index`] of the noise.
    pmf: Vec<f64>,
}

impl AdditiveChannel {
    pub fn new(n: usize, pmf: Vec<f64>) -> Result<Self> {
        guard("block length", n)?;
        if pmf.len() != 1 << n {
            return Err(Error::Dimension(format!("{} probabilities for 2^{n} noise patterns", pmf.len())));
        }
        if let Some(&p) = pmf.iter().find(|p| !(**p >= 0.0)) {
            return Err(crate::error::domain("noise probability", p, ">= 0"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(crate::error::domain("total noise probability", total, "1 within 1e-12"));
        }
        Ok(AdditiveChannel { n, pmf })
    }

    pub fn noiseless(n: usize) -> Result<Self> {
        Self::point_mass(&BitVec::zeros(n))
    }

    pub fn point_mass(noise: &BitVec) -> Result<Self> {
        let n = noise.len();
        guard("block length", n)?;
        let mut pmf = vec![0.0; 1 << n];
        pmf[noise.to_index() as usize] = 1.0;
        Ok(AdditiveChannel { n, pmf })
    }

    /// Independent flips with probability `p`.
    pub fn bsc(n: usize, p: Probability) -> Result<Self> {
        guard("block length", n)?;
        let p = p.value();
        let pmf = (0..1u64 << n)
            .map(|i| {
                let w = i.count_ones() as i32;
                p.powi(w) * (1.0 - p).powi(n as i32 - w)
            })
            .collect();
        Ok(AdditiveChannel { n, pmf })
    }

    /// Random table with independent exponential weights, normalised.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        guard("block length", n)?;
        let raw: Vec<f64> = (0..1usize << n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        Ok(AdditiveChannel {
            n,
            pmf: raw.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn prob(&self, noise: &BitVec) -> f64 {
        self.pmf[noise.to_index() as usize]
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Distribution of the noise weight over `0..=n`.
    pub fn weight_distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (i, &p) in self.pmf.iter().enumerate() {
            out[(i as u64).count_ones() as usize] += p;
        }
        out
    }
}

/// Exact decoding error `1 - P_W(Gamma + C_1)` of [`min_distance_decode`].
pub fn exact_error_probability(w: &AdditiveChannel, c1: &BinaryCode, c2: &BinaryCode) -> Result<Probability> {
    check_pair(c1, c2)?;
    if w.len() != c2.len() {
        return Err(Error::Dimension(format!("channel length {} against code length {}", w.len(), c2.len())));
    }
    let leaders = CosetLeaders::new(c2)?;
    let c1_words = c1.codewords()?;
    let mut correct = 0.0;
    for g in leaders.leaders() {
        for c in &c1_words {
            correct += w.prob(&g.xor(c));
        }
    }
    Ok(Probability::saturating(1.0 - correct))
}

/// `g(x | n, k) = min{2^{n h(k/n)} x, 1}` for `k <= n/2`, and one above.
pub fn g_factor(x: Probability, n: u64, k: u64) -> Result<Probability> {
    if n == 0 || k > n {
        return Err(Error::InvalidParams(format!("need 0 <= k <= n with n > 0 (n = {n}, k = {k})")));
    }
    if 2 * k > n {
        return Ok(Probability::ONE);
    }
    if x.value() == 0.0 {
        return Ok(Probability::ZERO);
    }
    let log2 = n as f64 * entropy_bits(k as f64 / n as f64) + x.value().log2();
    Ok(Probability::saturating(log2.min(0.0).exp2()))
}

/// Nearest-codeword decoding for a code.
pub trait Decoder: Send + Sync {
    fn code(&self) -> &BinaryCode;

    /// A codeword closest to `y`.
    fn decode(&self, y: &BitVec) -> Result<BitVec>;
}

/// Coset-leader table of the whole space (`n <= 24`).
#[derive(Debug, Clone)]
pub struct ExhaustiveDecoder {
    leaders: CosetLeaders,
}

impl ExhaustiveDecoder {
    pub fn new(code: &BinaryCode) -> Result<Self> {
        Ok(ExhaustiveDecoder {
            leaders: CosetLeaders::new(code)?,
        })
    }
}

impl Decoder for ExhaustiveDecoder {
    fn code(&self) -> &BinaryCode {
        self.leaders.code()
    }

    fn decode(&self, y: &BitVec) -> Result<BitVec> {
        if y.len() != self.code().len() {
            return Err(Error::Dimension(format!("received word of length {}", y.len())));
        }
        Ok(y.xor(self.leaders.leader(y)))
    }
}

/// Syndrome table built by enumerating error patterns of increasing weight
/// (`n - k <= 24`).
#[derive(Debug, Clone)]
pub struct SyndromeDecoder {
    code: BinaryCode,
    parity: BitMatrix,
    table: HashMap<BitVec, BitVec>,
}

impl SyndromeDecoder {
    pub fn new(code: &BinaryCode) -> Result<Self> {
        let n = code.len();
        let redundancy = n - code.dim();
        guard("redundancy", redundancy)?;
        let parity = code.dual().generator().clone();
        let target = 1usize << redundancy;
        let mut table: HashMap<BitVec, BitVec> = HashMap::with_capacity(target);
        let mut weight = 0;
        while table.len() < target && weight <= n {
            let mut fresh: HashMap<BitVec, BitVec> = HashMap::new();
            for_each_combination(n, weight, |e| {
                let s = parity.right_mul(e).expect("parity width is n");
                if table.contains_key(&s) {
                    return;
                }
                match fresh.get(&s) {
                    Some(cur) if cur <= e => {}
                    _ => {
                        fresh.insert(s, e.clone());
                    }
                }
            });
            table.extend(fresh);
            weight += 1;
        }
        Ok(SyndromeDecoder {
            code: code.clone(),
            parity,
            table,
        })
    }

    pub fn syndrome(&self, y: &BitVec) -> Result<BitVec> {
        self.parity.right_mul(y)
    }
}

fn for_each_combination(n: usize, w: usize, mut f: impl FnMut(&BitVec)) {
    fn rec(v: &mut BitVec, start: usize, left: usize, f: &mut dyn FnMut(&BitVec)) {
        if left == 0 {
            f(v);
            return;
        }
        for i in start..=v.len() - left {
            v.set(i, true);
            rec(v, i + 1, left - 1, f);
            v.set(i, false);
        }
    }
    if w <= n {
        rec(&mut BitVec::zeros(n), 0, w, &mut f);
    }
}

impl Decoder for SyndromeDecoder {
    fn code(&self) -> &BinaryCode {
        &self.code
    }

    fn decode(&self, y: &BitVec) -> Result<BitVec> {
        if y.len() != self.code.len() {
            return Err(Error::Dimension(format!("received word of length {}", y.len())));
        }
        let s = self.syndrome(y)?;
        Ok(y.xor(&self.table[&s]))
    }
}

/// Decoder for a direct sum of copies of one code, decoding block by block.
pub struct BlockDecoder {
    code: BinaryCode,
    inner: Box<dyn Decoder>,
    blocks: usize,
}

impl BlockDecoder {
    pub fn new(inner: Box<dyn Decoder>, blocks: usize) -> Self {
        BlockDecoder {
            code: inner.code().direct_sum(blocks),
            inner,
            blocks,
        }
    }
}

impl fmt::Debug for BlockDecoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockDecoder")
            .field("inner", self.inner.code())
            .field("blocks", &self.blocks)
            .finish()
    }
}

impl Decoder for BlockDecoder {
    fn code(&self) -> &BinaryCode {
        &self.code
    }

    fn decode(&self, y: &BitVec) -> Result<BitVec> {
        if y.len() != self.code.len() {
            return Err(Error::Dimension(format!("received word of length {}", y.len())));
        }
        let b = self.inner.code().len();
        let parts = (0..self.blocks)
            .map(|i| self.inner.decode(&y.slice(i * b, b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(BitVec::concat(&parts))
    }
}
