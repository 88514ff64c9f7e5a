//! Seeded Monte-Carlo simulation of the post-processing pipeline.
//!
//! One run draws sifted strings for both bases with independent bit flips
//! (rate `p_bit` in the + basis, `p_phase` in the × basis), samples check
//! positions without replacement, applies the thresholds, corrects errors
//! through a one-time-padded codeword of `C_1` and hashes the corrected
//! message onto the quotient by a random subcode whose dimension is sized
//! by the × basis check count.
//!
//! Only the + basis key is produced. The × basis key is the same pipeline
//! with the roles swapped, see [`SimConfig::mirrored`].
//!
//! The eavesdropper is not simulated. Phase errors on the + key positions
//! are drawn at rate `p_phase` and kept in the transcript so the per-run
//! bound can be attached with [`attach_bound`].

use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{sample_subcode, BinaryCode, BitVec, Decoder, ExhaustiveDecoder, SyndromeDecoder};
use crate::numerics::{clipped_entropy_bits, Probability};
use crate::secbounds::{outcome_bound, ProtocolParams};

/// Sizes, channel, code and seed of a simulation.
///
/// `params` holds the raw-key length `n = n_plus`, the × basis check
/// count `l = l_times`, the × basis thresholds and the slack used to size
/// privacy amplification.
#[derive(Clone)]
pub struct SimConfig {
    pub params: ProtocolParams,
    pub n_plus: u64,
    pub l_plus: u64,
    pub n_times: u64,
    pub l_times: u64,
    /// Thresholds on the + basis check count.
    pub k_low_plus: u64,
    pub k_high_plus: u64,
    /// Key blocks sharing one estimation phase; 1 is the base protocol.
    pub repeat_a: u32,
    pub channel_p_bit: Probability,
    pub channel_p_phase: Probability,
    pub code_c1: BinaryCode,
    decoder: Arc<dyn Decoder>,
    pub seed: u64,
}

impl SimConfig {
    /// Builds a configuration with a default decoder for `code_c1`: a
    /// syndrome table when the redundancy is at most 20, otherwise a
    /// coset-leader table when the length is at most 24.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        params: ProtocolParams,
        l_plus: u64,
        n_times: u64,
        k_plus_thresholds: (u64, u64),
        channel_p_bit: Probability,
        channel_p_phase: Probability,
        code_c1: BinaryCode,
        seed: u64,
    ) -> Result<Self> {
        let decoder: Arc<dyn Decoder> = if code_c1.len() - code_c1.dim() <= 20 {
            Arc::new(SyndromeDecoder::new(&code_c1)?)
        } else {
            Arc::new(ExhaustiveDecoder::new(&code_c1)?)
        };
        Self::with_code_decoder(params, l_plus, n_times, k_plus_thresholds, channel_p_bit, channel_p_phase, decoder, seed)
    }

    /// Like [`SimConfig::new`] with `C_1` taken from `decoder`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_code_decoder(
        params: ProtocolParams,
        l_plus: u64,
        n_times: u64,
        k_plus_thresholds: (u64, u64),
        channel_p_bit: Probability,
        channel_p_phase: Probability,
        decoder: Arc<dyn Decoder>,
        seed: u64,
    ) -> Result<Self> {
        let cfg = SimConfig {
            n_plus: params.n,
            l_times: params.l,
            params,
            l_plus,
            n_times,
            k_low_plus: k_plus_thresholds.0,
            k_high_plus: k_plus_thresholds.1,
            repeat_a: 1,
            channel_p_bit,
            channel_p_phase,
            code_c1: decoder.code().clone(),
            decoder,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_decoder(mut self, decoder: Arc<dyn Decoder>) -> Result<Self> {
        if *decoder.code() != self.code_c1 {
            return Err(Error::InvalidParams("decoder is for a different code".into()));
        }
        self.decoder = decoder;
        Ok(self)
    }

    pub fn with_repeat(mut self, a: u32) -> Result<Self> {
        self.repeat_a = a;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn decoder(&self) -> &dyn Decoder {
        self.decoder.as_ref()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.code_c1.len() as u64 != self.n_plus {
            return Err(Error::Dimension(format!(
                "code length {} but n_plus = {}",
                self.code_c1.len(),
                self.n_plus
            )));
        }
        if self.params.n != self.n_plus || self.params.l != self.l_times {
            return Err(Error::InvalidParams("params must use n = n_plus and l = l_times".into()));
        }
        if self.n_plus == 0 || self.l_plus == 0 || self.n_times == 0 || self.l_times == 0 {
            return Err(Error::InvalidParams("all sizes must be positive".into()));
        }
        if self.k_low_plus > self.k_high_plus || self.k_high_plus > self.l_plus {
            return Err(Error::InvalidParams(format!(
                "+ thresholds must satisfy k_low <= k_high <= l_plus, got {} <= {} <= {}",
                self.k_low_plus, self.k_high_plus, self.l_plus
            )));
        }
        if self.repeat_a == 0 {
            return Err(Error::InvalidParams("repeat_a must be at least 1".into()));
        }
        Ok(())
    }

    /// The same pipeline for the × basis key: sizes, channels and
    /// thresholds swap roles, `code` replaces `C_1` and `params` (with
    /// `n = n_times`, `l = l_plus`) sizes privacy amplification.
    pub fn mirrored(&self, code: BinaryCode, params: ProtocolParams) -> Result<Self> {
        let thresholds = (self.params.k_low, self.params.k_high);
        let mut cfg = SimConfig::new(
            params,
            self.l_times,
            self.n_plus,
            thresholds,
            self.channel_p_phase,
            self.channel_p_bit,
            code,
            self.seed,
        )?;
        cfg.repeat_a = self.repeat_a;
        Ok(cfg)
    }
}

impl fmt::Debug for SimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimConfig")
            .field("params", &self.params)
            .field("n_plus", &self.n_plus)
            .field("l_plus", &self.l_plus)
            .field("n_times", &self.n_times)
            .field("l_times", &self.l_times)
            .field("k_low_plus", &self.k_low_plus)
            .field("k_high_plus", &self.k_high_plus)
            .field("repeat_a", &self.repeat_a)
            .field("channel_p_bit", &self.channel_p_bit)
            .field("channel_p_phase", &self.channel_p_phase)
            .field("code_c1", &(self.code_c1.len(), self.code_c1.dim()))
            .field("seed", &self.seed)
            .finish()
    }
}

/// One key block of a simulated execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunTranscript {
    /// Block index within a repeated run.
    pub round: u32,
    /// Observed + basis check errors.
    pub k_plus: u64,
    /// Observed × basis check errors.
    pub k_times: u64,
    /// The + key was discarded (`k_times` above its threshold).
    pub aborted_plus: bool,
    /// The × key was discarded (`k_plus` above its threshold).
    pub aborted_times: bool,
    /// `k_times` was raised to the lower threshold.
    pub replaced_low: bool,
    pub abort_reason: Option<String>,
    /// Weight of the raw-key difference in this block.
    pub bit_errors: u64,
    /// Phase errors on the key positions of this block.
    pub hidden_phase_errors: u64,
    /// Errors on the × basis bits left after the checks.
    pub times_key_errors: u64,
    pub code_dim: u64,
    pub subcode_dim: u64,
    pub alice_key: BitVec,
    pub bob_key: BitVec,
    pub key_len: u64,
    pub agree: bool,
}

impl RunTranscript {
    /// Whether no + key was emitted.
    pub fn is_aborted(&self) -> bool {
        self.abort_reason.is_some()
    }
}

fn flips<R: Rng + ?Sized>(len: usize, p: Probability, rng: &mut R) -> Vec<bool> {
    (0..len).map(|_| rng.random_bool(p.value())).collect()
}

fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitVec {
    BitVec::from_bits(&(0..len).map(|_| rng.random::<bool>()).collect::<Vec<_>>())
}

/// Indices of `0..total` split into `checks` sampled positions and the
/// rest in ascending order.
fn split_checks<R: Rng + ?Sized>(total: usize, checks: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut is_check = vec![false; total];
    let chosen = sample(rng, total, checks).into_vec();
    for &i in &chosen {
        is_check[i] = true;
    }
    let rest = (0..total).filter(|&i| !is_check[i]).collect();
    (chosen, rest)
}

/// Estimation phase and `a` key blocks sharing it.
fn run_rounds(cfg: &SimConfig, a: u32) -> Result<Vec<RunTranscript>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (n_plus, n_times) = (cfg.n_plus as usize, cfg.n_times as usize);
    let (l_plus, l_times) = (cfg.l_plus as usize, cfg.l_times as usize);
    let a_us = a as usize;

    let total_plus = a_us * n_plus + l_plus;
    let total_times = a_us * n_times + l_times;
    let alice_plus = random_bits(total_plus, &mut rng);
    let bit_noise = flips(total_plus, cfg.channel_p_bit, &mut rng);
    let times_noise = flips(total_times, cfg.channel_p_phase, &mut rng);
    let (plus_checks, mut plus_rest) = split_checks(total_plus, l_plus, &mut rng);
    let (times_checks, times_rest) = split_checks(total_times, l_times, &mut rng);
    let phase_noise = flips(a_us * n_plus, cfg.channel_p_phase, &mut rng);
    plus_rest.shuffle(&mut rng);

    let k_plus = plus_checks.iter().filter(|&&i| bit_noise[i]).count() as u64;
    let k_times = times_checks.iter().filter(|&&i| times_noise[i]).count() as u64;
    let p = &cfg.params;
    let aborted_times = k_plus > cfg.k_high_plus;
    let aborted_plus = k_times > p.k_high;
    let replaced_low = k_times < p.k_low;
    let k_eff = k_times.max(p.k_low);

    let m = cfg.code_c1.dim();
    let mut out = Vec::with_capacity(a_us);
    for round in 0..a_us {
        let positions = &plus_rest[round * n_plus..(round + 1) * n_plus];
        let x_plus = BitVec::from_bits(&positions.iter().map(|&i| alice_plus.get(i)).collect::<Vec<_>>());
        let noise = BitVec::from_bits(&positions.iter().map(|&i| bit_noise[i]).collect::<Vec<_>>());
        let bob_plus = x_plus.xor(&noise);
        let hidden = phase_noise[round * n_plus..(round + 1) * n_plus].iter().filter(|&&b| b).count() as u64;
        let times_key_errors = times_rest[round * n_times..(round + 1) * n_times]
            .iter()
            .filter(|&&i| times_noise[i])
            .count() as u64;

        let mut t = RunTranscript {
            round: round as u32,
            k_plus,
            k_times,
            aborted_plus,
            aborted_times,
            replaced_low,
            abort_reason: None,
            bit_errors: noise.weight() as u64,
            hidden_phase_errors: hidden,
            times_key_errors,
            code_dim: m as u64,
            subcode_dim: 0,
            alice_key: BitVec::zeros(0),
            bob_key: BitVec::zeros(0),
            key_len: 0,
            agree: true,
        };
        if aborted_plus {
            t.abort_reason = Some(format!("k_times = {k_times} exceeds k_high = {}", p.k_high));
            out.push(t);
            continue;
        }
        let sacrificed = cfg.n_plus as f64 * clipped_entropy_bits(k_eff as f64 / cfg.l_times as f64 + p.slack.at(k_eff));
        let s = sacrificed.ceil() as u64;
        t.subcode_dim = s;
        if s > m as u64 {
            t.abort_reason = Some(format!("subcode dimension {s} exceeds code dimension {m}"));
            out.push(t);
            continue;
        }

        // One-time-padded codeword and Bob's view of it.
        let z = random_bits(m, &mut rng);
        let codeword = cfg.code_c1.encode(&z)?;
        let sent = codeword.xor(&x_plus);
        let received = sent.xor(&bob_plus);
        assert_eq!(received, codeword.xor(&noise), "Bob must see G Z + N");
        let estimate = cfg.decoder.decode(&received)?;
        let z_bob = cfg
            .code_c1
            .message_of(&estimate)
            .ok_or_else(|| Error::InvalidParams("decoder returned a non-codeword".into()))?;

        let c2 = sample_subcode(m, s as usize, &mut rng)?;
        t.alice_key = c2.quotient_label(&z);
        t.bob_key = c2.quotient_label(&z_bob);
        t.key_len = t.alice_key.len() as u64;
        t.agree = t.alice_key == t.bob_key;
        out.push(t);
    }
    Ok(out)
}

/// One execution of the base protocol.
pub fn simulate_run(cfg: &SimConfig) -> Result<RunTranscript> {
    Ok(run_rounds(cfg, 1)?.remove(0))
}

/// One execution of the repeated protocol: an estimation phase over
/// `a n + l` sifted bits per basis, then `a = cfg.repeat_a` key blocks
/// drawn from the remaining bits, all sharing the check counts.
/// With `a = 1` this is exactly [`simulate_run`].
pub fn simulate_modified(cfg: &SimConfig) -> Result<Vec<RunTranscript>> {
    run_rounds(cfg, cfg.repeat_a)
}

/// Seeds of the runs of a batch, derived from `cfg.seed`.
fn run_seeds(seed: u64, runs: usize) -> Vec<u64> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..runs).map(|_| master.random()).collect()
}

/// Transcripts of `runs` independent executions (each of `repeat_a` blocks),
/// in run order.
pub fn simulate_transcripts(cfg: &SimConfig, runs: usize) -> Result<Vec<Vec<RunTranscript>>> {
    if runs == 0 {
        return Err(Error::InvalidParams("runs must be at least 1".into()));
    }
    run_seeds(cfg.seed, runs)
        .into_par_iter()
        .map(|seed| run_rounds(&cfg.clone().with_seed(seed), cfg.repeat_a))
        .collect()
}

/// Aggregate statistics of a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub runs: u64,
    pub blocks: u64,
    pub abort_rate_plus: f64,
    pub abort_rate_times: f64,
    /// Fraction of emitted keys on which Alice and Bob agree; `None` when
    /// every block aborted.
    pub agreement_rate: Option<f64>,
    pub mean_key_len: Option<f64>,
    pub mean_k_plus: f64,
    pub mean_k_times: f64,
    /// Counts of each observed `k_plus`, indexed `0..=l_plus`.
    pub k_plus_hist: Vec<u64>,
    pub k_times_hist: Vec<u64>,
}

pub fn summarize(cfg: &SimConfig, runs: &[Vec<RunTranscript>]) -> BatchSummary {
    let mut k_plus_hist = vec![0u64; cfg.l_plus as usize + 1];
    let mut k_times_hist = vec![0u64; cfg.l_times as usize + 1];
    let (mut ab_plus, mut ab_times) = (0u64, 0u64);
    let (mut kp, mut kt) = (0u64, 0u64);
    for run in runs {
        let first = &run[0];
        k_plus_hist[first.k_plus as usize] += 1;
        k_times_hist[first.k_times as usize] += 1;
        ab_plus += first.aborted_plus as u64;
        ab_times += first.aborted_times as u64;
        kp += first.k_plus;
        kt += first.k_times;
    }
    let emitted: Vec<&RunTranscript> = runs.iter().flatten().filter(|t| !t.is_aborted()).collect();
    let count = runs.len() as f64;
    let (agreement_rate, mean_key_len) = if emitted.is_empty() {
        (None, None)
    } else {
        let e = emitted.len() as f64;
        (
            Some(emitted.iter().filter(|t| t.agree).count() as f64 / e),
            Some(emitted.iter().map(|t| t.key_len as f64).sum::<f64>() / e),
        )
    };
    BatchSummary {
        runs: runs.len() as u64,
        blocks: runs.iter().map(|r| r.len() as u64).sum(),
        abort_rate_plus: ab_plus as f64 / count,
        abort_rate_times: ab_times as f64 / count,
        agreement_rate,
        mean_key_len,
        mean_k_plus: kp as f64 / count,
        mean_k_times: kt as f64 / count,
        k_plus_hist,
        k_times_hist,
    }
}

/// Summary of `runs` independent executions.
pub fn simulate_batch(cfg: &SimConfig, runs: usize) -> Result<BatchSummary> {
    Ok(summarize(cfg, &simulate_transcripts(cfg, runs)?))
}

/// Per-run bound on the eavesdropper's information at the observed
/// `k_times` and the block's phase-error count.
pub fn attach_bound(transcript: &RunTranscript, params: &ProtocolParams) -> Result<f64> {
    if let Some(reason) = &transcript.abort_reason {
        return Err(Error::Aborted(reason.clone()));
    }
    outcome_bound(params, transcript.k_times, transcript.hidden_phase_errors)
}
