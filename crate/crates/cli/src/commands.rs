use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use finitekey::asymptotics::{
    approximate_exponent, compare_with_watanabe, exponent, exponent_convergence_check, normal_limit, security_table,
    solve_delta, table_statistic, AsymptoticConfig, TABLE_DELTA, TABLE_ERRATUM_L, TABLE_ERROR_RATE, TABLE_N,
};
use finitekey::gf2::{sample_subcode, AdditiveChannel, BinaryCode, BlockDecoder, Decoder, SyndromeDecoder};
use finitekey::numerics::gauss_cdf;
use finitekey::oracles::{
    extension_count, lemma1_bound, lemma1_eve_information, lemma2_oracle, lemma7_check, PauliDistribution,
    ENSEMBLE_LENGTH_LIMIT, ENSEMBLE_SIZE_LIMIT,
};
use finitekey::protocol::{simulate_transcripts, summarize, SimConfig};
use finitekey::secbounds::{theorem1_bound, LowCountRule};
use finitekey::{Probability, ProtocolParams, SlackSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::output::{Record, Report, Value};
use crate::{BoundArgs, Cli, Command, CompareArgs, ExponentArgs, LowRule, OracleArgs, SimulateArgs, SolveDeltaArgs, TableArgs};

/// Slack below which an inequality counts as saturated, and the tolerance
/// allowed before it counts as violated.
const AUDIT_TOL: f64 = 1e-12;

/// The statistic printed for the erratum row of the published table.
const PRINTED_ERRATUM_STATISTIC: f64 = -4.00;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] finitekey::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot serialize transcript: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "precondition",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Json(_) => "serialization",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// The report and whether every audited inequality held.
pub fn run(cli: &Cli) -> Result<(Report, bool)> {
    match &cli.command {
        Command::Bound(a) => bound(a).map(|r| (r, true)),
        Command::Table(a) => table(a).map(|r| (r, true)),
        Command::SolveDelta(a) => solve(a).map(|r| (r, true)),
        Command::Exponent(a) => exponent_cmd(a).map(|r| (r, true)),
        Command::Compare(a) => compare(a).map(|r| (r, true)),
        Command::Simulate(a) => simulate(a, cli.seed).map(|r| (r, true)),
        Command::OracleCheck(a) => oracle(a, cli.seed),
    }
}

fn prob(what: &str, v: f64) -> Result<Probability> {
    Probability::new(v).map_err(|_| CliError::Usage(format!("{what} = {v} is not a probability")))
}

fn bound(a: &BoundArgs) -> Result<Report> {
    let (k_low, k_high) = match (a.k, a.k_low, a.k_high) {
        (Some(k), _, _) => (k, k),
        (None, Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(CliError::Usage("give --k or both --k-low and --k-high".into())),
    };
    let (slack, source, target) = if let Some(d) = a.delta {
        (SlackSchedule::constant(d), "constant", None)
    } else if let Some(path) = &a.delta_table {
        (read_slack_table(path)?, "table", None)
    } else {
        let eps = a.delta_from_eps.expect("clap enforces one slack form");
        let target = prob("--delta-from-eps", eps)?;
        let values = (k_low..=k_high)
            .map(|k| {
                if k == 0 || k >= a.l {
                    Ok(0.0)
                } else {
                    solve_delta(a.n, a.l, k, target)
                }
            })
            .collect::<finitekey::Result<Vec<_>>>()?;
        (SlackSchedule::Table { first: k_low, values }, "target-eps", Some(eps))
    };
    let rule = match a.low_rule {
        LowRule::Displayed => LowCountRule::Displayed,
        LowRule::Derived => LowCountRule::Derived,
    };
    let params = ProtocolParams::new(a.n, a.l, a.rate, k_low, k_high, slack)?.with_low_rule(rule);
    let report = theorem1_bound(&params)?;
    let delta_high = params.slack.at(k_high);
    let statistic = table_statistic(a.n, a.l, k_high, delta_high).ok();
    let level = statistic.map(|s| gauss_cdf(s).value());
    let record = Record::new()
        .with("n", a.n)
        .with("l", a.l)
        .with("rate", a.rate)
        .with("k_low", k_low)
        .with("k_high", k_high)
        .with("low_rule", format!("{:?}", rule).to_lowercase())
        .with("delta_source", source)
        .with("target_eps", target)
        .with("delta_at_k_high", delta_high)
        .with("key_length_at_k_high", params.key_length(k_high))
        .with("total_bound", report.total_bound)
        .with("per_bit_bound", report.per_bit_bound)
        .with("term1", report.term1)
        .with("term2", report.term2)
        .with("mass_term", report.mass_term)
        .with("argmax_j_term1", report.argmax_j_term1)
        .with("argmax_j_term2", report.argmax_j_term2)
        .with("argmax_j_mass", report.argmax_j_mass)
        .with("normal_statistic", statistic)
        .with("normal_approximation", level);
    let mut out = Report::new("bound", vec![record]);
    if let (Some(eps), Some(level)) = (target, level) {
        out = out.note(format!(
            "delta at k_high = {delta_high:.6e} solved for level {eps}; normal approximation returns {level:.6e}"
        ));
    }
    Ok(out)
}

/// Lines of `k delta`, whitespace or comma separated, `#` comments.
fn read_slack_table(path: &Path) -> Result<SlackSchedule> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, msg: &str| {
        CliError::Core(finitekey::Error::Parse(format!("{}:{line}: {msg}", path.display())))
    };
    let mut first = None;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let [k, d] = fields.as_slice() else {
            return Err(bad(i + 1, "expected `k delta`"));
        };
        let k: u64 = k.parse().map_err(|_| bad(i + 1, "count is not an integer"))?;
        let d: f64 = d.parse().map_err(|_| bad(i + 1, "slack is not a number"))?;
        let start = *first.get_or_insert(k);
        if k != start + values.len() as u64 {
            return Err(bad(i + 1, "counts must be consecutive and increasing"));
        }
        values.push(d);
    }
    let first = first.ok_or_else(|| bad(0, "no entries"))?;
    Ok(SlackSchedule::Table { first, values })
}

fn table(a: &TableArgs) -> Result<Report> {
    let rows = security_table(a.n, a.error_rate, a.delta, &a.l)?;
    let defaults = a.n == TABLE_N && a.error_rate == TABLE_ERROR_RATE && a.delta == TABLE_DELTA;
    let mut flagged = None;
    let records = rows
        .iter()
        .map(|row| {
            let erratum = defaults && row.l == TABLE_ERRATUM_L;
            if erratum {
                flagged = Some(*row);
            }
            Record::new()
                .with("l", row.l)
                .with("k", row.k)
                .with("statistic", row.statistic)
                .with("level", row.level)
                .with("erratum", erratum)
                .with("printed_statistic", erratum.then_some(PRINTED_ERRATUM_STATISTIC))
        })
        .collect();
    let mut out = Report::new("table", records);
    if let Some(row) = flagged {
        out = out.note(format!(
            "l = {}: the reference table prints {PRINTED_ERRATUM_STATISTIC:.2}, inconsistent with its level; \
             the computed statistic {:.2} matches the level {:.3e}",
            row.l, row.statistic, row.level
        ));
    }
    Ok(out)
}

fn solve(a: &SolveDeltaArgs) -> Result<Report> {
    let delta = solve_delta(a.n, a.l, a.k, prob("--eps", a.eps)?)?;
    let statistic = table_statistic(a.n, a.l, a.k, delta)?;
    let record = Record::new()
        .with("n", a.n)
        .with("l", a.l)
        .with("k", a.k)
        .with("target_eps", a.eps)
        .with("delta", delta)
        .with("statistic", statistic)
        .with("level", gauss_cdf(statistic).value());
    Ok(Report::new("solve-delta", vec![record]))
}

fn exponent_cmd(a: &ExponentArgs) -> Result<Report> {
    let (p_low, p_high) = match (a.p, a.p_low, a.p_high) {
        (Some(p), _, _) => (p, p),
        (None, Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(CliError::Usage("give --p or both --p-low and --p-high".into())),
    };
    let cfg = AsymptoticConfig::constant(a.r, prob("--p-low", p_low)?, prob("--p-high", p_high)?, a.eps)?;
    let e = exponent(&cfg)?;
    if a.ns.is_empty() {
        let approx = (p_low == p_high).then(|| approximate_exponent(a.eps, a.r, p_low));
        let record = Record::new()
            .with("r", a.r)
            .with("p_low", p_low)
            .with("p_high", p_high)
            .with("eps", a.eps)
            .with("exponent", e)
            .with("approximate_exponent", approx)
            .with("normal_limit", normal_limit(&cfg)?.value());
        return Ok(Report::new("exponent", vec![record]));
    }
    let family = a
        .ns
        .iter()
        .map(|&n| {
            let l = (n as f64 * (1.0 - a.r) / a.r).round() as u64;
            let k_low = (p_low * l as f64).round() as u64;
            let k_high = (p_high * l as f64).round() as u64;
            ProtocolParams::new(n, l, a.rate, k_low, k_high, SlackSchedule::constant(a.eps))
        })
        .collect::<finitekey::Result<Vec<_>>>()?;
    let seq = exponent_convergence_check(&family, &cfg)?;
    let records = family
        .iter()
        .zip(&seq)
        .map(|(params, &v)| {
            Record::new()
                .with("n", params.n)
                .with("l", params.l)
                .with("k_low", params.k_low)
                .with("k_high", params.k_high)
                .with("value", v)
                .with("exponent", e)
                .with("relative_gap", if e > 0.0 { (v - e).abs() / e } else { f64::NAN })
        })
        .collect();
    Ok(Report::new("exponent", records))
}

fn compare(a: &CompareArgs) -> Result<Report> {
    let mut records = Vec::new();
    for &p in &a.ps {
        let p = prob("--p", p)?;
        for &n in &a.ns {
            let c = compare_with_watanabe(n, p, a.eps, a.rate)?;
            records.push(
                Record::new()
                    .with("n", c.n)
                    .with("p", c.p)
                    .with("eps", c.eps)
                    .with("exponent", c.exponent)
                    .with("large_deviation", c.large_deviation)
                    .with("watanabe", c.watanabe)
                    .with("dominates", c.large_deviation < c.watanabe),
            );
        }
    }
    Ok(Report::new("compare", records))
}

fn parse_count(spec: &str, value: &str) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(CliError::Usage(format!("--code {spec}: expected a positive integer"))),
    }
}

/// The code and, for block codes, a decoder that works block by block.
fn load_code(spec: &str) -> Result<(BinaryCode, Option<Arc<dyn Decoder>>)> {
    if let Some(b) = spec.strip_prefix("hamming:") {
        let blocks = parse_count(spec, b)?;
        let inner = SyndromeDecoder::new(&BinaryCode::hamming74())?;
        let dec = BlockDecoder::new(Box::new(inner), blocks);
        return Ok((dec.code().clone(), Some(Arc::new(dec))));
    }
    if let Some(n) = spec.strip_prefix("repetition:") {
        return Ok((BinaryCode::repetition(parse_count(spec, n)?), None));
    }
    let text = std::fs::read_to_string(spec).map_err(|source| CliError::Io {
        path: spec.into(),
        source,
    })?;
    Ok((BinaryCode::from_text(&text)?, None))
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<Report> {
    let (code, decoder) = load_code(&a.code)?;
    let n = code.len() as u64;
    let l = a.l.unwrap_or(n);
    let l_plus = a.l_plus.unwrap_or(l);
    let rate = a.rate.unwrap_or(code.dim() as f64 / n as f64);
    let k_high = a.k_high.unwrap_or((n.saturating_sub(1) / 2).min(l));
    let params = ProtocolParams::new(n, l, rate, a.k_low, k_high, SlackSchedule::constant(a.delta))?;
    let thresholds = (a.k_low_plus, a.k_high_plus.unwrap_or(l_plus));
    let (p_bit, p_phase) = (prob("--p-bit", a.p_bit)?, prob("--p-phase", a.p_phase)?);
    let n_times = a.n_times.unwrap_or(n);
    let cfg = match decoder {
        Some(dec) => SimConfig::with_code_decoder(params, l_plus, n_times, thresholds, p_bit, p_phase, dec, seed)?,
        None => SimConfig::new(params, l_plus, n_times, thresholds, p_bit, p_phase, code.clone(), seed)?,
    }
    .with_repeat(a.repeat)?;
    let runs = simulate_transcripts(&cfg, a.runs)?;
    if let Some(path) = &a.transcripts {
        write_transcripts(path, &runs)?;
    }
    let s = summarize(&cfg, &runs);
    let record = Record::new()
        .with("code_length", n)
        .with("code_dim", code.dim())
        .with("seed", seed)
        .with("runs", s.runs)
        .with("blocks", s.blocks)
        .with("abort_rate_plus", s.abort_rate_plus)
        .with("abort_rate_times", s.abort_rate_times)
        .with("agreement_rate", s.agreement_rate)
        .with("mean_key_len", s.mean_key_len)
        .with("mean_k_plus", s.mean_k_plus)
        .with("mean_k_times", s.mean_k_times)
        .with("k_plus_hist", s.k_plus_hist)
        .with("k_times_hist", s.k_times_hist);
    Ok(Report::new("simulate", vec![record]))
}

fn write_transcripts(path: &Path, runs: &[Vec<finitekey::protocol::RunTranscript>]) -> Result<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for (run, blocks) in runs.iter().enumerate() {
        for t in blocks {
            let mut v = serde_json::to_value(t)?;
            v.as_object_mut().expect("transcript is an object").insert("run".into(), run.into());
            serde_json::to_writer(&mut out, &v)?;
            writeln!(out).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

#[derive(Debug)]
struct Tally {
    instances: u64,
    violations: u64,
    min_slack: f64,
    max_slack: f64,
    saturated: bool,
}

impl Tally {
    fn new() -> Self {
        Tally {
            instances: 0,
            violations: 0,
            min_slack: f64::INFINITY,
            max_slack: f64::NEG_INFINITY,
            saturated: false,
        }
    }

    fn record(&mut self, value: f64, bound: f64) {
        let slack = bound - value;
        self.instances += 1;
        self.min_slack = self.min_slack.min(slack);
        self.max_slack = self.max_slack.max(slack);
        self.saturated |= slack.abs() < AUDIT_TOL;
        if slack < -AUDIT_TOL {
            self.violations += 1;
        }
    }
}

fn audit_record(lemma: &str, scope: String, t: &Tally) -> Record {
    Record::new()
        .with("lemma", lemma)
        .with("scope", scope)
        .with("instances", t.instances)
        .with("violations", t.violations)
        .with("min_slack", t.min_slack)
        .with("max_slack", t.max_slack)
        .with("saturated", t.saturated)
        .with("result", if t.violations == 0 { "PASS" } else { "FAIL" })
}

/// Runs `check` per instance, collecting `(value, bound)` pairs.
fn tally_audit(
    lemma: &str,
    count: usize,
    per_instance: bool,
    mut check: impl FnMut() -> Result<(f64, f64)>,
) -> Result<(Vec<Record>, Tally)> {
    let mut total = Tally::new();
    let mut records = Vec::new();
    for i in 0..count {
        let (value, bound) = check()?;
        total.record(value, bound);
        if per_instance {
            let mut one = Tally::new();
            one.record(value, bound);
            records.push(audit_record(lemma, format!("instance {i}"), &one));
        }
    }
    records.push(audit_record(lemma, "aggregate".into(), &total));
    Ok((records, total))
}

fn oracle(a: &OracleArgs, seed: u64) -> Result<(Report, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match a.lemma.as_str() {
        "1" => {
            let n = a.n.unwrap_or(2);
            let (records, t) = tally_audit("1", a.trials, a.per_instance, || {
                let d = PauliDistribution::random(n, &mut rng)?;
                Ok((lemma1_eve_information(&d), lemma1_bound(&d)))
            })?;
            Ok((Report::new("oracle-check", records), t.violations == 0))
        }
        "7" => {
            let d = a.d.unwrap_or(4);
            let count = if a.uniform { 1 } else { a.trials };
            let (records, t) = tally_audit("7", count, a.per_instance, || {
                let p = if a.uniform {
                    vec![1.0 / d as f64; d]
                } else {
                    random_distribution(d, &mut rng)
                };
                Ok(lemma7_check(&p)?)
            })?;
            let mut report = Report::new("oracle-check", records);
            if a.uniform && t.saturated {
                report = report.note(format!("uniform distribution on {d} outcomes attains equality"));
            }
            Ok((report, t.violations == 0))
        }
        _ => lemma2(a, &mut rng),
    }
}

/// Exponential weights with some outcomes set to zero.
fn random_distribution(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut p: Vec<f64> = (0..d)
        .map(|_| if rng.random_bool(0.8) { -(1.0 - rng.random::<f64>()).ln() } else { 0.0 })
        .collect();
    if p.iter().all(|&x| x == 0.0) {
        p[0] = 1.0;
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

fn lemma2(a: &OracleArgs, rng: &mut ChaCha8Rng) -> Result<(Report, bool)> {
    let n = a.n.unwrap_or(4);
    if a.t + a.s > n {
        return Err(finitekey::Error::Dimension(format!("t + s = {} exceeds n = {n}", a.t + a.s)).into());
    }
    if a.exhaustive {
        if n > ENSEMBLE_LENGTH_LIMIT {
            return Err(finitekey::Error::SizeGuard {
                what: "block length for enumeration",
                value: n,
                limit: ENSEMBLE_LENGTH_LIMIT,
            }
            .into());
        }
        let count = extension_count(n, a.t, a.s);
        if count > ENSEMBLE_SIZE_LIMIT {
            return Err(finitekey::Error::SizeGuard {
                what: "ensemble size",
                value: usize::try_from(count).unwrap_or(usize::MAX),
                limit: ENSEMBLE_SIZE_LIMIT as usize,
            }
            .into());
        }
    }
    let w = match a.channel.split_once(':') {
        Some(("bsc", p)) => {
            let p: f64 = p
                .parse()
                .map_err(|_| CliError::Usage(format!("--channel {}: bad crossover probability", a.channel)))?;
            AdditiveChannel::bsc(n, prob("crossover probability", p)?)?
        }
        None if a.channel == "random" => AdditiveChannel::random(n, rng)?,
        _ => return Err(CliError::Usage(format!("--channel {}: expected bsc:p or random", a.channel))),
    };
    let c1 = sample_subcode(n, a.t, rng)?;
    let audit = lemma2_oracle(&c1, a.s, &w, a.trials, rng)?;
    let slack = audit.bound - audit.average_error;
    let record = Record::new()
        .with("lemma", "2")
        .with("scope", "aggregate")
        .with("instances", audit.codes)
        .with("violations", u64::from(!audit.passed))
        .with("min_slack", slack)
        .with("max_slack", slack)
        .with("saturated", slack.abs() < AUDIT_TOL)
        .with("result", if audit.passed { "PASS" } else { "FAIL" })
        .with("average_error", audit.average_error)
        .with("bound", audit.bound)
        .with("std_error", if audit.exhaustive { Value::Null } else { audit.std_error.into() })
        .with("exhaustive", audit.exhaustive);
    Ok((Report::new("oracle-check", vec![record]), audit.passed))
}
