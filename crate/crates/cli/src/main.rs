mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use output::Format;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "finitekey", version, about = "Finite-length security bounds for BB84 key distribution")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Significant digits for text and csv output.
    #[arg(long, global = true, default_value_t = 6)]
    pub digits: usize,

    /// Seed for every random draw.
    #[arg(long, global = true, env = "FINITEKEY_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds on the total and per-bit information of the eavesdropper.
    Bound(BoundArgs),
    /// Normal-approximation security table.
    Table(TableArgs),
    /// Slack giving a target normal-approximation level.
    SolveDelta(SolveDeltaArgs),
    /// Large-deviation exponent, optionally against finite-length bounds.
    Exponent(ExponentArgs),
    /// Large-deviation bound against the earlier polynomial bound.
    Compare(CompareArgs),
    /// Monte-Carlo simulation of the post-processing pipeline.
    Simulate(SimulateArgs),
    /// Exact small-scale audits of the supporting lemmas.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("thresholds").required(true).multiple(true).args(["k", "k_low", "k_high"])))]
#[command(group(ArgGroup::new("slack").required(true).args(["delta", "delta_table", "delta_from_eps"])))]
pub struct BoundArgs {
    /// Raw-key length.
    #[arg(long)]
    pub n: u64,
    /// Number of check bits.
    #[arg(long)]
    pub l: u64,
    /// Rate of the error-correcting code.
    #[arg(long = "R", visible_alias = "rate")]
    pub rate: f64,
    /// Sets both thresholds.
    #[arg(long, conflicts_with_all = ["k_low", "k_high"])]
    pub k: Option<u64>,
    #[arg(long, requires = "k_high")]
    pub k_low: Option<u64>,
    #[arg(long, requires = "k_low")]
    pub k_high: Option<u64>,
    /// Constant slack.
    #[arg(long)]
    pub delta: Option<f64>,
    /// File of `k delta` lines covering every count from k_low to k_high.
    #[arg(long)]
    pub delta_table: Option<PathBuf>,
    /// Slack per count solved for this normal-approximation level.
    #[arg(long)]
    pub delta_from_eps: Option<f64>,
    #[arg(long, value_enum, default_value_t = LowRule::Displayed)]
    pub low_rule: LowRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LowRule {
    Displayed,
    Derived,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = finitekey::asymptotics::TABLE_N)]
    pub n: u64,
    /// Observed check error rate; `k = round(rate * l)`.
    #[arg(long, default_value_t = finitekey::asymptotics::TABLE_ERROR_RATE)]
    pub error_rate: f64,
    #[arg(long, default_value_t = finitekey::asymptotics::TABLE_DELTA)]
    pub delta: f64,
    /// Check sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = finitekey::asymptotics::TABLE_CHECK_SIZES)]
    pub l: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct SolveDeltaArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub l: u64,
    #[arg(long)]
    pub k: u64,
    /// Target level, at most 1/2.
    #[arg(long)]
    pub eps: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("range").required(true).multiple(true).args(["p", "p_low", "p_high"])))]
pub struct ExponentArgs {
    /// `n / (n + l)`.
    #[arg(long)]
    pub r: f64,
    /// Sets both ends of the error-rate range.
    #[arg(long, conflicts_with_all = ["p_low", "p_high"])]
    pub p: Option<f64>,
    #[arg(long, requires = "p_high")]
    pub p_low: Option<f64>,
    #[arg(long, requires = "p_low")]
    pub p_high: Option<f64>,
    /// Constant slack.
    #[arg(long)]
    pub eps: f64,
    /// Raw-key lengths at which to evaluate `(-r/n) log2` of the total bound.
    #[arg(long = "n", value_delimiter = ',')]
    pub ns: Vec<u64>,
    /// Code rate for the finite-length evaluations.
    #[arg(long = "R", visible_alias = "rate", default_value_t = 0.5)]
    pub rate: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long = "p", value_delimiter = ',', default_values_t = [0.02, 0.05, 0.075, 0.1])]
    pub ps: Vec<f64>,
    #[arg(long = "n", value_delimiter = ',', default_values_t = [1_000u64, 10_000, 100_000, 1_000_000])]
    pub ns: Vec<u64>,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long = "R", visible_alias = "rate", default_value_t = 1.0)]
    pub rate: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `hamming:B` (B copies of the [7,4] code), `repetition:N`, or a
    /// generator-matrix file.
    #[arg(long)]
    pub code: String,
    /// × basis check bits; defaults to the code length.
    #[arg(long)]
    pub l: Option<u64>,
    /// + basis check bits; defaults to `l`.
    #[arg(long)]
    pub l_plus: Option<u64>,
    /// × basis raw-key length; defaults to the code length.
    #[arg(long)]
    pub n_times: Option<u64>,
    /// Rate used to size privacy amplification; defaults to the code rate.
    #[arg(long = "R", visible_alias = "rate")]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub k_low: u64,
    /// Defaults to `min((n - 1) / 2, l)`.
    #[arg(long)]
    pub k_high: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub k_low_plus: u64,
    /// Defaults to `l_plus`.
    #[arg(long)]
    pub k_high_plus: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_bit: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_phase: f64,
    /// Key blocks per estimation phase.
    #[arg(long, default_value_t = 1)]
    pub repeat: u32,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Write every transcript as a json line to this file.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["1", "2", "7"]))]
    pub lemma: String,
    /// Qubits (lemma 1) or block length (lemma 2).
    #[arg(long)]
    pub n: Option<usize>,
    /// Outcomes (lemma 7).
    #[arg(long)]
    pub d: Option<usize>,
    /// Check only the uniform distribution (lemma 7).
    #[arg(long)]
    pub uniform: bool,
    /// Dimension of the inner code (lemma 2).
    #[arg(long, default_value_t = 0)]
    pub t: usize,
    /// Added dimension of the random extension (lemma 2).
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// `bsc:p` or `random` (lemma 2).
    #[arg(long, default_value = "random")]
    pub channel: String,
    /// Require full enumeration of the ensemble (lemma 2).
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Emit one record per checked instance before the aggregate.
    #[arg(long)]
    pub per_instance: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok((report, passed)) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            if let Err(e) = report.render(cli.format, cli.digits, &mut out).and_then(|_| out.flush()) {
                eprintln!("finitekey: cannot write output: {e}");
                return ExitCode::from(1);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            if cli.format == Format::Json {
                let doc = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
                eprintln!("{doc}");
            } else {
                eprintln!("finitekey: error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
