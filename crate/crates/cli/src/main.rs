//! `nidgame`: referee, strategies and analytics for the two adversarial
//! token-placement games G(n, c, k) and H(n, eps, a).
//!
//! Exit codes of match-producing commands: 0 when Alice wins, 1 when Bob
//! wins, 2 on malformed input.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nidgame_cli::{experiment, fuzz, jsonl, lemmas, oracle_file, strategies};
use nidgame_core::board::Player;
use nidgame_core::bob::{make_synthetic_oracle, FprimeMode, OracleGenSpec};
use nidgame_core::rat::parse_ratio;
use nidgame_core::referee::{run_match, GameConfig, GameKind, Witness, DEFAULT_MAX_ROUNDS};

#[derive(Parser)]
#[command(
    name = "nidgame",
    version,
    about = "Adversarial token-placement games over sparse grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one match between two named strategies.
    Play(PlayArgs),
    /// Re-simulate a transcript and verify its verdict.
    Replay { path: PathBuf },
    /// Random matches with replay, ledger and verdict-soundness audits.
    Fuzz(FuzzArgs),
    /// Property suites for the sequence and block inequalities.
    CheckLemmas(CheckArgs),
    /// Parameter sweep from a JSON spec into a CSV.
    Experiment(ExperimentArgs),
    /// Generate a counting-constrained synthetic oracle spec.
    OracleGen(OracleGenArgs),
}

#[derive(Args)]
struct PlayArgs {
    /// g or h
    #[arg(long)]
    game: String,
    #[arg(long)]
    n: u8,
    /// Sandwich slack (game g).
    #[arg(long)]
    c: Option<u32>,
    /// Oscillation budget (game g).
    #[arg(long)]
    k: Option<u64>,
    /// Band radius as p/q (game h).
    #[arg(long)]
    eps: Option<String>,
    /// Total-update budget as p/q (game h).
    #[arg(long)]
    a: Option<String>,
    /// Alice strategy: strat-h | strat-g[:strict=true] | random | random-wild
    #[arg(long)]
    alice: String,
    /// Bob strategy: clamp[:eps=p/q,c=N] | budget[:pain=p/q] | random |
    /// null[:f=p/q] | oracle[:spec=PATH,variant=g|h,c=N,smax=N,...]
    #[arg(long)]
    bob: String,
    /// sqrt | const:N | pow:P/Q
    #[arg(long, default_value = "sqrt")]
    threshold: String,
    #[arg(long, env = "NIDGAME_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    max_rounds: u32,
    /// Write the match transcript (JSON Lines) here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Print one line per strategy recursion level.
    #[arg(long, default_value_t = false)]
    trace: bool,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    #[arg(long, default_value_t = 3)]
    n_min: u8,
    #[arg(long, default_value_t = 8)]
    n_max: u8,
    /// g, h or both
    #[arg(long, default_value = "both")]
    game: String,
    #[arg(long, default_value = "random-wild")]
    alice: String,
    #[arg(long, default_value = "random")]
    bob: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Scales every suite's trial count (100 trials per unit for the ratio
    /// bound, 2 per unit for block lemmas, 5 per unit for indicators).
    #[arg(long, default_value_t = 100)]
    scale: u64,
    #[arg(long, env = "NIDGAME_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON sweep specification.
    #[arg(long)]
    spec: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleGenArgs {
    #[arg(long)]
    n: u8,
    #[arg(long, env = "NIDGAME_SEED", default_value_t = 0)]
    seed: u64,
    /// exact | lag:K | noise:P/Q
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Fold a prefix-complexity style offset into the final values.
    #[arg(long, default_value_t = false)]
    prefix: bool,
    #[arg(long)]
    out: PathBuf,
}

fn build_config(args: &PlayArgs) -> Result<GameConfig> {
    let kind = match args.game.as_str() {
        "g" => GameKind::G {
            c: args.c.ok_or_else(|| anyhow!("--game g requires --c"))?,
            k: args.k.ok_or_else(|| anyhow!("--game g requires --k"))?,
        },
        "h" => GameKind::H {
            eps: parse_ratio(
                args.eps
                    .as_deref()
                    .ok_or_else(|| anyhow!("--game h requires --eps"))?,
            )?,
            a: parse_ratio(
                args.a
                    .as_deref()
                    .ok_or_else(|| anyhow!("--game h requires --a"))?,
            )?,
        },
        other => bail!("--game must be g or h, got '{other}'"),
    };
    let config = GameConfig {
        n: args.n,
        kind,
        threshold: jsonl::parse_threshold(&args.threshold)?,
        max_rounds: args.max_rounds,
    };
    config.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(config)
}

fn cmd_play(args: &PlayArgs) -> Result<i32> {
    let config = build_config(args)?;
    let mut alice = strategies::AliceKind::build(&args.alice, args.seed)?;
    let mut bob =
        strategies::BobKind::build(&args.bob, args.seed.wrapping_mul(0x9e3779b9), config.n)?;
    let transcript = run_match(config, &mut alice, &mut bob).map_err(|e| anyhow!("{e}"))?;

    println!("{}", transcript.verdict);
    if let Witness::Pair(pair) = &transcript.verdict.witness {
        if let Some(f) = jsonl::witness_value(&transcript, pair) {
            println!("  declared f({pair}) = {f}");
        }
    }
    if args.trace {
        for line in alice.level_lines() {
            println!("  {line}");
        }
    }
    if let Some(summary) = bob.summary() {
        println!("  {summary}");
    }
    if let Some(path) = &args.transcript {
        std::fs::write(path, jsonl::write_transcript(&transcript)?)
            .with_context(|| format!("writing {}", path.display()))?;
        println!("transcript written to {}", path.display());
    }
    Ok(exit_code_for(transcript.verdict.winner))
}

fn exit_code_for(winner: Player) -> i32 {
    match winner {
        Player::Alice => 0,
        Player::Bob => 1,
    }
}

fn cmd_replay(path: &PathBuf) -> Result<i32> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let transcript = jsonl::read_transcript(&text)?;
    let verdict = nidgame_core::referee::replay(&transcript).map_err(|e| anyhow!("{e}"))?;
    println!("{verdict}");
    Ok(exit_code_for(verdict.winner))
}

fn cmd_fuzz(args: &FuzzArgs) -> Result<i32> {
    let report = fuzz::run_fuzz(&fuzz::FuzzOptions {
        seeds: args.seeds,
        n_min: args.n_min,
        n_max: args.n_max,
        game: &args.game,
        alice: &args.alice,
        bob: &args.bob,
    })?;
    for line in report.lines() {
        println!("{line}");
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn cmd_check_lemmas(args: &CheckArgs) -> Result<i32> {
    let reports = lemmas::run_all(args.scale, args.seed)?;
    let mut ok = true;
    for report in &reports {
        println!("{}", report.line());
        ok &= report.passed();
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let spec: experiment::ExperimentSpec = serde_json::from_str(&text).context("sweep spec")?;
    let rows = experiment::run_experiment(&spec, &args.out)?;
    println!("{} rows written to {}", rows.len(), args.out.display());
    for line in experiment::summary_lines(&spec, &rows) {
        println!("  {line}");
    }
    Ok(0)
}

fn cmd_oracle_gen(args: &OracleGenArgs) -> Result<i32> {
    let mode = if args.mode == "exact" {
        FprimeMode::Exact
    } else if let Some(lag) = args.mode.strip_prefix("lag:") {
        FprimeMode::Lagged(lag.parse().context("lag")?)
    } else if let Some(eps) = args.mode.strip_prefix("noise:") {
        FprimeMode::Noisy {
            eps: parse_ratio(eps)?,
        }
    } else {
        bail!("--mode must be exact, lag:K or noise:P/Q");
    };
    let spec = OracleGenSpec {
        mode,
        prefix_mode: args.prefix,
        ..OracleGenSpec::exact(args.n)
    };
    let oracle = make_synthetic_oracle(&spec, args.seed);
    oracle.verify_counting().map_err(|e| anyhow!("{e}"))?;
    std::fs::write(&args.out, oracle_file::to_json(&oracle)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("oracle spec written to {}", args.out.display());
    Ok(0)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Play(args) => cmd_play(args),
        Command::Replay { path } => cmd_replay(path),
        Command::Fuzz(args) => cmd_fuzz(args),
        Command::CheckLemmas(args) => cmd_check_lemmas(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::OracleGen(args) => cmd_oracle_gen(args),
    }
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}
