//! Randomized referee audit: every verdict must re-validate under replay,
//! transcripts must round-trip byte-exactly, and the incremental budget
//! ledgers must agree with recounts.

use std::collections::BTreeMap;

use anyhow::{anyhow, Result};

use nidgame_core::board::PlaceOutcome;
use nidgame_core::rat::rat;
use nidgame_core::referee::{
    replay, replay_final_state, run_match, GameConfig, GameState, Threshold, Verdict,
    VerdictReason, Witness,
};

use crate::jsonl;
use crate::strategies::{AliceKind, BobKind};

#[derive(Debug, Default)]
pub struct FuzzReport {
    pub runs: u64,
    pub failures: Vec<String>,
    pub reasons: BTreeMap<&'static str, u64>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out = vec![format!(
            "[{}] fuzz: {} runs, {} failures",
            if self.passed() { "PASS" } else { "FAIL" },
            self.runs,
            self.failures.len()
        )];
        for (reason, count) in &self.reasons {
            out.push(format!("  verdicts via {reason}: {count}"));
        }
        out.extend(self.failures.iter().map(|f| format!("  failure: {f}")));
        out
    }
}

fn soundness(state: &GameState, verdict: &Verdict) -> Result<()> {
    match (&verdict.reason, &verdict.witness) {
        (
            VerdictReason::ReqC | VerdictReason::ReqK | VerdictReason::ReqEps | VerdictReason::ReqA,
            Witness::Pair(pair),
        ) => {
            if state.eval_requirement(verdict.reason, pair) {
                return Err(anyhow!("witnessed requirement passes on replayed state"));
            }
        }
        (
            VerdictReason::RowRestriction | VerdictReason::AliceRowRestriction,
            Witness::Placement(p),
        ) => {
            let mut grid = state.grid().clone();
            if !matches!(grid.place(p), PlaceOutcome::Violation(_)) {
                return Err(anyhow!("witnessed placement no longer violates a budget"));
            }
        }
        _ => {}
    }
    Ok(())
}

fn audit_one(
    config: GameConfig,
    alice_spec: &str,
    bob_spec: &str,
    seed: u64,
) -> Result<&'static str> {
    let mut alice = AliceKind::build(alice_spec, seed)?;
    let mut bob = BobKind::build(bob_spec, seed.wrapping_mul(0x9e3779b9), config.n)?;
    let t = run_match(config, &mut alice, &mut bob).map_err(|e| anyhow!("{e}"))?;

    let replayed = replay(&t).map_err(|e| anyhow!("replay: {e}"))?;
    if replayed != t.verdict {
        return Err(anyhow!("replay verdict differs"));
    }
    let (state, _) = replay_final_state(&t).map_err(|e| anyhow!("{e}"))?;
    state
        .grid()
        .audit()
        .map_err(|e| anyhow!("ledger audit: {e}"))?;
    soundness(&state, &t.verdict)?;

    let text = jsonl::write_transcript(&t)?;
    let parsed = jsonl::read_transcript(&text)?;
    if parsed != t {
        return Err(anyhow!("transcript did not round-trip structurally"));
    }
    let rewritten = jsonl::write_transcript(&parsed)?;
    if rewritten != text {
        return Err(anyhow!("transcript did not round-trip byte-exactly"));
    }
    Ok(t.verdict.reason.as_str())
}

pub struct FuzzOptions<'a> {
    pub seeds: u64,
    pub n_min: u8,
    pub n_max: u8,
    pub game: &'a str,
    pub alice: &'a str,
    pub bob: &'a str,
}

pub fn run_fuzz(opts: &FuzzOptions<'_>) -> Result<FuzzReport> {
    let mut report = FuzzReport::default();
    for seed in 0..opts.seeds {
        let n = opts.n_min + (seed % u64::from(opts.n_max - opts.n_min + 1)) as u8;
        let game_g = match opts.game {
            "g" => true,
            "h" => false,
            "both" => seed % 2 == 0,
            other => return Err(anyhow!("unknown game '{other}'")),
        };
        let config = if game_g {
            GameConfig::game_g(n, 1 + (seed % 3) as u32, seed % 4)
        } else {
            GameConfig::game_h(n, rat(3, 10), rat(1, 2)).with_threshold(Threshold::Const(2))
        };
        report.runs += 1;
        match audit_one(config, opts.alice, opts.bob, seed) {
            Ok(reason) => *report.reasons.entry(reason).or_insert(0) += 1,
            Err(e) => report.failures.push(format!("seed {seed} (n={n}): {e}")),
        }
    }
    Ok(report)
}
