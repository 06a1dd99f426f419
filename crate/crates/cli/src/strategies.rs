//! Strategy construction from `name[:key=value,...]` command-line strings.

use anyhow::{anyhow, bail, Context, Result};

use nidgame_core::alice::{GStrategy, HStrategy};
use nidgame_core::bob::{
    make_synthetic_oracle, BudgetBob, ClampBob, FprimeMode, NullBob, OracleBob, OracleGenSpec,
    OracleVariant, RandomAlice, RandomBob, SyntheticOracle,
};
use nidgame_core::rat::{parse_ratio, rat, Rat};
use nidgame_core::referee::{
    AliceMove, AliceStrategy, BobMove, BobStrategy, GameState, StrategyError,
};

fn parse_params(spec: &str) -> Result<(&str, Vec<(&str, &str)>)> {
    match spec.split_once(':') {
        None => Ok((spec, Vec::new())),
        Some((name, rest)) => {
            let mut params = Vec::new();
            for item in rest.split(',').filter(|s| !s.is_empty()) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| anyhow!("parameter '{item}' is not key=value"))?;
                params.push((k, v));
            }
            Ok((name, params))
        }
    }
}

pub enum AliceKind {
    H(HStrategy),
    G(GStrategy),
    Random(RandomAlice),
}

impl AliceKind {
    pub fn build(spec: &str, seed: u64) -> Result<Self> {
        let (name, params) = parse_params(spec)?;
        match name {
            "strat-h" => {
                if let Some((k, _)) = params.first() {
                    bail!("strat-h takes no parameter '{k}'");
                }
                Ok(AliceKind::H(HStrategy::new()))
            }
            "strat-g" => {
                let mut strategy = GStrategy::new(seed);
                for (k, v) in params {
                    match k {
                        "strict" => strategy.allow_relaxed = v != "true",
                        _ => bail!("strat-g: unknown parameter '{k}'"),
                    }
                }
                Ok(AliceKind::G(strategy))
            }
            "random" => Ok(AliceKind::Random(RandomAlice::seeded(seed, true))),
            "random-wild" => Ok(AliceKind::Random(RandomAlice::seeded(seed, false))),
            other => bail!("unknown alice strategy '{other}'"),
        }
    }

    /// One line per recursion level, for the trace log.
    pub fn level_lines(&self) -> Vec<String> {
        match self {
            AliceKind::H(s) => s
                .reports()
                .iter()
                .map(|r| {
                    format!(
                        "level {}: n'={} d={} E=2^{} x_tokens={} pairs={} selected={} min_drop={}",
                        r.level,
                        r.n_cur,
                        r.d,
                        r.log_e,
                        r.x_tokens,
                        r.pairs_in_blocks,
                        r.selected_block.map_or("-".into(), |j| j.to_string()),
                        r.min_drop
                            .as_ref()
                            .map_or("-".into(), |d| d.to_string()),
                    )
                })
                .collect(),
            AliceKind::G(s) => s
                .reports()
                .iter()
                .map(|r| {
                    format!(
                        "level {}: n'={} x_tokens={} pairs={} selected={} rhs_avg={} sel_avg={} claims(held/void/violated)={}/{}/{}",
                        r.level,
                        r.n_cur,
                        r.x_tokens,
                        r.pairs_in_blocks,
                        r.selected_block.map_or("-".into(), |j| j.to_string()),
                        r.rhs_avg,
                        r.sel_avg.as_ref().map_or("-".into(), |a| a.to_string()),
                        r.claims.held,
                        r.claims.void,
                        r.claims.violated,
                    )
                })
                .collect(),
            AliceKind::Random(_) => Vec::new(),
        }
    }

    /// Levels that completed both moves and selected a block.
    pub fn levels_completed(&self) -> u32 {
        match self {
            AliceKind::H(s) => s.completed_levels(),
            AliceKind::G(s) => s.completed_levels(),
            AliceKind::Random(_) => 0,
        }
    }
}

impl AliceStrategy for AliceKind {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError> {
        match self {
            AliceKind::H(s) => s.next_move(state),
            AliceKind::G(s) => s.next_move(state),
            AliceKind::Random(s) => s.next_move(state),
        }
    }
}

pub enum BobKind {
    Clamp(ClampBob),
    Budget(BudgetBob),
    Random(RandomBob),
    Null(NullBob),
    Oracle(Box<OracleBob<SyntheticOracle>>),
}

impl BobKind {
    /// `n` sizes generated oracles; `seed` feeds seeded opponents.
    pub fn build(spec: &str, seed: u64, n: u8) -> Result<Self> {
        let (name, params) = parse_params(spec)?;
        match name {
            "clamp" => {
                let mut bob = ClampBob::new();
                for (k, v) in params {
                    match k {
                        "eps" => bob.eps_override = Some(parse_ratio(v)?),
                        "c" => bob.c_override = Some(v.parse().context("clamp c")?),
                        _ => bail!("clamp: unknown parameter '{k}'"),
                    }
                }
                Ok(BobKind::Clamp(bob))
            }
            "budget" => {
                let mut pain = rat(1, 10);
                for (k, v) in params {
                    match k {
                        "pain" => pain = parse_ratio(v)?,
                        _ => bail!("budget: unknown parameter '{k}'"),
                    }
                }
                Ok(BobKind::Budget(BudgetBob::new(pain)))
            }
            "random" => Ok(BobKind::Random(RandomBob::seeded(seed))),
            "null" => {
                let mut value = rat(1, 2);
                for (k, v) in params {
                    match k {
                        "f" => value = parse_ratio(v)?,
                        _ => bail!("null: unknown parameter '{k}'"),
                    }
                }
                Ok(BobKind::Null(NullBob { value }))
            }
            "oracle" => {
                let mut spec_path: Option<&str> = None;
                let mut variant = "g";
                let mut c = 2u32;
                let mut eps_prime: Option<Rat> = None;
                let mut s_max: Option<u64> = None;
                let mut mode = FprimeMode::Exact;
                for (k, v) in params {
                    match k {
                        "spec" => spec_path = Some(v),
                        "variant" => variant = v,
                        "c" => c = v.parse().context("oracle c")?,
                        "eps" => eps_prime = Some(parse_ratio(v)?),
                        "smax" => s_max = Some(v.parse().context("oracle smax")?),
                        "lag" => mode = FprimeMode::Lagged(v.parse().context("oracle lag")?),
                        "noise" => {
                            mode = FprimeMode::Noisy {
                                eps: parse_ratio(v)?,
                            }
                        }
                        _ => bail!("oracle: unknown parameter '{k}'"),
                    }
                }
                let oracle = match spec_path {
                    Some(path) => {
                        let text = std::fs::read_to_string(path)
                            .with_context(|| format!("reading oracle spec {path}"))?;
                        crate::oracle_file::from_json(&text)?
                    }
                    None => {
                        let gen = OracleGenSpec {
                            mode,
                            ..OracleGenSpec::exact(n)
                        };
                        make_synthetic_oracle(&gen, seed)
                    }
                };
                use nidgame_core::bob::ApproxOracle;
                let s_max = s_max.unwrap_or_else(|| oracle.stabilization_time() + 256);
                let variant = match variant {
                    "g" => OracleVariant::G { c },
                    "h" => OracleVariant::H {
                        c,
                        eps_prime: eps_prime.unwrap_or_else(|| rat(1, 5)),
                    },
                    other => bail!("oracle variant must be g or h, got '{other}'"),
                };
                Ok(BobKind::Oracle(Box::new(OracleBob::new(
                    oracle, variant, s_max,
                ))))
            }
            other => bail!("unknown bob strategy '{other}'"),
        }
    }

    pub fn summary(&self) -> Option<String> {
        match self {
            BobKind::Oracle(bob) => Some(format!(
                "oracle bob: moved {} rounds, stalls {}",
                bob.r_history.len(),
                bob.stalls
            )),
            _ => None,
        }
    }
}

impl BobStrategy for BobKind {
    fn next_move(&mut self, state: &GameState) -> Result<BobMove, StrategyError> {
        match self {
            BobKind::Clamp(s) => s.next_move(state),
            BobKind::Budget(s) => s.next_move(state),
            BobKind::Random(s) => s.next_move(state),
            BobKind::Null(s) => s.next_move(state),
            BobKind::Oracle(s) => s.next_move(state),
        }
    }
}
