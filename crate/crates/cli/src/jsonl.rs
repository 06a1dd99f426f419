//! Transcript files: JSON Lines, one record per half-turn.
//!
//! First record `{"config": ...}`, then `{"round", "player", "placements",
//! ...}` per half-turn (Bob's also carry `f_default` at round 1 and the
//! sparse `f_updates`), final record `{"verdict": ...}`. Rationals are
//! always `p/q` in lowest terms, columns are bit strings (`Z` columns as
//! `"lo,hi"`), so a file re-serializes byte-for-byte.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use nidgame_core::board::{BitStr, Column, Player, TokenPlacement, UPair};
use nidgame_core::rat::{format_ratio, parse_ratio, Rat};
use nidgame_core::referee::{
    replay_final_state, AliceMove, BobMove, GameConfig, GameKind, Threshold, Transcript,
    TurnRecord, Verdict, VerdictReason, Witness,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDto {
    game: String,
    n: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<String>,
    threshold: String,
    max_rounds: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementDto {
    grid: String,
    col: String,
    row: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FUpdateDto {
    lo: String,
    hi: String,
    value: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TurnDto {
    round: u32,
    player: String,
    placements: Vec<PlacementDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_default: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_updates: Option<Vec<FUpdateDto>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDto {
    lo: String,
    hi: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictDto {
    winner: String,
    reason: String,
    round: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pair: Option<PairDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    placement: Option<PlacementDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigLine {
    config: ConfigDto,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerdictLine {
    verdict: VerdictDto,
}

pub fn parse_threshold(s: &str) -> Result<Threshold> {
    if s == "sqrt" {
        return Ok(Threshold::Sqrt);
    }
    if let Some(v) = s.strip_prefix("const:") {
        return Ok(Threshold::Const(v.parse().context("const threshold")?));
    }
    if let Some(v) = s.strip_prefix("pow:") {
        let (num, den) = match v.split_once('/') {
            Some((p, q)) => (p.parse()?, q.parse()?),
            None => (v.parse()?, 1),
        };
        return Ok(Threshold::Pow { num, den });
    }
    bail!("unknown threshold '{s}' (expected sqrt, const:N or pow:P/Q)")
}

fn config_to_dto(config: &GameConfig) -> ConfigDto {
    let (c, k, eps, a) = match &config.kind {
        GameKind::G { c, k } => (Some(*c), Some(*k), None, None),
        GameKind::H { eps, a } => (None, None, Some(format_ratio(eps)), Some(format_ratio(a))),
    };
    ConfigDto {
        game: config.kind.letter().to_string(),
        n: config.n,
        c,
        k,
        eps,
        a,
        threshold: config.threshold.to_string(),
        max_rounds: config.max_rounds,
    }
}

fn config_from_dto(dto: &ConfigDto) -> Result<GameConfig> {
    let kind = match dto.game.as_str() {
        "g" => GameKind::G {
            c: dto.c.ok_or_else(|| anyhow!("game g needs c"))?,
            k: dto.k.ok_or_else(|| anyhow!("game g needs k"))?,
        },
        "h" => GameKind::H {
            eps: parse_ratio(
                dto.eps
                    .as_deref()
                    .ok_or_else(|| anyhow!("game h needs eps"))?,
            )?,
            a: parse_ratio(dto.a.as_deref().ok_or_else(|| anyhow!("game h needs a"))?)?,
        },
        other => bail!("unknown game '{other}'"),
    };
    let config = GameConfig {
        n: dto.n,
        kind,
        threshold: parse_threshold(&dto.threshold)?,
        max_rounds: dto.max_rounds,
    };
    config.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(config)
}

fn placement_to_dto(p: &TokenPlacement) -> PlacementDto {
    match p.column {
        Column::X(u) => PlacementDto {
            grid: "x".into(),
            col: u.to_string(),
            row: p.row,
        },
        Column::Z(pair) => PlacementDto {
            grid: "z".into(),
            col: format!("{},{}", pair.lo(), pair.hi()),
            row: p.row,
        },
    }
}

fn placement_from_dto(dto: &PlacementDto, player: Player) -> Result<TokenPlacement> {
    let column = match dto.grid.as_str() {
        "x" => Column::X(BitStr::parse(&dto.col).map_err(|e| anyhow!("{e}"))?),
        "z" => {
            let (lo, hi) = dto
                .col
                .split_once(',')
                .ok_or_else(|| anyhow!("z column must be 'lo,hi'"))?;
            let lo = BitStr::parse(lo).map_err(|e| anyhow!("{e}"))?;
            let hi = BitStr::parse(hi).map_err(|e| anyhow!("{e}"))?;
            Column::Z(UPair::new(lo, hi).map_err(|e| anyhow!("{e}"))?)
        }
        other => bail!("unknown grid '{other}'"),
    };
    Ok(TokenPlacement {
        column,
        row: dto.row,
        player,
    })
}

fn player_from_str(s: &str) -> Result<Player> {
    match s {
        "alice" => Ok(Player::Alice),
        "bob" => Ok(Player::Bob),
        other => bail!("unknown player '{other}'"),
    }
}

fn reason_from_str(s: &str) -> Result<VerdictReason> {
    Ok(match s {
        "row_restriction" => VerdictReason::RowRestriction,
        "req_c" => VerdictReason::ReqC,
        "req_k" => VerdictReason::ReqK,
        "req_eps" => VerdictReason::ReqEps,
        "req_a" => VerdictReason::ReqA,
        "alice_no_move" => VerdictReason::AliceNoMove,
        "alice_row_restriction" => VerdictReason::AliceRowRestriction,
        "alice_error" => VerdictReason::AliceError,
        "bob_error" => VerdictReason::BobError,
        other => bail!("unknown verdict reason '{other}'"),
    })
}

fn verdict_to_dto(v: &Verdict) -> VerdictDto {
    let (pair, placement) = match &v.witness {
        Witness::None => (None, None),
        Witness::Pair(p) => (
            Some(PairDto {
                lo: p.lo().to_string(),
                hi: p.hi().to_string(),
            }),
            None,
        ),
        Witness::Placement(p) => (None, Some(placement_to_dto(p))),
    };
    VerdictDto {
        winner: v.winner.to_string(),
        reason: v.reason.as_str().into(),
        round: v.round,
        pair,
        placement,
    }
}

fn verdict_from_dto(dto: &VerdictDto) -> Result<Verdict> {
    let witness = match (&dto.pair, &dto.placement) {
        (Some(p), None) => {
            let lo = BitStr::parse(&p.lo).map_err(|e| anyhow!("{e}"))?;
            let hi = BitStr::parse(&p.hi).map_err(|e| anyhow!("{e}"))?;
            Witness::Pair(UPair::new(lo, hi).map_err(|e| anyhow!("{e}"))?)
        }
        (None, Some(p)) => {
            let player = player_from_str(&dto.winner)?.opponent();
            Witness::Placement(placement_from_dto(p, player)?)
        }
        (None, None) => Witness::None,
        _ => bail!("verdict with both pair and placement witnesses"),
    };
    Ok(Verdict {
        winner: player_from_str(&dto.winner)?,
        reason: reason_from_str(&dto.reason)?,
        round: dto.round,
        witness,
    })
}

/// Serializes a transcript to JSONL text.
pub fn write_transcript(t: &Transcript) -> Result<String> {
    let mut out = String::new();
    out.push_str(&serde_json::to_string(&ConfigLine {
        config: config_to_dto(&t.config),
    })?);
    out.push('\n');
    for turn in &t.turns {
        let dto = match turn {
            TurnRecord::Alice(round, mv) => TurnDto {
                round: *round,
                player: "alice".into(),
                placements: mv.placements.iter().map(placement_to_dto).collect(),
                f_default: None,
                f_updates: None,
            },
            TurnRecord::Bob(round, mv) => TurnDto {
                round: *round,
                player: "bob".into(),
                placements: mv.placements.iter().map(placement_to_dto).collect(),
                f_default: mv.f_default.as_ref().map(format_ratio),
                f_updates: Some(
                    mv.f_updates
                        .iter()
                        .map(|(pair, value)| FUpdateDto {
                            lo: pair.lo().to_string(),
                            hi: pair.hi().to_string(),
                            value: format_ratio(value),
                        })
                        .collect(),
                ),
            },
        };
        out.push_str(&serde_json::to_string(&dto)?);
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&VerdictLine {
        verdict: verdict_to_dto(&t.verdict),
    })?);
    out.push('\n');
    Ok(out)
}

/// Parses JSONL text back into a transcript. The declared-value series are
/// not stored in the file; they are reconstructed by re-simulation, which
/// also surfaces corrupted turn sequences.
pub fn read_transcript(text: &str) -> Result<Transcript> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| anyhow!("empty transcript"))?;
    let config_line: ConfigLine =
        serde_json::from_str(first).context("first record must be the config")?;
    let config = config_from_dto(&config_line.config)?;

    let mut turns = Vec::new();
    let mut verdict = None;
    for line in lines {
        if verdict.is_some() {
            bail!("records after the verdict");
        }
        if let Ok(v) = serde_json::from_str::<VerdictLine>(line) {
            verdict = Some(verdict_from_dto(&v.verdict)?);
            continue;
        }
        let dto: TurnDto = serde_json::from_str(line).context("malformed turn record")?;
        let player = player_from_str(&dto.player)?;
        let placements = dto
            .placements
            .iter()
            .map(|p| placement_from_dto(p, player))
            .collect::<Result<Vec<_>>>()?;
        let turn = match player {
            Player::Alice => TurnRecord::Alice(dto.round, AliceMove { placements }),
            Player::Bob => {
                let f_default = dto.f_default.as_deref().map(parse_ratio).transpose()?;
                let mut f_updates = std::collections::BTreeMap::new();
                for u in dto.f_updates.unwrap_or_default() {
                    let lo = BitStr::parse(&u.lo).map_err(|e| anyhow!("{e}"))?;
                    let hi = BitStr::parse(&u.hi).map_err(|e| anyhow!("{e}"))?;
                    let pair = UPair::new(lo, hi).map_err(|e| anyhow!("{e}"))?;
                    f_updates.insert(pair, parse_ratio(&u.value)?);
                }
                TurnRecord::Bob(
                    dto.round,
                    BobMove {
                        placements,
                        f_default,
                        f_updates,
                    },
                )
            }
        };
        turns.push(turn);
    }
    let verdict = verdict.ok_or_else(|| anyhow!("transcript lacks a verdict record"))?;

    let mut transcript = Transcript {
        config,
        turns,
        verdict,
        series: std::collections::BTreeMap::new(),
    };
    let (state, _) = replay_final_state(&transcript).map_err(|e| anyhow!("{e}"))?;
    transcript.series = state.series().clone();
    Ok(transcript)
}

/// Declared value for a verdict summary line.
pub fn witness_value(t: &Transcript, pair: &UPair) -> Option<Rat> {
    t.series.get(pair).and_then(|s| s.last().cloned())
}
