//! Batch sweeps: a JSON spec expands into a parameter grid, each cell runs
//! one seeded match, rows land in a CSV in deterministic cell order.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use nidgame_core::rat::{format_ratio, parse_ratio};
use nidgame_core::referee::{run_match, GameConfig, GameKind, Transcript};
use num_traits::ToPrimitive;

use crate::jsonl::parse_threshold;
use crate::strategies::{AliceKind, BobKind};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub game: String,
    pub n: Vec<u8>,
    #[serde(default)]
    pub c: Vec<u32>,
    #[serde(default)]
    pub k: Vec<u64>,
    #[serde(default)]
    pub eps: Vec<String>,
    #[serde(default)]
    pub a: Vec<String>,
    #[serde(default = "default_thresholds")]
    pub threshold: Vec<String>,
    pub alice: String,
    pub bob: String,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub transcript_dir: Option<String>,
}

fn default_thresholds() -> Vec<String> {
    vec!["sqrt".into()]
}

fn default_seeds() -> u64 {
    1
}

#[derive(Debug)]
pub struct ResultRow {
    pub game: String,
    pub n: u8,
    pub c: Option<u32>,
    pub k: Option<u64>,
    pub eps: Option<String>,
    pub a: Option<String>,
    pub threshold: String,
    pub alice: String,
    pub bob: String,
    pub seed: u64,
    pub winner: String,
    pub reason: String,
    pub round: u32,
    pub levels: u32,
    pub max_osc: u64,
    pub max_tv: String,
    pub wall_ms: u128,
}

pub const CSV_HEADER: [&str; 17] = [
    "game",
    "n",
    "c",
    "k",
    "eps",
    "a",
    "threshold",
    "alice",
    "bob",
    "seed",
    "winner",
    "reason",
    "round",
    "levels",
    "max_osc",
    "max_tv",
    "wall_ms",
];

impl ResultRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.game.clone(),
            self.n.to_string(),
            self.c.map_or_else(String::new, |v| v.to_string()),
            self.k.map_or_else(String::new, |v| v.to_string()),
            self.eps.clone().unwrap_or_default(),
            self.a.clone().unwrap_or_default(),
            self.threshold.clone(),
            self.alice.clone(),
            self.bob.clone(),
            self.seed.to_string(),
            self.winner.clone(),
            self.reason.clone(),
            self.round.to_string(),
            self.levels.to_string(),
            self.max_osc.to_string(),
            self.max_tv.clone(),
            self.wall_ms.to_string(),
        ]
    }
}

fn series_maxima(t: &Transcript) -> (u64, String) {
    let mut max_osc = 0;
    let mut max_tv = nidgame_core::Rat::from_integer(0.into());
    for series in t.series.values() {
        max_osc = max_osc.max(series.oscillations());
        if series.total_update() > &max_tv {
            max_tv = series.total_update().clone();
        }
    }
    (max_osc, format_ratio(&max_tv))
}

struct Cell {
    config: GameConfig,
    threshold_label: String,
    c: Option<u32>,
    k: Option<u64>,
    eps: Option<String>,
    a: Option<String>,
    seed: u64,
}

fn expand(spec: &ExperimentSpec) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for &n in &spec.n {
        for threshold_label in &spec.threshold {
            let threshold = parse_threshold(threshold_label)?;
            match spec.game.as_str() {
                "g" => {
                    if spec.c.is_empty() || spec.k.is_empty() {
                        bail!("game g sweeps need c and k grids");
                    }
                    for &c in &spec.c {
                        for &k in &spec.k {
                            for s in 0..spec.seeds {
                                let config = GameConfig {
                                    n,
                                    kind: GameKind::G { c, k },
                                    threshold,
                                    max_rounds: 10_000,
                                };
                                cells.push(Cell {
                                    config,
                                    threshold_label: threshold_label.clone(),
                                    c: Some(c),
                                    k: Some(k),
                                    eps: None,
                                    a: None,
                                    seed: spec.base_seed + s,
                                });
                            }
                        }
                    }
                }
                "h" => {
                    if spec.eps.is_empty() || spec.a.is_empty() {
                        bail!("game h sweeps need eps and a grids");
                    }
                    for eps_s in &spec.eps {
                        for a_s in &spec.a {
                            for s in 0..spec.seeds {
                                let config = GameConfig {
                                    n,
                                    kind: GameKind::H {
                                        eps: parse_ratio(eps_s)?,
                                        a: parse_ratio(a_s)?,
                                    },
                                    threshold,
                                    max_rounds: 10_000,
                                };
                                cells.push(Cell {
                                    config,
                                    threshold_label: threshold_label.clone(),
                                    c: None,
                                    k: None,
                                    eps: Some(eps_s.clone()),
                                    a: Some(a_s.clone()),
                                    seed: spec.base_seed + s,
                                });
                            }
                        }
                    }
                }
                other => bail!("unknown game '{other}'"),
            }
        }
    }
    Ok(cells)
}

pub fn run_experiment(spec: &ExperimentSpec, out_csv: &Path) -> Result<Vec<ResultRow>> {
    let cells = expand(spec)?;
    let mut rows = Vec::with_capacity(cells.len());
    for (idx, cell) in cells.iter().enumerate() {
        let start = Instant::now();
        let mut alice = AliceKind::build(&spec.alice, cell.seed)?;
        let mut bob = BobKind::build(&spec.bob, cell.seed.wrapping_mul(0x9e3779b9), cell.config.n)?;
        let outcome = run_match(cell.config.clone(), &mut alice, &mut bob);
        let wall_ms = start.elapsed().as_millis();
        let row = match outcome {
            Ok(t) => {
                if let Some(dir) = &spec.transcript_dir {
                    std::fs::create_dir_all(dir)?;
                    let path = Path::new(dir).join(format!("cell-{idx:04}.jsonl"));
                    std::fs::write(&path, crate::jsonl::write_transcript(&t)?)
                        .with_context(|| format!("writing {}", path.display()))?;
                }
                let (max_osc, max_tv) = series_maxima(&t);
                ResultRow {
                    game: spec.game.clone(),
                    n: cell.config.n,
                    c: cell.c,
                    k: cell.k,
                    eps: cell.eps.clone(),
                    a: cell.a.clone(),
                    threshold: cell.threshold_label.clone(),
                    alice: spec.alice.clone(),
                    bob: spec.bob.clone(),
                    seed: cell.seed,
                    winner: t.verdict.winner.to_string(),
                    reason: t.verdict.reason.as_str().into(),
                    round: t.verdict.round,
                    levels: alice.levels_completed(),
                    max_osc,
                    max_tv,
                    wall_ms,
                }
            }
            Err(e) => {
                // Per-cell failures are recorded; the sweep continues.
                eprintln!("cell {idx} failed: {e}");
                ResultRow {
                    game: spec.game.clone(),
                    n: cell.config.n,
                    c: cell.c,
                    k: cell.k,
                    eps: cell.eps.clone(),
                    a: cell.a.clone(),
                    threshold: cell.threshold_label.clone(),
                    alice: spec.alice.clone(),
                    bob: spec.bob.clone(),
                    seed: cell.seed,
                    winner: "error".into(),
                    reason: format!("{e}"),
                    round: 0,
                    levels: 0,
                    max_osc: 0,
                    max_tv: "0/1".into(),
                    wall_ms,
                }
            }
        };
        rows.push(row);
    }

    let mut writer = csv::Writer::from_path(out_csv)
        .with_context(|| format!("opening {}", out_csv.display()))?;
    writer.write_record(CSV_HEADER)?;
    for row in &rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(rows)
}

/// Per-level inequality summaries: measured maxima against the per-level
/// forced quantities (delta per H level, 1/4 average growth per G level).
pub fn summary_lines(spec: &ExperimentSpec, rows: &[ResultRow]) -> Vec<String> {
    let mut out = Vec::new();
    for row in rows {
        if row.winner == "error" {
            out.push(format!("n={} seed={}: engine error", row.n, row.seed));
            continue;
        }
        match spec.game.as_str() {
            "h" => {
                let eps = row.eps.as_deref().and_then(|s| parse_ratio(s).ok());
                if let Some(eps) = eps {
                    let delta = nidgame_core::alice::forced_update_delta(&eps);
                    let floor = delta.to_f64().unwrap_or(0.0) * f64::from(row.levels);
                    out.push(format!(
                        "n={} seed={}: levels={} max_tv={} (>= delta*levels = {:.4})",
                        row.n, row.seed, row.levels, row.max_tv, floor
                    ));
                }
            }
            "g" => {
                let floor = f64::from(row.levels) / 4.0;
                out.push(format!(
                    "n={} seed={}: levels={} max_osc={} (avg growth >= levels/4 = {:.2})",
                    row.n, row.seed, row.levels, row.max_osc, floor
                ));
            }
            _ => {}
        }
    }
    out
}
