//! Oracle specification files: per-string and per-pair staircases plus the
//! `fprime` mode, as JSON.

use std::collections::BTreeMap;

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};

use nidgame_core::board::{BitStr, UPair};
use nidgame_core::bob::{ApproxOracle, FprimeMode, Staircase, SyntheticOracle};
use nidgame_core::rat::{format_ratio, parse_ratio};

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModeDto {
    Exact,
    Lag(u64),
    Noise(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct XScheduleDto {
    s: String,
    steps: Vec<(u64, u32)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ZScheduleDto {
    lo: String,
    hi: String,
    steps: Vec<(u64, u32)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OracleSpecDto {
    n: u8,
    seed: u64,
    mode: ModeDto,
    x: Vec<XScheduleDto>,
    z: Vec<ZScheduleDto>,
}

pub fn to_json(oracle: &SyntheticOracle) -> Result<String> {
    let mode = match oracle.mode() {
        FprimeMode::Exact => ModeDto::Exact,
        FprimeMode::Lagged(lag) => ModeDto::Lag(*lag),
        FprimeMode::Noisy { eps } => ModeDto::Noise(format_ratio(eps)),
    };
    let dto = OracleSpecDto {
        n: oracle.n(),
        seed: oracle.seed(),
        mode,
        x: oracle
            .x_staircases()
            .iter()
            .map(|(u, st)| XScheduleDto {
                s: u.to_string(),
                steps: st.steps().to_vec(),
            })
            .collect(),
        z: oracle
            .z_staircases()
            .iter()
            .map(|(p, st)| ZScheduleDto {
                lo: p.lo().to_string(),
                hi: p.hi().to_string(),
                steps: st.steps().to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&dto)?)
}

pub fn from_json(text: &str) -> Result<SyntheticOracle> {
    let dto: OracleSpecDto = serde_json::from_str(text).context("oracle spec")?;
    let mode = match dto.mode {
        ModeDto::Exact => FprimeMode::Exact,
        ModeDto::Lag(lag) => FprimeMode::Lagged(lag),
        ModeDto::Noise(eps) => FprimeMode::Noisy {
            eps: parse_ratio(&eps)?,
        },
    };
    let mut x = BTreeMap::new();
    for entry in dto.x {
        let u = BitStr::parse(&entry.s).map_err(|e| anyhow!("{e}"))?;
        x.insert(u, Staircase::new(entry.steps).map_err(|e| anyhow!("{e}"))?);
    }
    let mut z = BTreeMap::new();
    for entry in dto.z {
        let lo = BitStr::parse(&entry.lo).map_err(|e| anyhow!("{e}"))?;
        let hi = BitStr::parse(&entry.hi).map_err(|e| anyhow!("{e}"))?;
        let pair = UPair::new(lo, hi).map_err(|e| anyhow!("{e}"))?;
        z.insert(
            pair,
            Staircase::new(entry.steps).map_err(|e| anyhow!("{e}"))?,
        );
    }
    SyntheticOracle::new(dto.n, x, z, mode, dto.seed).map_err(|e| anyhow!("{e}"))
}
