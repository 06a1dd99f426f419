//! Alice's recursive winning strategies and the block-construction
//! subroutines they invoke.
//!
//! Both strategies walk a shrinking product `U' x V'` of disjoint string
//! sets. Each level anchors the declared values high (an X move capping
//! `max{X_u, X_v}`), drops `Z` on a union of blocks `U_j x V_j`, and
//! recurses into a block that survived Bob's reaction. The H strategy
//! forces a total-update of at least `delta = (1 - 2 eps) / 5` per level;
//! the G strategy forces the average oscillation count to grow by 1/4 per
//! level. Every per-level inequality is re-verified at runtime in exact
//! arithmetic and a violation surfaces as a strategy error, never a silent
//! pass.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::board::{BitStr, GridState, Player, TokenPlacement, UPair};
use crate::rat::{rat, rat_u, Rat};
use crate::referee::{AliceMove, AliceStrategy, GameKind, GameState, StrategyError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockError {
    #[error("block shapes violate the construction preconditions")]
    BadShape,
    #[error("pool exhausted while building block {0}; counting argument broken")]
    PoolExhausted(usize),
    #[error("no block satisfies the column-height requirement")]
    NoEligibleBlock,
    #[error("averaging selection failed after sampling and swap budget")]
    AveragingFailed,
}

fn is_pow2(x: usize) -> bool {
    x != 0 && x & (x - 1) == 0
}

/// Disjoint sets `V_1, ..., V_E` from `v_pool` such that every pair of
/// `U_j x V_j` has `Z_uv >= log_e`. Works because fewer than `N/2` strings
/// per block are forbidden: a forbidden `v` needs an opposing token below
/// row `log_e` in some slice `Z_u`, `u in U_j`, and row budgets cap those
/// at `2^log_e - 1` per slice.
pub fn build_partner_blocks(
    grid: &GridState,
    u_blocks: &[Vec<BitStr>],
    v_pool: &[BitStr],
    log_e: u32,
) -> Result<Vec<Vec<BitStr>>, BlockError> {
    let e = u_blocks.len();
    let n_pool = v_pool.len();
    let Some(block_size) = u_blocks.first().map(|b| b.len()) else {
        return Err(BlockError::BadShape);
    };
    if !is_pow2(e) || !is_pow2(n_pool) || e * 2 > n_pool {
        return Err(BlockError::BadShape);
    }
    if u_blocks.iter().any(|b| b.len() != block_size) || 2 * e * block_size != n_pool {
        return Err(BlockError::BadShape);
    }

    // Greedy in pool order with a shared cursor: a string skipped as
    // forbidden for one block stays available to later ones.
    let mut used = alloc::vec![false; n_pool];
    let mut first_free = 0usize;
    let mut out = Vec::with_capacity(e);
    for (j, block) in u_blocks.iter().enumerate() {
        let mut forbidden: BTreeSet<BitStr> = BTreeSet::new();
        for &u in block {
            for (pair, value) in grid.slice_tokens(u) {
                if value < log_e {
                    forbidden.insert(pair.other(u));
                }
            }
        }
        if forbidden.len() >= n_pool / 2 {
            return Err(BlockError::PoolExhausted(j));
        }
        let mut v_block = Vec::with_capacity(block_size);
        let mut idx = first_free;
        while v_block.len() < block_size && idx < n_pool {
            if !used[idx] && !forbidden.contains(&v_pool[idx]) {
                used[idx] = true;
                v_block.push(v_pool[idx]);
            }
            idx += 1;
        }
        if v_block.len() < block_size {
            return Err(BlockError::PoolExhausted(j));
        }
        while first_free < n_pool && used[first_free] {
            first_free += 1;
        }
        out.push(v_block);
    }
    Ok(out)
}

/// Smallest block index whose strings all have `X_u >= log_e`. Exists
/// whenever the blocks are disjoint: fewer than `2^log_e` columns can have
/// been dragged below `log_e`.
pub fn select_block_h(
    grid: &GridState,
    u_blocks: &[Vec<BitStr>],
    log_e: u32,
) -> Result<usize, BlockError> {
    u_blocks
        .iter()
        .position(|block| block.iter().all(|&u| grid.x_value(u) >= log_e))
        .ok_or(BlockError::NoEligibleBlock)
}

#[derive(Debug, Clone)]
pub struct AvgBlockResult {
    pub v_blocks: Vec<Vec<BitStr>>,
    pub avg_s: Rat,
    pub avg_total: Rat,
    pub samples_used: u32,
    pub swaps_used: u32,
}

/// Partition of `v_pool` into `E` blocks such that the average of the
/// objective over `S = union of U_j x V_j` is at least its average over the
/// full product. A uniformly random partition achieves this in expectation,
/// so sampling (keep the best) almost always suffices; element swaps mop up
/// the remainder.
///
/// `contrib[v][j]` must hold the objective summed over `u in U_j`, i.e.
/// `sum_{u in U_j} a(u, v)`.
pub fn build_averaging_blocks(
    contrib: &BTreeMap<BitStr, Vec<Rat>>,
    v_pool: &[BitStr],
    e_blocks: usize,
    rng: &mut ChaCha8Rng,
    samples: u32,
    swap_budget: u32,
) -> Result<AvgBlockResult, BlockError> {
    let n_pool = v_pool.len();
    if !is_pow2(e_blocks) || !is_pow2(n_pool) || e_blocks * 2 > n_pool {
        return Err(BlockError::BadShape);
    }
    if v_pool
        .iter()
        .any(|v| contrib.get(v).map(|c| c.len()) != Some(e_blocks))
    {
        return Err(BlockError::BadShape);
    }
    let block_size = n_pool / e_blocks;

    let total: Rat = v_pool
        .iter()
        .flat_map(|v| contrib[v].iter())
        .fold(Rat::zero(), |acc, c| acc + c);
    // avg_S >= avg_total  <=>  score * E >= total, where score sums the
    // assigned contributions (|S| = N^2 / E and avg_total = total / N^2).
    let target_num = total.clone();
    let score_of = |assignment: &[BitStr]| -> Rat {
        assignment
            .iter()
            .enumerate()
            .fold(Rat::zero(), |acc, (pos, v)| {
                acc + &contrib[v][pos / block_size]
            })
    };

    let mut best: Option<(Rat, Vec<BitStr>)> = None;
    let mut samples_used = 0;
    let mut order: Vec<BitStr> = v_pool.to_vec();
    for _ in 0..samples.max(1) {
        samples_used += 1;
        order.shuffle(rng);
        let score = score_of(&order);
        let better = best.as_ref().is_none_or(|(b, _)| score > *b);
        if better {
            best = Some((score.clone(), order.clone()));
        }
        if &score * rat_u(e_blocks as u64) >= target_num {
            break;
        }
    }
    let (mut score, mut assignment) = best.expect("at least one sample");

    let mut swaps_used = 0;
    'outer: while &score * rat_u(e_blocks as u64) < target_num {
        let mut improved = false;
        for i in 0..n_pool {
            for k in i + 1..n_pool {
                let (ji, jk) = (i / block_size, k / block_size);
                if ji == jk {
                    continue;
                }
                let (vi, vk) = (assignment[i], assignment[k]);
                let gain =
                    &contrib[&vk][ji] + &contrib[&vi][jk] - &contrib[&vi][ji] - &contrib[&vk][jk];
                if gain > Rat::zero() {
                    assignment.swap(i, k);
                    score += gain;
                    swaps_used += 1;
                    improved = true;
                    if swaps_used >= swap_budget {
                        break 'outer;
                    }
                    if &score * rat_u(e_blocks as u64) >= target_num {
                        break 'outer;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }

    let pairs_in_s = rat_u((n_pool * block_size) as u64);
    let avg_s = &score / &pairs_in_s;
    let avg_total = &total / rat_u((n_pool * n_pool) as u64);
    if avg_s < avg_total {
        return Err(BlockError::AveragingFailed);
    }
    let v_blocks = assignment
        .chunks(block_size)
        .map(|chunk| chunk.to_vec())
        .collect();
    Ok(AvgBlockResult {
        v_blocks,
        avg_s,
        avg_total,
        samples_used,
        swaps_used,
    })
}

/// Convenience wrapper evaluating the objective directly.
pub fn build_averaging_blocks_fn<F>(
    u_blocks: &[Vec<BitStr>],
    v_pool: &[BitStr],
    objective: F,
    rng: &mut ChaCha8Rng,
    samples: u32,
    swap_budget: u32,
) -> Result<AvgBlockResult, BlockError>
where
    F: Fn(BitStr, BitStr) -> Rat,
{
    let e = u_blocks.len();
    let mut contrib: BTreeMap<BitStr, Vec<Rat>> = BTreeMap::new();
    for &v in v_pool {
        let mut row = Vec::with_capacity(e);
        for block in u_blocks {
            let mut sum = Rat::zero();
            for &u in block {
                sum += objective(u, v);
            }
            row.push(sum);
        }
        contrib.insert(v, row);
    }
    build_averaging_blocks(&contrib, v_pool, e, rng, samples, swap_budget)
}

/// Per-level forced update of the H strategy: `delta = (1 - 2 eps) / 5`.
pub fn forced_update_delta(eps: &Rat) -> Rat {
    (rat_u(1) - rat_u(2) * eps) / rat_u(5)
}

fn floor_times(delta: &Rat, n: u32) -> u32 {
    (delta * rat_u(u64::from(n)))
        .floor()
        .to_integer()
        .to_u32()
        .expect("small non-negative")
}

/// Splits the full string set into the low half (`U'`) and high half (`V'`).
fn initial_halves(n: u8) -> (Vec<BitStr>, Vec<BitStr>) {
    let half = 1u64 << (n - 1);
    let mut u = Vec::with_capacity(half as usize);
    let mut v = Vec::with_capacity(half as usize);
    for s in BitStr::all(n) {
        if u64::from(s.value()) < half {
            u.push(s);
        } else {
            v.push(s);
        }
    }
    (u, v)
}

fn chunk_blocks(pool: &[BitStr], count: usize) -> Vec<Vec<BitStr>> {
    let size = pool.len() / count;
    pool.chunks(size).take(count).map(|c| c.to_vec()).collect()
}

// ---------------------------------------------------------------------------
// H strategy
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct HLevelReport {
    pub level: u32,
    pub n_cur: u32,
    pub d: u32,
    pub log_e: u32,
    pub x_round: u32,
    pub z_round: Option<u32>,
    pub x_tokens: u64,
    pub pairs_in_blocks: u64,
    pub selected_block: Option<usize>,
    /// Smallest `f(t) - f(t+1)` over the selected block.
    pub min_drop: Option<Rat>,
}

#[derive(Debug)]
enum HPhase {
    LevelStart,
    AfterX,
    AfterZ,
    Done,
}

/// Recursive total-update strategy for game `H`. Each level: cap the
/// columns of the current product (round t), drop `Z` on blocks chosen so
/// their pairs still ride high (round t+1), then recurse into a block whose
/// columns Bob did not pull down. Every surviving pair's declared value
/// must fall by at least `delta` between the two rounds.
pub struct HStrategy {
    delta: Option<Rat>,
    u_cur: Vec<BitStr>,
    v_cur: Vec<BitStr>,
    n_cur: u32,
    level: u32,
    phase: HPhase,
    u_blocks: Vec<Vec<BitStr>>,
    v_blocks: Vec<Vec<BitStr>>,
    d: u32,
    x_round: u32,
    reports: Vec<HLevelReport>,
}

impl Default for HStrategy {
    fn default() -> Self {
        Self::new()
    }
}

impl HStrategy {
    pub fn new() -> Self {
        HStrategy {
            delta: None,
            u_cur: Vec::new(),
            v_cur: Vec::new(),
            n_cur: 0,
            level: 0,
            phase: HPhase::LevelStart,
            u_blocks: Vec::new(),
            v_blocks: Vec::new(),
            d: 0,
            x_round: 0,
            reports: Vec::new(),
        }
    }

    pub fn reports(&self) -> &[HLevelReport] {
        &self.reports
    }

    pub fn delta(&self) -> Option<&Rat> {
        self.delta.as_ref()
    }

    /// Levels that ran both rounds and selected a block.
    pub fn completed_levels(&self) -> u32 {
        self.reports
            .iter()
            .filter(|r| r.selected_block.is_some())
            .count() as u32
    }

    fn init(&mut self, st: &GameState) -> Result<(), StrategyError> {
        let GameKind::H { ref eps, .. } = st.config().kind else {
            return Err(StrategyError::new("H strategy needs game H"));
        };
        self.delta = Some(forced_update_delta(eps));
        let (u, v) = initial_halves(st.n());
        self.u_cur = u;
        self.v_cur = v;
        self.n_cur = u32::from(st.n()) - 1;
        self.level = 1;
        Ok(())
    }

    fn emit_level_open(&mut self, st: &GameState) -> Option<AliceMove> {
        let delta = self.delta.as_ref().expect("initialized");
        let d = floor_times(delta, self.n_cur);
        if d < st.threshold_value() {
            self.phase = HPhase::Done;
            return None;
        }
        self.d = d;
        self.x_round = st.round();
        let n = u32::from(st.n());
        let placements: Vec<TokenPlacement> = if self.n_cur < n - 1 {
            self.u_cur
                .iter()
                .chain(self.v_cur.iter())
                .map(|&u| TokenPlacement::x(Player::Alice, u, self.n_cur + 1))
                .collect()
        } else {
            // First level: a lone anchor token so that Bob declares against
            // the fresh board before the drop. max{X_u, X_v} is unchanged
            // for every cross pair.
            alloc::vec![TokenPlacement::x(Player::Alice, self.u_cur[0], n - 1)]
        };
        self.reports.push(HLevelReport {
            level: self.level,
            n_cur: self.n_cur,
            d,
            log_e: self.n_cur - d,
            x_round: self.x_round,
            z_round: None,
            x_tokens: placements.len() as u64,
            pairs_in_blocks: 0,
            selected_block: None,
            min_drop: None,
        });
        self.phase = HPhase::AfterX;
        Some(AliceMove { placements })
    }

    fn emit_drop(&mut self, st: &GameState) -> Result<AliceMove, StrategyError> {
        // E = 2^(n' - d) blocks of size 2^(d - 1), drawn from the first half
        // of U'. d >= 1 here since d >= threshold >= 1.
        let n_half = self.u_cur.len() / 2;
        let block_size = 1usize << (self.d - 1);
        let e = n_half / block_size;
        let u_blocks = chunk_blocks(&self.u_cur[..n_half], e);
        let v_blocks = build_partner_blocks(st.grid(), &u_blocks, &self.v_cur, self.n_cur - self.d)
            .map_err(|err| StrategyError::new(alloc::format!("partner blocks: {err}")))?;
        let mut placements = Vec::new();
        for (us, vs) in u_blocks.iter().zip(v_blocks.iter()) {
            for &u in us {
                for &v in vs {
                    let pair = UPair::new(u, v).expect("equal lengths");
                    placements.push(TokenPlacement::z(Player::Alice, pair, self.d));
                }
            }
        }
        let report = self.reports.last_mut().expect("opened");
        report.z_round = Some(st.round());
        report.pairs_in_blocks = placements.len() as u64;
        self.u_blocks = u_blocks;
        self.v_blocks = v_blocks;
        self.phase = HPhase::AfterZ;
        Ok(AliceMove { placements })
    }

    fn select_and_recurse(&mut self, st: &GameState) -> Result<(), StrategyError> {
        let log_e = self.n_cur - self.d;
        let j = select_block_h(st.grid(), &self.u_blocks, log_e)
            .map_err(|err| StrategyError::new(alloc::format!("select: {err}")))?;
        let delta = self.delta.clone().expect("initialized");
        let report = self.reports.last_mut().expect("opened");
        let t = u64::from(report.x_round);
        let t1 = u64::from(report.z_round.expect("dropped"));
        let mut min_drop: Option<Rat> = None;
        for &u in &self.u_blocks[j] {
            for &v in &self.v_blocks[j] {
                let pair = UPair::new(u, v).expect("equal lengths");
                let (Some(high), Some(low)) = (st.f_at(&pair, t), st.f_at(&pair, t1)) else {
                    return Err(StrategyError::new("missing declared values"));
                };
                let drop = high - low;
                if min_drop.as_ref().is_none_or(|m| &drop < m) {
                    min_drop = Some(drop);
                }
            }
        }
        if let Some(m) = &min_drop {
            if m < &delta {
                return Err(StrategyError::new(alloc::format!(
                    "forced update below delta at level {}",
                    self.level
                )));
            }
        }
        report.selected_block = Some(j);
        report.min_drop = min_drop;

        self.u_cur = self.u_blocks[j].clone();
        self.v_cur = self.v_blocks[j].clone();
        self.n_cur = self.d.saturating_sub(1);
        self.level += 1;
        self.phase = HPhase::LevelStart;
        Ok(())
    }
}

impl AliceStrategy for HStrategy {
    fn next_move(&mut self, st: &GameState) -> Result<AliceMove, StrategyError> {
        if self.delta.is_none() {
            self.init(st)?;
        }
        loop {
            match self.phase {
                HPhase::Done => return Ok(AliceMove::terminate()),
                HPhase::LevelStart => {
                    if self.n_cur == 0 {
                        self.phase = HPhase::Done;
                        continue;
                    }
                    match self.emit_level_open(st) {
                        Some(mv) => return Ok(mv),
                        None => continue,
                    }
                }
                HPhase::AfterX => return self.emit_drop(st),
                HPhase::AfterZ => {
                    self.select_and_recurse(st)?;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Claim machinery shared by the G strategy and the lemma checkers
// ---------------------------------------------------------------------------

/// The three bounds of the oscillation claim at parameters `(c, n')`,
/// `e = 4c`: an upper bound on `f(t-1)`, a lower bound on `f(t)` and an
/// upper bound on `f(t+1)`.
pub fn claim_bracket_bounds(c: u32, n_prime: u32) -> (Rat, Rat, Rat) {
    assert!(n_prime >= 3);
    let c = i64::from(c);
    let e = 4 * c;
    let np = i64::from(n_prime);
    let b1 = rat(np + c, np + e - 2);
    let b2 = rat(np - 3, np + 1 + c);
    let b3 = rat(np - e + c, np - 2);
    (b1, b2, b3)
}

/// Whether the bound comparisons needed for a peak (`f(t-1) < f(t)` and
/// `f(t+1) < f(t)`) follow from the brackets alone: `(b1 < b2, b3 < b2)`.
pub fn claim_bracket_orderings(c: u32, n_prime: u32) -> (bool, bool) {
    let (b1, b2, b3) = claim_bracket_bounds(c, n_prime);
    (b1 < b2, b3 < b2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClaimOutcome {
    /// At least one hypothesis fails; nothing to check.
    Void,
    Holds,
    Violated(&'static str),
}

#[derive(Debug, Clone, Copy)]
pub struct ClaimInstance<'a> {
    pub hyp_x_before: bool,
    pub hyp_z_mid: bool,
    pub hyp_x_after: bool,
    pub f_before: Option<&'a Rat>,
    pub f_mid: Option<&'a Rat>,
    pub f_after: Option<&'a Rat>,
    pub osc_before: u64,
    pub osc_after: u64,
}

/// Checks one claim instance: under the three column-height hypotheses, the
/// declared values must obey the three brackets and the oscillation count
/// must have grown by at least one.
pub fn verify_claim_instance(inst: &ClaimInstance<'_>, c: u32, n_prime: u32) -> ClaimOutcome {
    if !(inst.hyp_x_before && inst.hyp_z_mid && inst.hyp_x_after) {
        return ClaimOutcome::Void;
    }
    let (Some(fb), Some(fm), Some(fa)) = (inst.f_before, inst.f_mid, inst.f_after) else {
        return ClaimOutcome::Void;
    };
    let (b1, b2, b3) = claim_bracket_bounds(c, n_prime);
    if fb >= &b1 {
        return ClaimOutcome::Violated("f(t-1) bracket");
    }
    if fm <= &b2 {
        return ClaimOutcome::Violated("f(t) bracket");
    }
    if fa >= &b3 {
        return ClaimOutcome::Violated("f(t+1) bracket");
    }
    if inst.osc_after < inst.osc_before + 1 {
        return ClaimOutcome::Violated("oscillation count did not grow");
    }
    ClaimOutcome::Holds
}

// ---------------------------------------------------------------------------
// G strategy
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct ClaimStats {
    pub checked: u64,
    pub void: u64,
    pub held: u64,
    pub violated: u64,
}

#[derive(Debug, Clone)]
pub struct GLevelReport {
    pub level: u32,
    pub n_cur: u32,
    pub x_round: u32,
    pub z_round: Option<u32>,
    pub x_tokens: u64,
    pub pairs_in_blocks: u64,
    pub selected_block: Option<usize>,
    /// Right-hand side of the per-level averaging inequality:
    /// `avg over U' x V' of (osc_(t-1) + I1)`.
    pub rhs_avg: Rat,
    /// Selected-block average of `osc_(t+1) + I3`; must be at least
    /// `1/4 + rhs_avg`.
    pub sel_avg: Option<Rat>,
    pub claims: ClaimStats,
}

#[derive(Debug)]
enum GPhase {
    LevelStart,
    AfterX,
    AfterZ,
    Done,
}

/// Recursive oscillation strategy for game `G` with `e = 4c`. The level
/// structure mirrors the H strategy, but blocks partition both sets and are
/// chosen by averaging: the selected block's average of
/// `osc + [X >= n'-2]` grows by at least 1/4 per level.
pub struct GStrategy {
    c: u32,
    e: u32,
    rng: ChaCha8Rng,
    pub allow_relaxed: bool,
    relaxed: bool,
    u_cur: Vec<BitStr>,
    v_cur: Vec<BitStr>,
    n_cur: u32,
    level: u32,
    phase: GPhase,
    initialized: bool,
    u_blocks: Vec<Vec<BitStr>>,
    v_blocks: Vec<Vec<BitStr>>,
    i1: BTreeMap<BitStr, bool>,
    z_low_mid: BTreeSet<UPair>,
    x_round: u32,
    reports: Vec<GLevelReport>,
}

impl GStrategy {
    pub fn new(seed: u64) -> Self {
        GStrategy {
            c: 0,
            e: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            allow_relaxed: true,
            relaxed: false,
            u_cur: Vec::new(),
            v_cur: Vec::new(),
            n_cur: 0,
            level: 0,
            phase: GPhase::LevelStart,
            initialized: false,
            u_blocks: Vec::new(),
            v_blocks: Vec::new(),
            i1: BTreeMap::new(),
            z_low_mid: BTreeSet::new(),
            x_round: 0,
            reports: Vec::new(),
        }
    }

    pub fn reports(&self) -> &[GLevelReport] {
        &self.reports
    }

    /// Parameters outside the guard `c >= 3`, `n > 16 c^2`.
    pub fn relaxed(&self) -> bool {
        self.relaxed
    }

    pub fn completed_levels(&self) -> u32 {
        self.reports
            .iter()
            .filter(|r| r.selected_block.is_some())
            .count() as u32
    }

    fn init(&mut self, st: &GameState) -> Result<(), StrategyError> {
        let GameKind::G { c, .. } = st.config().kind else {
            return Err(StrategyError::new("G strategy needs game G"));
        };
        self.c = c;
        self.e = 4 * c;
        let n = u32::from(st.n());
        self.relaxed = c < 3 || u64::from(n) <= 16 * u64::from(c) * u64::from(c);
        if self.relaxed && !self.allow_relaxed {
            return Err(StrategyError::new(
                "parameters outside the c >= 3, n > 16c^2 guard",
            ));
        }
        let (u, v) = initial_halves(st.n());
        self.u_cur = u;
        self.v_cur = v;
        self.n_cur = n - 1;
        self.level = 1;
        self.initialized = true;
        Ok(())
    }

    /// Is the unordered pair one `(u, v)` with `u` in `U'` and `v` in `V'`?
    /// Returns the oriented endpoints if so.
    fn orient(
        pair: &UPair,
        u_set: &BTreeSet<BitStr>,
        v_set: &BTreeSet<BitStr>,
    ) -> Option<(BitStr, BitStr)> {
        let (lo, hi) = (pair.lo(), pair.hi());
        if u_set.contains(&lo) && v_set.contains(&hi) {
            Some((lo, hi))
        } else if u_set.contains(&hi) && v_set.contains(&lo) {
            Some((hi, lo))
        } else {
            None
        }
    }

    fn emit_level_open(&mut self, st: &GameState) -> Option<AliceMove> {
        if self.n_cur <= self.e {
            self.phase = GPhase::Done;
            return None;
        }
        let n = u32::from(st.n());
        self.x_round = st.round();
        // Snapshot I1 = [X^(t-1) >= n' + e - 2] and the osc/I1 average over
        // the whole product before touching the board.
        self.i1 = self
            .u_cur
            .iter()
            .map(|&u| (u, st.grid().x_value(u) >= self.n_cur + self.e - 2))
            .collect();
        let i1_count = self.i1.values().filter(|b| **b).count() as u64;
        let snap = st.declared_rounds();
        let u_set: BTreeSet<BitStr> = self.u_cur.iter().copied().collect();
        let v_set: BTreeSet<BitStr> = self.v_cur.iter().copied().collect();
        let mut osc_sum = 0u64;
        for (pair, series) in st.series() {
            if Self::orient(pair, &u_set, &v_set).is_some() {
                osc_sum += series.oscillations_at(snap);
            }
        }
        let n_side = self.u_cur.len() as u64;
        let rhs_avg = (rat_u(osc_sum) + rat_u(i1_count * n_side)) / rat_u(n_side * n_side);

        let placements: Vec<TokenPlacement> = if self.n_cur < n - 1 {
            self.u_cur
                .iter()
                .chain(self.v_cur.iter())
                .map(|&u| TokenPlacement::x(Player::Alice, u, self.n_cur + 1))
                .collect()
        } else {
            alloc::vec![TokenPlacement::x(Player::Alice, self.u_cur[0], n - 1)]
        };
        self.reports.push(GLevelReport {
            level: self.level,
            n_cur: self.n_cur,
            x_round: self.x_round,
            z_round: None,
            x_tokens: placements.len() as u64,
            pairs_in_blocks: 0,
            selected_block: None,
            rhs_avg,
            sel_avg: None,
            claims: ClaimStats::default(),
        });
        self.phase = GPhase::AfterX;
        Some(AliceMove { placements })
    }

    fn emit_drop(&mut self, st: &GameState) -> Result<AliceMove, StrategyError> {
        let e_blocks = 1usize << self.e;
        let u_blocks = chunk_blocks(&self.u_cur, e_blocks);
        let u_set: BTreeSet<BitStr> = self.u_cur.iter().copied().collect();
        let v_set: BTreeSet<BitStr> = self.v_cur.iter().copied().collect();
        let snap = st.declared_rounds().saturating_sub(1);
        let z_floor = self.n_cur - 2;

        // I2 snapshot: pairs of the product whose Z has already fallen
        // below n' - 2 by the end of round t.
        self.z_low_mid = st
            .grid()
            .z_touched()
            .into_iter()
            .filter(|pair| {
                Self::orient(pair, &u_set, &v_set).is_some() && st.grid().z_value(pair) < z_floor
            })
            .collect();

        // Objective a(u, v) = osc_(t-1)(uv) + I1(u) * I2(uv), aggregated per
        // (v, block) from the sparse state.
        let block_of: BTreeMap<BitStr, usize> = u_blocks
            .iter()
            .enumerate()
            .flat_map(|(j, block)| block.iter().map(move |&u| (u, j)))
            .collect();
        let i1_per_block: Vec<i64> = u_blocks
            .iter()
            .map(|block| block.iter().filter(|u| self.i1[*u]).count() as i64)
            .collect();
        let mut adjust: BTreeMap<(BitStr, usize), i64> = BTreeMap::new();
        for pair in &self.z_low_mid {
            let (u, v) = Self::orient(pair, &u_set, &v_set).expect("filtered");
            if self.i1[&u] {
                *adjust.entry((v, block_of[&u])).or_insert(0) -= 1;
            }
        }
        for (pair, series) in st.series() {
            if let Some((u, v)) = Self::orient(pair, &u_set, &v_set) {
                let osc = series.oscillations_at(snap) as i64;
                if osc != 0 {
                    *adjust.entry((v, block_of[&u])).or_insert(0) += osc;
                }
            }
        }
        let contrib: BTreeMap<BitStr, Vec<Rat>> = v_set
            .iter()
            .map(|&v| {
                let row = (0..e_blocks)
                    .map(|j| {
                        let base = i1_per_block[j] + adjust.get(&(v, j)).copied().unwrap_or(0);
                        Rat::from_integer(base.into())
                    })
                    .collect();
                (v, row)
            })
            .collect();

        let result =
            build_averaging_blocks(&contrib, &self.v_cur, e_blocks, &mut self.rng, 64, 4096)
                .map_err(|err| StrategyError::new(alloc::format!("averaging blocks: {err}")))?;

        let drop_row = self.n_cur - self.e;
        let mut placements = Vec::new();
        for (us, vs) in u_blocks.iter().zip(result.v_blocks.iter()) {
            for &u in us {
                for &v in vs {
                    let pair = UPair::new(u, v).expect("equal lengths");
                    placements.push(TokenPlacement::z(Player::Alice, pair, drop_row));
                }
            }
        }
        let report = self.reports.last_mut().expect("opened");
        report.z_round = Some(st.round());
        report.pairs_in_blocks = placements.len() as u64;
        self.u_blocks = u_blocks;
        self.v_blocks = result.v_blocks;
        self.phase = GPhase::AfterZ;
        Ok(AliceMove { placements })
    }

    fn select_and_recurse(&mut self, st: &GameState) -> Result<(), StrategyError> {
        let e_blocks = self.u_blocks.len();
        let block_size = self.u_blocks[0].len() as u64;
        let i3: BTreeMap<BitStr, bool> = self
            .u_cur
            .iter()
            .map(|&u| (u, st.grid().x_value(u) >= self.n_cur - 2))
            .collect();

        // Per-block sums of osc_(t+1) + I3 over U_j x V_j.
        let mut sums = alloc::vec![0u64; e_blocks];
        for j in 0..e_blocks {
            let i3_count = self.u_blocks[j].iter().filter(|u| i3[*u]).count() as u64;
            sums[j] += i3_count * block_size;
            for &u in &self.u_blocks[j] {
                for &v in &self.v_blocks[j] {
                    let pair = UPair::new(u, v).expect("equal lengths");
                    sums[j] += st.oscillations(&pair);
                }
            }
        }
        let best = (0..e_blocks)
            .max_by_key(|&j| (sums[j], core::cmp::Reverse(j)))
            .expect("non-empty");
        let sel_avg = rat_u(sums[best]) / rat_u(block_size * block_size);

        let report_rhs = self.reports.last().expect("opened").rhs_avg.clone();
        let required = &report_rhs + rat(1, 4);
        if sel_avg < required {
            return Err(StrategyError::new(alloc::format!(
                "averaging chain broke at level {}: {} < 1/4 + {}",
                self.level,
                sel_avg,
                report_rhs
            )));
        }

        // Claim audit over all of S.
        let t = u64::from(self.x_round);
        let mut claims = ClaimStats::default();
        for j in 0..e_blocks {
            for &u in &self.u_blocks[j] {
                for &v in &self.v_blocks[j] {
                    let pair = UPair::new(u, v).expect("equal lengths");
                    let inst = ClaimInstance {
                        hyp_x_before: self.i1[&u],
                        hyp_z_mid: !self.z_low_mid.contains(&pair),
                        hyp_x_after: i3[&u],
                        f_before: st.f_at(&pair, t.saturating_sub(1)),
                        f_mid: st.f_at(&pair, t),
                        f_after: st.f_at(&pair, t + 1),
                        osc_before: st.oscillations_at(&pair, t.saturating_sub(1)),
                        osc_after: st.oscillations_at(&pair, t + 1),
                    };
                    claims.checked += 1;
                    match verify_claim_instance(&inst, self.c, self.n_cur) {
                        ClaimOutcome::Void => claims.void += 1,
                        ClaimOutcome::Holds => claims.held += 1,
                        ClaimOutcome::Violated(_) => claims.violated += 1,
                    }
                }
            }
        }
        if claims.violated > 0 {
            return Err(StrategyError::new(alloc::format!(
                "oscillation claim violated on {} pairs at level {}",
                claims.violated,
                self.level
            )));
        }

        let report = self.reports.last_mut().expect("opened");
        report.selected_block = Some(best);
        report.sel_avg = Some(sel_avg);
        report.claims = claims;

        self.u_cur = self.u_blocks[best].clone();
        self.v_cur = self.v_blocks[best].clone();
        self.n_cur -= self.e;
        self.level += 1;
        self.phase = GPhase::LevelStart;
        Ok(())
    }
}

impl AliceStrategy for GStrategy {
    fn next_move(&mut self, st: &GameState) -> Result<AliceMove, StrategyError> {
        if !self.initialized {
            self.init(st)?;
        }
        loop {
            match self.phase {
                GPhase::Done => return Ok(AliceMove::terminate()),
                GPhase::LevelStart => match self.emit_level_open(st) {
                    Some(mv) => return Ok(mv),
                    None => continue,
                },
                GPhase::AfterX => return self.emit_drop(st),
                GPhase::AfterZ => {
                    self.select_and_recurse(st)?;
                }
            }
        }
    }
}

/// Level count of the H recursion for given parameters, by direct
/// simulation of `n' <- floor(delta n') - 1` until `floor(delta n') <
/// threshold`.
pub fn h_level_count(n: u64, delta_num: u64, delta_den: u64, threshold: u64) -> u64 {
    let mut n_cur = n - 1;
    let mut levels = 0;
    loop {
        let d = n_cur * delta_num / delta_den;
        if d < threshold {
            return levels;
        }
        levels += 1;
        n_cur = d - 1;
    }
}
