//! Bob players: the clamp adversary (minimal moves, always compliant while
//! possible), a token-spending variant, fuzzing opponents, and the
//! reduction Bob driven by an approximation oracle.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::board::{BitStr, Column, GridState, Player, TokenPlacement, UPair};
use crate::rat::{rat_abs, rat_u, Rat};
use crate::referee::{
    AliceMove, AliceStrategy, BobMove, BobStrategy, GameKind, GameState, StrategyError,
};

/// Margin used when clamping into an open interval: small enough to stay
/// inside any non-degenerate requirement window, fixed by `n` and `c` so
/// replays are exact.
fn open_margin(n: u8, c: u32, width: Option<&Rat>) -> Rat {
    let n = i64::from(n);
    let c = i64::from(c);
    let cap = Rat::new(1.into(), (4 * n * (n + c)).into());
    match width {
        Some(w) => {
            let half = w / rat_u(2);
            if half < cap {
                half
            } else {
                cap
            }
        }
        None => cap,
    }
}

/// Nearest value to `prev` strictly inside `(lower, upper)`; `None` when
/// `prev` is already admissible.
fn clamp_into_open(prev: &Rat, lower: &Rat, upper: Option<&Rat>, n: u8, c: u32) -> Option<Rat> {
    let inside = prev > lower && upper.is_none_or(|u| prev < u);
    if inside {
        return None;
    }
    let width = upper.map(|u| u - lower);
    let mu = open_margin(n, c, width.as_ref());
    if prev <= lower {
        Some(lower + mu)
    } else {
        Some(upper.expect("prev exceeds a finite upper bound") - mu)
    }
}

/// Nearest value to `prev` in the closed band `center ± eps`; `None` when
/// already inside.
fn clamp_into_band(prev: &Rat, center: &Rat, eps: &Rat) -> Option<Rat> {
    if rat_abs(&(prev - center)) <= *eps {
        return None;
    }
    if prev < center {
        Some(center - eps)
    } else {
        Some(center + eps)
    }
}

fn requirement_clamp(
    kind: &GameKind,
    threshold: u32,
    prev: &Rat,
    n: u8,
    z: u32,
    max_x: u32,
    eps_override: Option<&Rat>,
    c_override: Option<u32>,
) -> Option<Rat> {
    match kind {
        GameKind::G { c, .. } => {
            let c = c_override.unwrap_or(*c);
            let lower = Rat::new(
                (i64::from(z) - 1).into(),
                (i64::from(max_x) + i64::from(c)).into(),
            );
            let upper = if max_x == 0 {
                None
            } else {
                Some(Rat::new((z + c).into(), max_x.into()))
            };
            clamp_into_open(prev, &lower, upper.as_ref(), n, c)
        }
        GameKind::H { eps, .. } => {
            if max_x < threshold {
                return None;
            }
            let eps = eps_override.unwrap_or(eps);
            let center = Rat::new(z.into(), max_x.into());
            clamp_into_band(prev, &center, eps)
        }
    }
}

/// Declares the constant 1 by default and, each round, moves every
/// out-of-window pair to the nearest admissible value. Places no tokens, so
/// it minimizes oscillation and total-update growth round by round; Alice
/// wins only by making the admissible windows themselves move.
#[derive(Debug, Clone, Default)]
pub struct ClampBob {
    /// Clamp into a tighter band than the game's `eps` (game `H` only).
    pub eps_override: Option<Rat>,
    /// Clamp as if the sandwich used this `c` (game `G` only).
    pub c_override: Option<u32>,
}

impl ClampBob {
    pub fn new() -> Self {
        ClampBob::default()
    }
}

impl BobStrategy for ClampBob {
    fn next_move(&mut self, st: &GameState) -> Result<BobMove, StrategyError> {
        let default = rat_u(1);
        let mut updates = BTreeMap::new();
        for pair in st.check_pairs() {
            let prev = st
                .current_f(pair)
                .cloned()
                .unwrap_or_else(|| default.clone());
            let clamped = requirement_clamp(
                &st.config().kind,
                st.threshold_value(),
                &prev,
                st.n(),
                st.grid().z_value(pair),
                st.grid().max_x(pair),
                self.eps_override.as_ref(),
                self.c_override,
            );
            if let Some(v) = clamped {
                updates.insert(*pair, v);
            }
        }
        Ok(BobMove {
            placements: Vec::new(),
            f_default: (st.round() == 1).then(|| default),
            f_updates: updates,
        })
    }
}

/// Declares one constant and never reacts. Survives as long as the constant
/// stays admissible everywhere.
#[derive(Debug, Clone)]
pub struct NullBob {
    pub value: Rat,
}

impl Default for NullBob {
    fn default() -> Self {
        NullBob {
            value: crate::rat::rat(1, 2),
        }
    }
}

impl BobStrategy for NullBob {
    fn next_move(&mut self, st: &GameState) -> Result<BobMove, StrategyError> {
        Ok(BobMove {
            placements: Vec::new(),
            f_default: (st.round() == 1).then(|| self.value.clone()),
            f_updates: BTreeMap::new(),
        })
    }
}

/// X-column values as they would be after a batch of pending placements.
struct Overlay<'a> {
    grid: &'a GridState,
    pending_x: BTreeMap<BitStr, u32>,
}

impl Overlay<'_> {
    fn x_value(&self, u: BitStr) -> u32 {
        let base = self.grid.x_value(u);
        match self.pending_x.get(&u) {
            Some(row) => base.min(*row),
            None => base,
        }
    }

    fn max_x(&self, pair: &UPair) -> u32 {
        self.x_value(pair.lo()).max(self.x_value(pair.hi()))
    }
}

/// Spends tokens instead of updating `f` where that is cheap enough: when a
/// pair's previous value has drifted out of its window by more than `pain`,
/// it tries to pull `max{X_u, X_v}` down to a height that re-admits the old
/// value, budget permitting, and clamps otherwise.
#[derive(Debug, Clone)]
pub struct BudgetBob {
    pub pain: Rat,
}

impl BudgetBob {
    pub fn new(pain: Rat) -> Self {
        BudgetBob { pain }
    }

    /// Largest column height `m <= from` that re-admits `prev`, if any.
    fn restoring_height(&self, st: &GameState, prev: &Rat, z: u32, from: u32) -> Option<u32> {
        let threshold = st.threshold_value();
        for m in (1..=from.saturating_sub(1)).rev() {
            let admissible = match &st.config().kind {
                GameKind::G { c, .. } => {
                    let lower = Rat::new(
                        (i64::from(z) - 1).into(),
                        (i64::from(m) + i64::from(*c)).into(),
                    );
                    let upper = Rat::new((z + c).into(), m.into());
                    &lower < prev && prev < &upper
                }
                GameKind::H { eps, .. } => {
                    if m < threshold {
                        // Below the threshold the pair leaves the checked
                        // set entirely; do not chase that here.
                        false
                    } else {
                        let center = Rat::new(z.into(), m.into());
                        rat_abs(&(prev - &center)) <= *eps
                    }
                }
            };
            if admissible {
                return Some(m);
            }
        }
        None
    }
}

impl BobStrategy for BudgetBob {
    fn next_move(&mut self, st: &GameState) -> Result<BobMove, StrategyError> {
        let default = rat_u(1);
        let grid = st.grid();
        let n = st.n();
        let mut overlay = Overlay {
            grid,
            pending_x: BTreeMap::new(),
        };
        let mut placements: Vec<TokenPlacement> = Vec::new();
        // Budget already spent this move, per row.
        let mut spent: BTreeMap<u32, u64> = BTreeMap::new();

        for pair in st.check_pairs() {
            let prev = st
                .current_f(pair)
                .cloned()
                .unwrap_or_else(|| default.clone());
            let z = grid.z_value(pair);
            let max_x = overlay.max_x(pair);
            let clamped = requirement_clamp(
                &st.config().kind,
                st.threshold_value(),
                &prev,
                n,
                z,
                max_x,
                None,
                None,
            );
            let Some(clamp_value) = clamped else { continue };
            if rat_abs(&(&clamp_value - &prev)) <= self.pain {
                continue; // cheap enough to update later
            }
            let Some(m) = self.restoring_height(st, &prev, z, max_x) else {
                continue;
            };
            // Both endpoints above m need a token at row m.
            let mut endpoints: Vec<BitStr> = Vec::new();
            for u in [pair.lo(), pair.hi()] {
                if overlay.x_value(u) > m && !endpoints.contains(&u) {
                    endpoints.push(u);
                }
            }
            let used = grid.x_row_count(Player::Bob, m) + spent.get(&m).copied().unwrap_or(0);
            if used + endpoints.len() as u64 > crate::board::row_budget(m) {
                continue; // not enough row budget; fall back to clamping
            }
            for u in endpoints {
                placements.push(TokenPlacement::x(Player::Bob, u, m));
                *spent.entry(m).or_insert(0) += 1;
                let e = overlay.pending_x.entry(u).or_insert(m);
                *e = (*e).min(m);
            }
        }

        // Placements settled; clamp whatever remains inadmissible under the
        // final column heights. His own tokens expose new pairs to checks
        // (both endpoints touched), so those join the pass.
        let mut pass: alloc::collections::BTreeSet<UPair> = st.check_pairs().clone();
        let pending: Vec<BitStr> = overlay.pending_x.keys().copied().collect();
        for &u in &pending {
            for w in st.touched().iter().copied().chain(pending.iter().copied()) {
                pass.insert(UPair::new(u, w).expect("equal lengths"));
            }
        }
        let mut updates = BTreeMap::new();
        for pair in &pass {
            let prev = st
                .current_f(pair)
                .cloned()
                .unwrap_or_else(|| default.clone());
            let clamped = requirement_clamp(
                &st.config().kind,
                st.threshold_value(),
                &prev,
                n,
                grid.z_value(pair),
                overlay.max_x(pair),
                None,
                None,
            );
            if let Some(v) = clamped {
                updates.insert(*pair, v);
            }
        }
        Ok(BobMove {
            placements,
            f_default: (st.round() == 1).then(|| default),
            f_updates: updates,
        })
    }
}

fn random_bitstr(rng: &mut ChaCha8Rng, n: u8) -> BitStr {
    let value = rng.random_range(0..(1u64 << n)) as u32;
    BitStr::new(n, value).expect("in range")
}

fn random_pair(rng: &mut ChaCha8Rng, n: u8) -> UPair {
    UPair::new(random_bitstr(rng, n), random_bitstr(rng, n)).expect("equal lengths")
}

fn random_value(rng: &mut ChaCha8Rng, n: u8) -> Rat {
    let numer = rng.random_range(-2..=i64::from(n) * 2);
    let denom = rng.random_range(1..=8i64);
    crate::rat::rat(numer, denom)
}

/// Referee fuzzing opponent: random placements (possibly over budget,
/// possibly off-board) and random value updates. Loses by design, in varied
/// ways.
#[derive(Debug, Clone)]
pub struct RandomBob {
    rng: ChaCha8Rng,
    /// Probability numerator out of 100 of placing each optional token.
    pub aggression: u32,
}

impl RandomBob {
    pub fn seeded(seed: u64) -> Self {
        RandomBob {
            rng: ChaCha8Rng::seed_from_u64(seed),
            aggression: 40,
        }
    }
}

impl BobStrategy for RandomBob {
    fn next_move(&mut self, st: &GameState) -> Result<BobMove, StrategyError> {
        let n = st.n();
        let mut placements = Vec::new();
        for _ in 0..3 {
            if self.rng.random_range(0..100) < self.aggression {
                let row = self.rng.random_range(0..=u32::from(n));
                let placement = if self.rng.random_bool(0.5) {
                    TokenPlacement::x(Player::Bob, random_bitstr(&mut self.rng, n), row)
                } else {
                    TokenPlacement::z(Player::Bob, random_pair(&mut self.rng, n), row)
                };
                placements.push(placement);
            }
        }
        let mut updates = BTreeMap::new();
        let candidates: Vec<UPair> = st.check_pairs().iter().copied().collect();
        for pair in candidates.iter().take(4) {
            if self.rng.random_bool(0.5) {
                updates.insert(*pair, random_value(&mut self.rng, n));
            }
        }
        if self.rng.random_bool(0.2) {
            updates.insert(
                random_pair(&mut self.rng, n),
                random_value(&mut self.rng, n),
            );
        }
        Ok(BobMove {
            placements,
            f_default: (st.round() == 1).then(|| rat_u(1)),
            f_updates: updates,
        })
    }
}

/// Random Alice for fuzzing. In compliant mode she respects her own budgets
/// and plays until they run dry; in wild mode she places anywhere.
#[derive(Debug, Clone)]
pub struct RandomAlice {
    rng: ChaCha8Rng,
    pub compliant: bool,
}

impl RandomAlice {
    pub fn seeded(seed: u64, compliant: bool) -> Self {
        RandomAlice {
            rng: ChaCha8Rng::seed_from_u64(seed),
            compliant,
        }
    }
}

impl AliceStrategy for RandomAlice {
    fn next_move(&mut self, st: &GameState) -> Result<AliceMove, StrategyError> {
        let n = st.n();
        let grid = st.grid();
        if !self.compliant {
            let mut placements = Vec::new();
            for _ in 0..self.rng.random_range(1..=3) {
                let row = self.rng.random_range(0..=u32::from(n));
                let placement = if self.rng.random_bool(0.5) {
                    TokenPlacement::x(Player::Alice, random_bitstr(&mut self.rng, n), row)
                } else {
                    TokenPlacement::z(Player::Alice, random_pair(&mut self.rng, n), row)
                };
                placements.push(placement);
            }
            return Ok(AliceMove { placements });
        }
        // Compliant: find one placement that is neither a duplicate nor a
        // budget violation; give up (and lose by no-move) if none shows up.
        for _ in 0..64 {
            let row = self.rng.random_range(0..u32::from(n));
            let budget = crate::board::row_budget(row);
            if self.rng.random_bool(0.5) {
                let u = random_bitstr(&mut self.rng, n);
                let col = Column::X(u);
                if grid.x_row_count(Player::Alice, row) < budget
                    && !grid.has_token(Player::Alice, &col, row)
                {
                    return Ok(AliceMove {
                        placements: alloc::vec![TokenPlacement::x(Player::Alice, u, row)],
                    });
                }
            } else {
                let pair = random_pair(&mut self.rng, n);
                let col = Column::Z(pair);
                let lo_ok = grid.slice_row_count(Player::Alice, pair.lo(), row) < budget;
                let hi_ok = pair.is_singleton()
                    || grid.slice_row_count(Player::Alice, pair.hi(), row) < budget;
                if lo_ok && hi_ok && !grid.has_token(Player::Alice, &col, row) {
                    return Ok(AliceMove {
                        placements: alloc::vec![TokenPlacement::z(Player::Alice, pair, row)],
                    });
                }
            }
        }
        Ok(AliceMove::terminate())
    }
}

/// Plays a fixed list of moves, then stops.
#[derive(Debug, Clone)]
pub struct ScriptedAlice {
    moves: alloc::collections::VecDeque<AliceMove>,
}

impl ScriptedAlice {
    pub fn new(moves: Vec<AliceMove>) -> Self {
        ScriptedAlice {
            moves: moves.into(),
        }
    }
}

impl AliceStrategy for ScriptedAlice {
    fn next_move(&mut self, _: &GameState) -> Result<AliceMove, StrategyError> {
        Ok(self.moves.pop_front().unwrap_or_default())
    }
}

/// Plays a fixed list of moves, then keeps carrying values forward.
#[derive(Debug, Clone)]
pub struct ScriptedBob {
    moves: alloc::collections::VecDeque<BobMove>,
}

impl ScriptedBob {
    pub fn new(moves: Vec<BobMove>) -> Self {
        ScriptedBob {
            moves: moves.into(),
        }
    }
}

impl BobStrategy for ScriptedBob {
    fn next_move(&mut self, st: &GameState) -> Result<BobMove, StrategyError> {
        let mut mv = self.moves.pop_front().unwrap_or_default();
        if st.round() == 1 && mv.f_default.is_none() {
            mv.f_default = Some(rat_u(1));
        }
        Ok(mv)
    }
}

// ---------------------------------------------------------------------------
// Approximation oracles and the reduction Bob.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("staircase must start at time 1")]
    BadStart,
    #[error("staircase times must strictly increase")]
    TimesNotIncreasing,
    #[error("staircase values must be non-increasing")]
    NotMonotone,
    #[error("level {level} holds {count} strings, over the 2^i counting cap")]
    XCountingViolated { level: u32, count: u64 },
    #[error("slice {slice} level {level} holds {count} partners, over the counting cap")]
    ZCountingViolated {
        slice: BitStr,
        level: u32,
        count: u64,
    },
    #[error("oracle and board sizes differ")]
    SizeMismatch,
}

/// Non-increasing integer schedule sampled at times `s = 1, 2, ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Staircase {
    steps: Vec<(u64, u32)>,
}

impl Staircase {
    pub fn new(steps: Vec<(u64, u32)>) -> Result<Self, OracleError> {
        if steps.first().map(|s| s.0) != Some(1) {
            return Err(OracleError::BadStart);
        }
        if steps.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(OracleError::TimesNotIncreasing);
        }
        if steps.windows(2).any(|w| w[1].1 >= w[0].1) {
            return Err(OracleError::NotMonotone);
        }
        Ok(Staircase { steps })
    }

    pub fn constant(value: u32) -> Self {
        Staircase {
            steps: alloc::vec![(1, value)],
        }
    }

    pub fn at(&self, s: u64) -> u32 {
        let s = s.max(1);
        let mut value = self.steps[0].1;
        for &(t, v) in &self.steps {
            if t <= s {
                value = v;
            } else {
                break;
            }
        }
        value
    }

    pub fn final_value(&self) -> u32 {
        self.steps.last().expect("non-empty").1
    }

    /// All values the schedule ever takes.
    pub fn levels(&self) -> impl Iterator<Item = u32> + '_ {
        self.steps.iter().map(|&(_, v)| v)
    }

    pub fn stabilization(&self) -> u64 {
        self.steps.last().expect("non-empty").0
    }

    pub fn steps(&self) -> &[(u64, u32)] {
        &self.steps
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FprimeMode {
    /// `fprime` equals the ratio of the current schedule values.
    Exact,
    /// `fprime` reports the ratio as of `lag` steps earlier.
    Lagged(u64),
    /// `fprime` is the ratio plus deterministic bounded noise (at most
    /// `eps` in absolute value), frozen past the stabilization time.
    Noisy { eps: Rat },
}

/// Interface of an upper-approximation oracle: `cx` plays the per-string
/// complexity schedule, `cz` the per-pair schedule, `fprime` the
/// approximation trace. Both schedules must be non-increasing in `s` and
/// `fprime` must be eventually constant per pair; the declared limits feed
/// test harnesses.
pub trait ApproxOracle {
    fn n(&self) -> u8;
    fn cx(&self, u: BitStr, s: u64) -> u32;
    fn cz(&self, pair: &UPair, s: u64) -> u32;
    fn fprime(&self, pair: &UPair, s: u64) -> Rat;
    fn final_cx(&self, u: BitStr) -> u32;
    fn final_cz(&self, pair: &UPair) -> u32;
    fn stabilization_time(&self) -> u64;
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic oracle built from explicit staircases; strings and pairs
/// not listed sit constantly at `n`.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    n: u8,
    x: BTreeMap<BitStr, Staircase>,
    z: BTreeMap<UPair, Staircase>,
    mode: FprimeMode,
    seed: u64,
}

impl SyntheticOracle {
    pub fn new(
        n: u8,
        x: BTreeMap<BitStr, Staircase>,
        z: BTreeMap<UPair, Staircase>,
        mode: FprimeMode,
        seed: u64,
    ) -> Result<Self, OracleError> {
        if x.keys().any(|u| u.len() != n) || z.keys().any(|p| p.len() != n) {
            return Err(OracleError::SizeMismatch);
        }
        Ok(SyntheticOracle {
            n,
            x,
            z,
            mode,
            seed,
        })
    }

    pub fn x_staircases(&self) -> &BTreeMap<BitStr, Staircase> {
        &self.x
    }

    pub fn z_staircases(&self) -> &BTreeMap<UPair, Staircase> {
        &self.z
    }

    pub fn mode(&self) -> &FprimeMode {
        &self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn ratio_at(&self, pair: &UPair, s: u64) -> Rat {
        let num = self.cz(pair, s);
        let den = self.cx(pair.lo(), s).max(self.cx(pair.hi(), s));
        if den == 0 {
            // A pair of the single zero-complexity string; by convention 0.
            Rat::zero()
        } else {
            Rat::new(num.into(), den.into())
        }
    }

    /// Checks the program-counting constraints the reduction relies on: at
    /// most `2^i` strings ever sit at level `i`, and per slice fewer than
    /// `2^(i+1)` partners ever sit at level `i`.
    pub fn verify_counting(&self) -> Result<(), OracleError> {
        let mut per_level: BTreeMap<u32, u64> = BTreeMap::new();
        for stairs in self.x.values() {
            for level in stairs.levels() {
                if level < u32::from(self.n) {
                    *per_level.entry(level).or_insert(0) += 1;
                }
            }
        }
        for (&level, &count) in &per_level {
            if count > crate::board::row_budget(level) {
                return Err(OracleError::XCountingViolated { level, count });
            }
        }
        let mut per_slice: BTreeMap<(BitStr, u32), u64> = BTreeMap::new();
        for (pair, stairs) in &self.z {
            let ends: &[BitStr] = if pair.is_singleton() {
                &[pair.lo()]
            } else {
                &[pair.lo(), pair.hi()]
            };
            for level in stairs.levels() {
                if level < u32::from(self.n) {
                    for &u in ends {
                        *per_slice.entry((u, level)).or_insert(0) += 1;
                    }
                }
            }
        }
        for (&(slice, level), &count) in &per_slice {
            if count >= 2 * crate::board::row_budget(level) {
                return Err(OracleError::ZCountingViolated {
                    slice,
                    level,
                    count,
                });
            }
        }
        Ok(())
    }
}

impl ApproxOracle for SyntheticOracle {
    fn n(&self) -> u8 {
        self.n
    }

    fn cx(&self, u: BitStr, s: u64) -> u32 {
        self.x.get(&u).map_or(u32::from(self.n), |st| st.at(s))
    }

    fn cz(&self, pair: &UPair, s: u64) -> u32 {
        self.z.get(pair).map_or(u32::from(self.n), |st| st.at(s))
    }

    fn fprime(&self, pair: &UPair, s: u64) -> Rat {
        match &self.mode {
            FprimeMode::Exact => self.ratio_at(pair, s),
            FprimeMode::Lagged(lag) => self.ratio_at(pair, s.saturating_sub(*lag).max(1)),
            FprimeMode::Noisy { eps } => {
                let s_eff = s.min(self.stabilization_time());
                let h = splitmix(self.seed ^ pair.linear_index().wrapping_mul(0x9e37) ^ s_eff);
                // Deterministic noise in [-eps, eps], resolution 2^-16.
                let k = (h % (1 << 17)) as i64 - (1 << 16);
                self.ratio_at(pair, s) + eps * crate::rat::rat(k, 1 << 16)
            }
        }
    }

    fn final_cx(&self, u: BitStr) -> u32 {
        self.x
            .get(&u)
            .map_or(u32::from(self.n), |st| st.final_value())
    }

    fn final_cz(&self, pair: &UPair) -> u32 {
        self.z
            .get(pair)
            .map_or(u32::from(self.n), |st| st.final_value())
    }

    fn stabilization_time(&self) -> u64 {
        self.x
            .values()
            .chain(self.z.values())
            .map(|st| st.stabilization())
            .max()
            .unwrap_or(1)
    }
}

/// Generation parameters for counting-constrained random oracles.
#[derive(Debug, Clone)]
pub struct OracleGenSpec {
    pub n: u8,
    /// Upper bound on schedule drops per string and per pair.
    pub max_steps: u32,
    /// All schedules are constant past this time.
    pub stabilization: u64,
    pub mode: FprimeMode,
    /// Shift every X final value up by `4 * ceil(log2 n)`, capped at `n`,
    /// mimicking the prefix-complexity overhead folded into final values.
    pub prefix_mode: bool,
}

impl OracleGenSpec {
    pub fn exact(n: u8) -> Self {
        OracleGenSpec {
            n,
            max_steps: 3,
            stabilization: 40,
            mode: FprimeMode::Exact,
            prefix_mode: false,
        }
    }
}

/// Random synthetic oracle honoring monotonicity, convergence, and the
/// program-counting constraints.
pub fn make_synthetic_oracle(spec: &OracleGenSpec, seed: u64) -> SyntheticOracle {
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_levels = u32::from(n);

    // X side: capacity 2^i at level i < n, level n free. Levels 0 is kept
    // empty so max{cx(u), cx(v)} never vanishes.
    let mut x_used: BTreeMap<u32, u64> = BTreeMap::new();
    let mut x = BTreeMap::new();
    let mut strings: Vec<BitStr> = BitStr::all(n).collect();
    use rand::seq::SliceRandom;
    strings.shuffle(&mut rng);
    for u in strings {
        if rng.random_bool(0.4) {
            continue; // stays constant at n
        }
        let mut steps: Vec<(u64, u32)> = alloc::vec![(1, n_levels)];
        let mut cur = n_levels;
        let mut time = 1u64;
        for _ in 0..rng.random_range(1..=spec.max_steps) {
            if cur <= 1 {
                break;
            }
            let lowest = cur.saturating_sub(4).max(1);
            let candidates: Vec<u32> = (lowest..cur)
                .filter(|&j| x_used.get(&j).copied().unwrap_or(0) < crate::board::row_budget(j))
                .collect();
            if candidates.is_empty() {
                break;
            }
            let j = candidates[rng.random_range(0..candidates.len())];
            time += rng.random_range(1..=spec.stabilization / 4 + 1);
            if time >= spec.stabilization {
                break;
            }
            *x_used.entry(j).or_insert(0) += 1;
            steps.push((time, j));
            cur = j;
        }
        if steps.len() > 1 {
            x.insert(u, Staircase::new(steps).expect("constructed monotone"));
        }
    }
    if spec.prefix_mode {
        let offset = 4 * (u32::from(n).next_power_of_two().trailing_zeros().max(1));
        let shifted: BTreeMap<BitStr, Staircase> = x
            .into_iter()
            .map(|(u, st)| {
                let steps = st
                    .steps()
                    .iter()
                    .map(|&(t, v)| (t, (v + offset).min(n_levels)))
                    .collect::<Vec<_>>();
                // Collapse steps made equal by the cap.
                let mut dedup: Vec<(u64, u32)> = Vec::new();
                for (t, v) in steps {
                    if dedup.last().map(|l| l.1) != Some(v) {
                        dedup.push((t, v));
                    }
                }
                (u, Staircase::new(dedup).expect("still monotone"))
            })
            .collect();
        x = shifted;
    }

    // Z side: per-slice caps of 2^(i+1) - 1 at level i.
    let mut z_used: BTreeMap<(BitStr, u32), u64> = BTreeMap::new();
    let mut z = BTreeMap::new();
    let mut pairs: Vec<UPair> = UPair::all(n).collect();
    pairs.shuffle(&mut rng);
    let budget = |level: u32| 2 * crate::board::row_budget(level) - 1;
    for pair in pairs.into_iter().take(1usize << (n.min(6) + 2)) {
        if rng.random_bool(0.5) {
            continue;
        }
        let ends: Vec<BitStr> = if pair.is_singleton() {
            alloc::vec![pair.lo()]
        } else {
            alloc::vec![pair.lo(), pair.hi()]
        };
        let mut steps: Vec<(u64, u32)> = alloc::vec![(1, n_levels)];
        let mut cur = n_levels;
        let mut time = 1u64;
        for _ in 0..rng.random_range(1..=spec.max_steps) {
            if cur <= 1 {
                break;
            }
            // Floor of 1: a zero pair schedule would pin the declared ratio
            // onto the open lower bound of the sandwich.
            let lowest = cur.saturating_sub(4).max(1);
            let candidates: Vec<u32> = (lowest..cur)
                .filter(|&j| {
                    ends.iter()
                        .all(|&u| z_used.get(&(u, j)).copied().unwrap_or(0) < budget(j))
                })
                .collect();
            if candidates.is_empty() {
                break;
            }
            let j = candidates[rng.random_range(0..candidates.len())];
            time += rng.random_range(1..=spec.stabilization / 4 + 1);
            if time >= spec.stabilization {
                break;
            }
            for &u in &ends {
                *z_used.entry((u, j)).or_insert(0) += 1;
            }
            steps.push((time, j));
            cur = j;
        }
        if steps.len() > 1 {
            z.insert(pair, Staircase::new(steps).expect("constructed monotone"));
        }
    }

    let oracle = SyntheticOracle {
        n,
        x,
        z,
        mode: spec.mode.clone(),
        seed,
    };
    debug_assert!(oracle.verify_counting().is_ok());
    oracle
}

/// Which game's search conditions the reduction Bob applies.
#[derive(Debug, Clone)]
pub enum OracleVariant {
    /// Strict conditions over every string and pair.
    G { c: u32 },
    /// Non-strict conditions over pairs at or above the activation
    /// threshold, with an `eps'` tolerance on `fprime`.
    H { c: u32, eps_prime: Rat },
}

/// Reduction Bob: each round searches `s > r_prev` up to `s_max` for a time
/// at which the oracle is compatible with the board, then mirrors the
/// oracle onto the grids and declares `fprime(. , s)` for every pair.
///
/// Enumerates all strings and pairs, so intended for small boards.
pub struct OracleBob<O: ApproxOracle> {
    oracle: O,
    variant: OracleVariant,
    s_max: u64,
    r_prev: u64,
    /// Times found so far, one per round Bob actually moved.
    pub r_history: Vec<u64>,
    /// Rounds in which no admissible time was found.
    pub stalls: u32,
}

impl<O: ApproxOracle> OracleBob<O> {
    pub fn new(oracle: O, variant: OracleVariant, s_max: u64) -> Self {
        OracleBob {
            oracle,
            variant,
            s_max,
            r_prev: 0,
            r_history: Vec::new(),
            stalls: 0,
        }
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    fn conditions_hold(&self, st: &GameState, s: u64) -> bool {
        let n = st.n();
        let grid = st.grid();
        match &self.variant {
            OracleVariant::G { c } => {
                for u in BitStr::all(n) {
                    if self.oracle.cx(u, s) >= grid.x_value(u) + c {
                        return false;
                    }
                }
                for pair in UPair::all(n) {
                    if self.oracle.cz(&pair, s) >= grid.z_value(&pair) + c {
                        return false;
                    }
                    let den = self
                        .oracle
                        .cx(pair.lo(), s)
                        .max(self.oracle.cx(pair.hi(), s));
                    if den == 0 {
                        return false;
                    }
                    let ratio = Rat::new(self.oracle.cz(&pair, s).into(), den.into());
                    if self.oracle.fprime(&pair, s) != ratio {
                        return false;
                    }
                }
                true
            }
            OracleVariant::H { c, eps_prime } => {
                let threshold = st.threshold_value();
                for pair in UPair::all(n) {
                    let cu = self.oracle.cx(pair.lo(), s);
                    let cv = self.oracle.cx(pair.hi(), s);
                    if cu.max(cv) < threshold {
                        continue;
                    }
                    if cu > grid.x_value(pair.lo()) + c || cv > grid.x_value(pair.hi()) + c {
                        return false;
                    }
                    if self.oracle.cz(&pair, s) > grid.z_value(&pair) + c {
                        return false;
                    }
                    let ratio = Rat::new(self.oracle.cz(&pair, s).into(), cu.max(cv).into());
                    if rat_abs(&(self.oracle.fprime(&pair, s) - ratio)) > *eps_prime {
                        return false;
                    }
                }
                true
            }
        }
    }
}

impl<O: ApproxOracle> BobStrategy for OracleBob<O> {
    fn next_move(&mut self, st: &GameState) -> Result<BobMove, StrategyError> {
        if self.oracle.n() != st.n() {
            return Err(StrategyError::new("oracle board size mismatch"));
        }
        let n = st.n();
        let grid = st.grid();
        let found = (self.r_prev + 1..=self.s_max).find(|&s| self.conditions_hold(st, s));
        let Some(s) = found else {
            self.stalls += 1;
            // Stall: keep every value as-is (carry-forward); round 1 still
            // owes a default.
            return Ok(BobMove {
                placements: Vec::new(),
                f_default: (st.round() == 1).then(|| rat_u(1)),
                f_updates: BTreeMap::new(),
            });
        };
        self.r_prev = s;
        self.r_history.push(s);

        let mut placements = Vec::new();
        for u in BitStr::all(n) {
            let row = self.oracle.cx(u, s);
            if row < u32::from(n) && !grid.has_token(Player::Bob, &Column::X(u), row) {
                placements.push(TokenPlacement::x(Player::Bob, u, row));
            }
        }
        let mut updates = BTreeMap::new();
        let first = st.round() == 1;
        for pair in UPair::all(n) {
            let row = self.oracle.cz(&pair, s) + 1;
            if row < u32::from(n) && !grid.has_token(Player::Bob, &Column::Z(pair), row) {
                placements.push(TokenPlacement::z(Player::Bob, pair, row));
            }
            let value = self.oracle.fprime(&pair, s);
            let declare = match st.current_f(&pair) {
                Some(current) => current != &value,
                None => true,
            };
            if first || declare {
                updates.insert(pair, value);
            }
        }
        Ok(BobMove {
            placements,
            f_default: first.then(|| rat_u(1)),
            f_updates: updates,
        })
    }
}

/// Scripted Alice moves that track an oracle's declared limits: tokens at
/// each string's final `cx` and each scheduled pair's final `cz + 1`, a few
/// per round. Pressure the reduction Bob can always answer.
pub fn limit_probe_moves(oracle: &SyntheticOracle, per_round: usize) -> Vec<AliceMove> {
    let n = oracle.n();
    let mut placements = Vec::new();
    for (u, stairs) in oracle.x_staircases() {
        let row = stairs.final_value();
        if row < u32::from(n) {
            placements.push(TokenPlacement::x(Player::Alice, *u, row));
        }
    }
    for (pair, stairs) in oracle.z_staircases() {
        let row = stairs.final_value() + 1;
        if row < u32::from(n) {
            placements.push(TokenPlacement::z(Player::Alice, *pair, row));
        }
    }
    placements
        .chunks(per_round.max(1))
        .map(|chunk| AliceMove {
            placements: chunk.to_vec(),
        })
        .collect()
}
