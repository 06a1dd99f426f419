//! Rules, verdicts, transcripts and deterministic replay for games `G` and `H`.
//!
//! A round is one Alice half-turn (at least one effective token) followed by
//! one Bob half-turn (any number of tokens plus the declaration of `f(uv, t)`
//! for every pair, represented sparsely as a round-1 default plus per-round
//! overrides). Requirement checks run after Bob's half-turn, in order: row
//! restriction (enforced during placement), then the ratio requirement
//! ((c) or (eps)), then the history requirement ((k) or (a)). The first
//! failure ends the game.
//!
//! Pairs are checked explicitly once they carry a `Z` token, an `f`
//! override, or have both endpoints' `X` columns touched; all remaining
//! pairs are indistinguishable (`Z = n`, `max X = n`, `f` = default) and are
//! checked once per round as a class.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};

use crate::board::{
    BitStr, BoardError, Column, GridState, PlaceOutcome, Player, TokenPlacement, UPair,
};
use crate::rat::{rat_abs, rat_u, DisplayRatio, Rat};
use crate::series::ValueSeries;

/// Activation threshold for the (eps)/(a) requirements of game `H`.
///
/// `Sqrt` is `ceil(sqrt(n))`; `Pow { num, den }` is the least `t >= 1` with
/// `t^den >= n^num`, computed in integer arithmetic so replays are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Sqrt,
    Const(u32),
    Pow { num: u32, den: u32 },
}

impl Threshold {
    pub fn value(&self, n: u8) -> u32 {
        match *self {
            Threshold::Sqrt => {
                let n = u32::from(n);
                (1..).find(|t| t * t >= n).unwrap()
            }
            Threshold::Const(v) => v,
            Threshold::Pow { num, den } => {
                let target = (u128::from(n)).pow(num);
                (1u128..)
                    .find(|t| t.pow(den) >= target)
                    .map(|t| t as u32)
                    .unwrap()
            }
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Sqrt => write!(f, "sqrt"),
            Threshold::Const(v) => write!(f, "const:{v}"),
            Threshold::Pow { num, den } => write!(f, "pow:{num}/{den}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameKind {
    /// Sandwich requirement (c) and oscillation cap (k).
    G { c: u32, k: u64 },
    /// Band requirement (eps) and total-update cap (a), both gated by the
    /// activation threshold.
    H { eps: Rat, a: Rat },
}

impl GameKind {
    pub fn letter(&self) -> char {
        match self {
            GameKind::G { .. } => 'g',
            GameKind::H { .. } => 'h',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameConfig {
    pub n: u8,
    pub kind: GameKind,
    pub threshold: Threshold,
    pub max_rounds: u32,
}

pub const DEFAULT_MAX_ROUNDS: u32 = 10_000;

impl GameConfig {
    pub fn game_g(n: u8, c: u32, k: u64) -> Self {
        GameConfig {
            n,
            kind: GameKind::G { c, k },
            threshold: Threshold::Sqrt,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }

    pub fn game_h(n: u8, eps: Rat, a: Rat) -> Self {
        GameConfig {
            n,
            kind: GameKind::H { eps, a },
            threshold: Threshold::Sqrt,
            max_rounds: DEFAULT_MAX_ROUNDS,
        }
    }

    pub fn with_threshold(mut self, threshold: Threshold) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 || self.n > crate::board::MAX_N {
            return Err(ConfigError::BadBoardSize(self.n));
        }
        match &self.kind {
            GameKind::G { c, .. } => {
                if *c < 1 {
                    return Err(ConfigError::BadC(*c));
                }
            }
            GameKind::H { eps, a } => {
                if !(eps > &Rat::zero() && eps < &rat_u(1)) {
                    return Err(ConfigError::BadEps);
                }
                if a.is_negative() {
                    return Err(ConfigError::BadA);
                }
            }
        }
        if let Threshold::Pow { num, den } = self.threshold {
            if den == 0 || num > 16 || den > 16 {
                return Err(ConfigError::BadThreshold);
            }
        }
        if self.threshold.value(self.n) < 1 {
            return Err(ConfigError::BadThreshold);
        }
        if self.max_rounds == 0 {
            return Err(ConfigError::BadMaxRounds);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("board size {0} out of range")]
    BadBoardSize(u8),
    #[error("game G requires c >= 1, got {0}")]
    BadC(u32),
    #[error("game H requires 0 < eps < 1")]
    BadEps,
    #[error("game H requires a >= 0")]
    BadA,
    #[error("threshold invalid for this board size")]
    BadThreshold,
    #[error("max_rounds must be positive")]
    BadMaxRounds,
}

/// Alice's half-turn: a non-empty batch of placements. An empty batch (or
/// one consisting only of no-ops) means she cannot move and loses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AliceMove {
    pub placements: Vec<TokenPlacement>,
}

impl AliceMove {
    pub fn terminate() -> Self {
        AliceMove::default()
    }
}

/// Bob's half-turn. `f_default` is required exactly at round 1 and covers
/// every pair never named in any `f_updates`; later rounds carry forward.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BobMove {
    pub placements: Vec<TokenPlacement>,
    pub f_default: Option<Rat>,
    pub f_updates: BTreeMap<UPair, Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    /// Bob exceeded a row budget.
    RowRestriction,
    ReqC,
    ReqK,
    ReqEps,
    ReqA,
    AliceNoMove,
    AliceRowRestriction,
    AliceError,
    BobError,
}

impl VerdictReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerdictReason::RowRestriction => "row_restriction",
            VerdictReason::ReqC => "req_c",
            VerdictReason::ReqK => "req_k",
            VerdictReason::ReqEps => "req_eps",
            VerdictReason::ReqA => "req_a",
            VerdictReason::AliceNoMove => "alice_no_move",
            VerdictReason::AliceRowRestriction => "alice_row_restriction",
            VerdictReason::AliceError => "alice_error",
            VerdictReason::BobError => "bob_error",
        }
    }
}

impl fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    None,
    Pair(UPair),
    Placement(TokenPlacement),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub winner: Player,
    pub reason: VerdictReason,
    pub round: u32,
    pub witness: Witness,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} wins at round {} via {}",
            self.winner, self.round, self.reason
        )?;
        match &self.witness {
            Witness::None => Ok(()),
            Witness::Pair(p) => write!(f, " on pair {p}"),
            Witness::Placement(p) => write!(f, " on {} row {}", p.column, p.row),
        }
    }
}

/// Errors for moves that are structurally invalid (as opposed to losing).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoveError {
    #[error("move applied out of turn")]
    OutOfTurn,
    #[error("placement by the wrong player")]
    WrongPlayer,
    #[error("placement column has wrong length")]
    WrongLength,
    #[error("f_default required at round 1")]
    MissingDefault,
    #[error("f_default declared after round 1")]
    UnexpectedDefault,
    #[error("f update names a pair of the wrong length")]
    BadUpdatePair,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("round limit {0} exceeded; strategies did not terminate")]
    RoundLimit(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Board(#[from] BoardError),
    #[error("malformed turn at round {round}: {source}")]
    Malformed { round: u32, source: MoveError },
    #[error("replay diverged at round {round}: {detail}")]
    Divergence { round: u32, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Alice,
    Bob,
}

/// Live match state: boards, declared-value series, and the bookkeeping
/// needed to check requirements sparsely.
#[derive(Debug, Clone)]
pub struct GameState {
    config: GameConfig,
    threshold_value: u32,
    grid: GridState,
    round: u32,
    phase: Phase,
    f_default: Option<Rat>,
    series: BTreeMap<UPair, ValueSeries>,
    touched: BTreeSet<BitStr>,
    check_pairs: BTreeSet<UPair>,
    declared_rounds: u64,
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let grid = GridState::new(config.n).expect("validated size");
        let threshold_value = config.threshold.value(config.n);
        Ok(GameState {
            config,
            threshold_value,
            grid,
            round: 1,
            phase: Phase::Alice,
            f_default: None,
            series: BTreeMap::new(),
            touched: BTreeSet::new(),
            check_pairs: BTreeSet::new(),
            declared_rounds: 0,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn n(&self) -> u8 {
        self.config.n
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn grid(&self) -> &GridState {
        &self.grid
    }

    pub fn threshold_value(&self) -> u32 {
        self.threshold_value
    }

    pub fn f_default(&self) -> Option<&Rat> {
        self.f_default.as_ref()
    }

    /// Number of completed Bob half-turns, i.e. the length of every pair's
    /// declared series.
    pub fn declared_rounds(&self) -> u64 {
        self.declared_rounds
    }

    /// Pairs subject to explicit per-pair requirement checks.
    pub fn check_pairs(&self) -> &BTreeSet<UPair> {
        &self.check_pairs
    }

    /// Strings whose X column carries at least one token.
    pub fn touched(&self) -> &BTreeSet<BitStr> {
        &self.touched
    }

    /// Materialized series (pairs named in at least one `f_updates`).
    pub fn series(&self) -> &BTreeMap<UPair, ValueSeries> {
        &self.series
    }

    pub fn series_of(&self, pair: &UPair) -> Option<&ValueSeries> {
        self.series.get(pair)
    }

    /// Current declared value for a pair; `None` before round 1 completes.
    pub fn current_f(&self, pair: &UPair) -> Option<&Rat> {
        match self.series.get(pair).and_then(|s| s.last()) {
            Some(v) => Some(v),
            None => self.f_default.as_ref(),
        }
    }

    /// Declared value of a pair at the end of round `t`.
    pub fn f_at(&self, pair: &UPair, t: u64) -> Option<&Rat> {
        if t == 0 || t > self.declared_rounds {
            return None;
        }
        match self.series.get(pair) {
            Some(s) => s.value_at(t),
            None => self.f_default.as_ref(),
        }
    }

    pub fn oscillations(&self, pair: &UPair) -> u64 {
        self.series.get(pair).map_or(0, |s| s.oscillations())
    }

    pub fn oscillations_at(&self, pair: &UPair, t: u64) -> u64 {
        self.series.get(pair).map_or(0, |s| s.oscillations_at(t))
    }

    pub fn total_update(&self, pair: &UPair) -> Rat {
        self.series
            .get(pair)
            .map_or_else(Rat::zero, |s| s.total_update().clone())
    }

    fn note_touched(&mut self, u: BitStr) {
        if self.touched.contains(&u) {
            return;
        }
        // Pairs of two touched strings get explicit checks; pairing the new
        // string with every previously touched one covers exactly the new
        // explicit pairs.
        let pairs: Vec<UPair> = self
            .touched
            .iter()
            .map(|&w| UPair::new(u, w).expect("equal lengths"))
            .collect();
        self.check_pairs.extend(pairs);
        self.check_pairs.insert(UPair::singleton(u));
        self.touched.insert(u);
    }

    fn note_placement(&mut self, p: &TokenPlacement) {
        match p.column {
            Column::X(u) => self.note_touched(u),
            Column::Z(pair) => {
                self.check_pairs.insert(pair);
            }
        }
    }

    fn validate_placement(&self, p: &TokenPlacement, player: Player) -> Result<(), MoveError> {
        if p.player != player {
            return Err(MoveError::WrongPlayer);
        }
        let len = match p.column {
            Column::X(u) => u.len(),
            Column::Z(pair) => pair.len(),
        };
        if len != self.config.n {
            return Err(MoveError::WrongLength);
        }
        Ok(())
    }

    /// Applies Alice's half-turn. `Ok(Some(_))` ends the game.
    pub fn apply_alice(&mut self, mv: &AliceMove) -> Result<Option<Verdict>, MoveError> {
        if self.phase != Phase::Alice {
            return Err(MoveError::OutOfTurn);
        }
        let mut accepted = 0usize;
        for p in &mv.placements {
            self.validate_placement(p, Player::Alice)?;
            match self.grid.place(p) {
                PlaceOutcome::Accepted => {
                    accepted += 1;
                    self.note_placement(p);
                }
                PlaceOutcome::Noop => {}
                PlaceOutcome::Violation(_) => {
                    return Ok(Some(Verdict {
                        winner: Player::Bob,
                        reason: VerdictReason::AliceRowRestriction,
                        round: self.round,
                        witness: Witness::Placement(*p),
                    }));
                }
            }
        }
        if accepted == 0 {
            return Ok(Some(Verdict {
                winner: Player::Bob,
                reason: VerdictReason::AliceNoMove,
                round: self.round,
                witness: Witness::None,
            }));
        }
        self.phase = Phase::Bob;
        Ok(None)
    }

    /// Applies Bob's half-turn: placements, then the sparse declaration,
    /// then the requirement checks. `Ok(Some(_))` ends the game.
    pub fn apply_bob(&mut self, mv: &BobMove) -> Result<Option<Verdict>, MoveError> {
        if self.phase != Phase::Bob {
            return Err(MoveError::OutOfTurn);
        }
        if self.round == 1 {
            match &mv.f_default {
                Some(v) => self.f_default = Some(v.clone()),
                None => return Err(MoveError::MissingDefault),
            }
        } else if mv.f_default.is_some() {
            return Err(MoveError::UnexpectedDefault);
        }
        for p in &mv.placements {
            self.validate_placement(p, Player::Bob)?;
            match self.grid.place(p) {
                PlaceOutcome::Accepted => self.note_placement(p),
                PlaceOutcome::Noop => {}
                PlaceOutcome::Violation(_) => {
                    return Ok(Some(Verdict {
                        winner: Player::Alice,
                        reason: VerdictReason::RowRestriction,
                        round: self.round,
                        witness: Witness::Placement(*p),
                    }));
                }
            }
        }
        // Extend every pair's series by one value: overrides first
        // materialize (back-filled with the default), then each
        // materialized series appends its new or carried value.
        for pair in mv.f_updates.keys() {
            if pair.len() != self.config.n {
                return Err(MoveError::BadUpdatePair);
            }
            if !self.series.contains_key(pair) {
                let default = self.f_default.clone().expect("set at round 1");
                self.series
                    .insert(*pair, ValueSeries::constant(default, self.declared_rounds));
                self.check_pairs.insert(*pair);
            }
        }
        for (pair, series) in self.series.iter_mut() {
            match mv.f_updates.get(pair) {
                Some(v) => series.append(v.clone()),
                None => {
                    let carry = series
                        .last()
                        .cloned()
                        .unwrap_or_else(|| self.f_default.clone().expect("set at round 1"));
                    series.append(carry);
                }
            }
        }
        self.declared_rounds += 1;

        let verdict = self.run_requirement_checks();
        if verdict.is_some() {
            return Ok(verdict);
        }
        self.round += 1;
        self.phase = Phase::Alice;
        Ok(None)
    }

    fn alice_wins(&self, reason: VerdictReason, pair: UPair) -> Verdict {
        Verdict {
            winner: Player::Alice,
            reason,
            round: self.round,
            witness: Witness::Pair(pair),
        }
    }

    fn run_requirement_checks(&self) -> Option<Verdict> {
        match &self.config.kind {
            GameKind::G { k, .. } => {
                for pair in &self.check_pairs {
                    if !self.check_req_c(pair) {
                        return Some(self.alice_wins(VerdictReason::ReqC, *pair));
                    }
                }
                if !self.untouched_class_passes_c() {
                    if let Some(pair) = self.find_untouched_pair() {
                        return Some(self.alice_wins(VerdictReason::ReqC, pair));
                    }
                }
                for (pair, series) in &self.series {
                    if series.oscillations() > *k {
                        return Some(self.alice_wins(VerdictReason::ReqK, *pair));
                    }
                }
                None
            }
            GameKind::H { a, .. } => {
                for pair in &self.check_pairs {
                    if !self.check_req_eps(pair) {
                        return Some(self.alice_wins(VerdictReason::ReqEps, *pair));
                    }
                }
                if !self.untouched_class_passes_eps() {
                    if let Some(pair) = self.find_untouched_pair() {
                        return Some(self.alice_wins(VerdictReason::ReqEps, pair));
                    }
                }
                for (pair, series) in &self.series {
                    if u64::from(self.grid.max_x(pair)) >= u64::from(self.threshold_value)
                        && series.total_update() > a
                    {
                        return Some(self.alice_wins(VerdictReason::ReqA, *pair));
                    }
                }
                None
            }
        }
    }

    /// Lower and upper bound of requirement (c) for a pair; `None` upper
    /// bound means unbounded (`max{X_u, X_v} = 0`).
    pub fn req_c_bounds(&self, pair: &UPair) -> Option<(Rat, Option<Rat>)> {
        let c = match self.config.kind {
            GameKind::G { c, .. } => i64::from(c),
            GameKind::H { .. } => return None,
        };
        let z = i64::from(self.grid.z_value(pair));
        let m = i64::from(self.grid.max_x(pair));
        let lower = Rat::new((z - 1).into(), (m + c).into());
        let upper = if m == 0 {
            None
        } else {
            Some(Rat::new((z + c).into(), m.into()))
        };
        Some((lower, upper))
    }

    /// Requirement (c): `(Z-1)/(max+c) < f < (Z+c)/max`, strict, exact.
    pub fn check_req_c(&self, pair: &UPair) -> bool {
        let Some((lower, upper)) = self.req_c_bounds(pair) else {
            return true;
        };
        let Some(f) = self.current_f(pair) else {
            return true;
        };
        &lower < f && upper.as_ref().is_none_or(|u| f < u)
    }

    /// Requirement (k): at most `k` oscillations per declared series.
    pub fn check_req_k(&self, pair: &UPair) -> bool {
        match self.config.kind {
            GameKind::G { k, .. } => self.oscillations(pair) <= k,
            GameKind::H { .. } => true,
        }
    }

    /// Center and radius of requirement (eps) for a pair, `None` when the
    /// pair is below the activation threshold.
    pub fn req_eps_band(&self, pair: &UPair) -> Option<(Rat, Rat)> {
        let GameKind::H { ref eps, .. } = self.config.kind else {
            return None;
        };
        let m = self.grid.max_x(pair);
        if m < self.threshold_value {
            return None;
        }
        let z = self.grid.z_value(pair);
        Some((Rat::new(z.into(), m.into()), eps.clone()))
    }

    /// Requirement (eps): `|f - Z/max| <= eps` for pairs at or above the
    /// activation threshold (closed band).
    pub fn check_req_eps(&self, pair: &UPair) -> bool {
        let Some((center, eps)) = self.req_eps_band(pair) else {
            return true;
        };
        let Some(f) = self.current_f(pair) else {
            return true;
        };
        rat_abs(&(f - &center)) <= eps
    }

    /// Requirement (a): full-history total update at most `a` for pairs at
    /// or above the activation threshold.
    pub fn check_req_a(&self, pair: &UPair) -> bool {
        let GameKind::H { ref a, .. } = self.config.kind else {
            return true;
        };
        if self.grid.max_x(pair) < self.threshold_value {
            return true;
        }
        self.total_update(pair) <= *a
    }

    /// Re-evaluates the named requirement for a recorded verdict; used by
    /// replay-based soundness audits.
    pub fn eval_requirement(&self, reason: VerdictReason, pair: &UPair) -> bool {
        match reason {
            VerdictReason::ReqC => self.check_req_c(pair),
            VerdictReason::ReqK => self.check_req_k(pair),
            VerdictReason::ReqEps => self.check_req_eps(pair),
            VerdictReason::ReqA => self.check_req_a(pair),
            _ => true,
        }
    }

    fn untouched_class_passes_c(&self) -> bool {
        let GameKind::G { c, .. } = self.config.kind else {
            return true;
        };
        let Some(f) = self.f_default.as_ref() else {
            return true;
        };
        let n = i64::from(self.config.n);
        let lower = Rat::new((n - 1).into(), (n + i64::from(c)).into());
        let upper = Rat::new((n + i64::from(c)).into(), n.into());
        &lower < f && f < &upper
    }

    fn untouched_class_passes_eps(&self) -> bool {
        let GameKind::H { ref eps, .. } = self.config.kind else {
            return true;
        };
        if u32::from(self.config.n) < self.threshold_value {
            return true;
        }
        let Some(f) = self.f_default.as_ref() else {
            return true;
        };
        rat_abs(&(f - &rat_u(1))) <= *eps
    }

    /// First pair (in canonical order) outside the explicit check set, if
    /// any remains; witness for untouched-class failures.
    pub fn find_untouched_pair(&self) -> Option<UPair> {
        let total = self.grid.z_column_count();
        if self.check_pairs.len() as u64 >= total {
            return None;
        }
        UPair::all(self.config.n).find(|p| !self.check_pairs.contains(p))
    }

    fn into_series(self) -> BTreeMap<UPair, ValueSeries> {
        self.series
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct StrategyError(pub String);

impl StrategyError {
    pub fn new(msg: impl Into<String>) -> Self {
        StrategyError(msg.into())
    }
}

pub trait AliceStrategy {
    fn next_move(&mut self, state: &GameState) -> Result<AliceMove, StrategyError>;
}

pub trait BobStrategy {
    fn next_move(&mut self, state: &GameState) -> Result<BobMove, StrategyError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TurnRecord {
    Alice(u32, AliceMove),
    Bob(u32, BobMove),
}

impl TurnRecord {
    pub fn round(&self) -> u32 {
        match self {
            TurnRecord::Alice(r, _) | TurnRecord::Bob(r, _) => *r,
        }
    }
}

/// Full record of a match: every half-turn, the verdict, and the final
/// declared-value series per materialized pair. Replaying the turns against
/// the config reproduces the verdict exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub config: GameConfig,
    pub turns: Vec<TurnRecord>,
    pub verdict: Verdict,
    pub series: BTreeMap<UPair, ValueSeries>,
}

/// Plays strategies against each other until a verdict. A strategy error is
/// a loss for that player, recorded distinctly.
pub fn run_match(
    config: GameConfig,
    alice: &mut dyn AliceStrategy,
    bob: &mut dyn BobStrategy,
) -> Result<Transcript, MatchError> {
    let mut state = GameState::new(config.clone())?;
    let mut turns = Vec::new();
    let verdict = loop {
        if state.round() > config.max_rounds {
            return Err(MatchError::RoundLimit(config.max_rounds));
        }
        let round = state.round();
        let strategy_loss = |winner: Player, reason| Verdict {
            winner,
            reason,
            round,
            witness: Witness::None,
        };
        let amove = match alice.next_move(&state) {
            Ok(m) => m,
            Err(_) => break strategy_loss(Player::Bob, VerdictReason::AliceError),
        };
        let applied = state.apply_alice(&amove);
        turns.push(TurnRecord::Alice(round, amove));
        match applied {
            Ok(Some(v)) => break v,
            Ok(None) => {}
            Err(_) => break strategy_loss(Player::Bob, VerdictReason::AliceError),
        }
        let bmove = match bob.next_move(&state) {
            Ok(m) => m,
            Err(_) => break strategy_loss(Player::Alice, VerdictReason::BobError),
        };
        let applied = state.apply_bob(&bmove);
        turns.push(TurnRecord::Bob(round, bmove));
        match applied {
            Ok(Some(v)) => break v,
            Ok(None) => {}
            Err(_) => break strategy_loss(Player::Alice, VerdictReason::BobError),
        }
    };
    Ok(Transcript {
        config,
        turns,
        verdict,
        series: state.into_series(),
    })
}

/// Re-simulates a transcript and returns the final state plus the verdict
/// the rules produce, without consulting the recorded one.
pub fn replay_final_state(t: &Transcript) -> Result<(GameState, Option<Verdict>), ReplayError> {
    let mut state = GameState::new(t.config.clone())?;
    let mut verdict = None;
    for (i, turn) in t.turns.iter().enumerate() {
        if verdict.is_some() {
            return Err(ReplayError::Divergence {
                round: turn.round(),
                detail: String::from("turns continue after the game ended"),
            });
        }
        if turn.round() != state.round() {
            return Err(ReplayError::Divergence {
                round: state.round(),
                detail: alloc::format!("turn {} carries round {}", i, turn.round()),
            });
        }
        let applied = match turn {
            TurnRecord::Alice(_, mv) => state.apply_alice(mv),
            TurnRecord::Bob(_, mv) => state.apply_bob(mv),
        };
        match applied {
            Ok(v) => verdict = v,
            Err(source) => {
                return Err(ReplayError::Malformed {
                    round: state.round(),
                    source,
                })
            }
        }
    }
    Ok((state, verdict))
}

/// Re-simulates and checks that the recorded verdict (and series) match.
/// Strategy-error verdicts end a transcript without a rules-level verdict
/// and are accepted as recorded.
pub fn replay(t: &Transcript) -> Result<Verdict, ReplayError> {
    let (state, verdict) = replay_final_state(t)?;
    let round = state.round();
    match verdict {
        Some(v) => {
            if v != t.verdict {
                return Err(ReplayError::Divergence {
                    round: v.round,
                    detail: alloc::format!("recorded {} but replay yields {}", t.verdict, v),
                });
            }
        }
        None => {
            let strategy_loss = matches!(
                t.verdict.reason,
                VerdictReason::AliceError | VerdictReason::BobError
            );
            if !strategy_loss {
                return Err(ReplayError::Divergence {
                    round,
                    detail: String::from("transcript ends without a rules verdict"),
                });
            }
        }
    }
    if state.series() != &t.series {
        return Err(ReplayError::Divergence {
            round,
            detail: String::from("declared-value series differ"),
        });
    }
    Ok(t.verdict.clone())
}

/// Requirement-check display helper for verdict summaries.
pub fn describe_requirement(state: &GameState, pair: &UPair) -> String {
    let z = state.grid().z_value(pair);
    let m = state.grid().max_x(pair);
    let f = state
        .current_f(pair)
        .map(|f| alloc::format!("{}", DisplayRatio(f)))
        .unwrap_or_else(|| String::from("-"));
    alloc::format!(
        "Z={} max_x={} f={} osc={} tv={}",
        z,
        m,
        f,
        state.oscillations(pair),
        DisplayRatio(&state.total_update(pair))
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    fn bs(n: u8, v: u32) -> BitStr {
        BitStr::new(n, v).unwrap()
    }

    fn pair(n: u8, a: u32, b: u32) -> UPair {
        UPair::new(bs(n, a), bs(n, b)).unwrap()
    }

    #[test]
    fn threshold_values() {
        assert_eq!(Threshold::Sqrt.value(16), 4);
        assert_eq!(Threshold::Sqrt.value(10), 4);
        assert_eq!(Threshold::Sqrt.value(1), 1);
        assert_eq!(Threshold::Const(3).value(16), 3);
        // n^(2/3) for n = 27 is 9.
        assert_eq!(Threshold::Pow { num: 2, den: 3 }.value(27), 9);
        assert_eq!(Threshold::Pow { num: 1, den: 2 }.value(16), 4);
    }

    #[test]
    fn new_game_examples() {
        let g = GameState::new(GameConfig::game_g(3, 1, 0)).unwrap();
        assert_eq!(g.grid().z_column_count(), 36);
        assert_eq!(g.round(), 1);

        let h = GameState::new(GameConfig::game_h(16, rat(3, 10), rat(1, 2))).unwrap();
        assert_eq!(h.threshold_value(), 4);

        assert!(GameState::new(GameConfig::game_g(0, 1, 0)).is_err());
        assert!(GameState::new(GameConfig::game_h(4, rat_int(1), rat_int(0))).is_err());
        assert!(GameState::new(GameConfig::game_h(4, rat(1, 2), rat_int(-1))).is_err());
    }

    fn alice_one_token(n: u8) -> AliceMove {
        AliceMove {
            placements: alloc::vec![TokenPlacement::x(Player::Alice, bs(n, 0), u32::from(n) - 1)],
        }
    }

    fn bob_default(v: Rat) -> BobMove {
        BobMove {
            f_default: Some(v),
            ..BobMove::default()
        }
    }

    #[test]
    fn alice_must_move() {
        let mut st = GameState::new(GameConfig::game_g(3, 1, 5)).unwrap();
        let v = st.apply_alice(&AliceMove::terminate()).unwrap().unwrap();
        assert_eq!(v.winner, Player::Bob);
        assert_eq!(v.reason, VerdictReason::AliceNoMove);
    }

    #[test]
    fn all_noop_move_counts_as_no_move() {
        let mut st = GameState::new(GameConfig::game_g(3, 1, 5)).unwrap();
        let mv = AliceMove {
            placements: alloc::vec![TokenPlacement::x(Player::Alice, bs(3, 0), 3)],
        };
        let v = st.apply_alice(&mv).unwrap().unwrap();
        assert_eq!(v.reason, VerdictReason::AliceNoMove);
    }

    #[test]
    fn alice_budget_violation_loses() {
        let mut st = GameState::new(GameConfig::game_g(3, 1, 5)).unwrap();
        let mv = AliceMove {
            placements: alloc::vec![
                TokenPlacement::x(Player::Alice, bs(3, 0), 0),
                TokenPlacement::x(Player::Alice, bs(3, 1), 0),
            ],
        };
        let v = st.apply_alice(&mv).unwrap().unwrap();
        assert_eq!(v.winner, Player::Bob);
        assert_eq!(v.reason, VerdictReason::AliceRowRestriction);
    }

    #[test]
    fn missing_default_is_an_error() {
        let mut st = GameState::new(GameConfig::game_g(3, 1, 5)).unwrap();
        st.apply_alice(&alice_one_token(3)).unwrap();
        let err = st.apply_bob(&BobMove::default()).unwrap_err();
        assert_eq!(err, MoveError::MissingDefault);
    }

    #[test]
    fn req_c_interval_example() {
        // Z = 5, X_u = 10, X_v = 8, c = 3: interval (4/13, 4/5).
        let mut st = GameState::new(GameConfig::game_g(12, 3, 100)).unwrap();
        let u = bs(12, 1);
        let v = bs(12, 2);
        let p = UPair::new(u, v).unwrap();
        st.apply_alice(&AliceMove {
            placements: alloc::vec![
                TokenPlacement::x(Player::Alice, u, 10),
                TokenPlacement::x(Player::Alice, v, 8),
                TokenPlacement::z(Player::Alice, p, 5),
            ],
        })
        .unwrap();
        let (lower, upper) = st.req_c_bounds(&p).unwrap();
        assert_eq!(lower, rat(4, 13));
        assert_eq!(upper, Some(rat(4, 5)));

        // The singleton {v,v} has bounds (11/11, 15/8), so the default 1
        // must be overridden there too.
        let base: BTreeMap<UPair, Rat> = [(UPair::singleton(v), rat(3, 2))].into_iter().collect();

        // f = 1/2 passes, f = 4/13 fails on the strict boundary.
        let mut updates = base.clone();
        updates.insert(p, rat(1, 2));
        let ok = st
            .clone()
            .apply_bob(&BobMove {
                f_default: Some(rat_int(1)),
                f_updates: updates,
                ..BobMove::default()
            })
            .unwrap();
        assert_eq!(ok, None);
        let mut updates = base;
        updates.insert(p, rat(4, 13));
        let v = st
            .apply_bob(&BobMove {
                f_default: Some(rat_int(1)),
                f_updates: updates,
                ..BobMove::default()
            })
            .unwrap()
            .unwrap();
        assert_eq!(v.winner, Player::Alice);
        assert_eq!(v.reason, VerdictReason::ReqC);
        assert_eq!(v.witness, Witness::Pair(p));
    }

    #[test]
    fn req_c_zero_denominator_keeps_lower_bound() {
        // max{X_u, X_v} = 0: upper bound vanishes, lower bound (Z-1)/c stays.
        let mut st = GameState::new(GameConfig::game_g(3, 3, 100)).unwrap();
        let u = bs(3, 1);
        let v = bs(3, 2);
        let p = UPair::new(u, v).unwrap();
        st.apply_alice(&AliceMove {
            placements: alloc::vec![
                TokenPlacement::x(Player::Alice, u, 0),
                TokenPlacement::z(Player::Alice, p, 2),
            ],
        })
        .unwrap();
        // Bob lowers X_v to 0 as well via his own token.
        let mv = BobMove {
            placements: alloc::vec![TokenPlacement::x(Player::Bob, v, 0)],
            f_default: Some(rat_int(1)),
            f_updates: [(p, rat_int(1000))].into_iter().collect(),
        };
        assert_eq!(st.apply_bob(&mv).unwrap(), None);
        let (lower, upper) = st.req_c_bounds(&p).unwrap();
        assert_eq!(lower, rat(1, 3));
        assert_eq!(upper, None);
    }

    #[test]
    fn req_eps_example() {
        // n = 16, eps = 3/10, X_u = 10, X_v = 8, Z = 5: f = 17/20 violates.
        let mut st = GameState::new(GameConfig::game_h(16, rat(3, 10), rat_int(100))).unwrap();
        let u = bs(16, 1);
        let v = bs(16, 2);
        let p = UPair::new(u, v).unwrap();
        st.apply_alice(&AliceMove {
            placements: alloc::vec![
                TokenPlacement::x(Player::Alice, u, 10),
                TokenPlacement::x(Player::Alice, v, 8),
                TokenPlacement::z(Player::Alice, p, 5),
            ],
        })
        .unwrap();
        // Singletons {u,u} and {v,v} sit at ratios 16/10 and 16/8 and need
        // in-band values of their own; the cross pair's ratio is 1/2 and
        // f = 17/20 misses its band by 7/20 - 3/10 = 1/20.
        let updates: BTreeMap<UPair, Rat> = [
            (UPair::singleton(u), rat(8, 5)),
            (UPair::singleton(v), rat_int(2)),
            (p, rat(17, 20)),
        ]
        .into_iter()
        .collect();
        let verdict = st
            .apply_bob(&BobMove {
                f_default: Some(rat_int(1)),
                f_updates: updates,
                ..BobMove::default()
            })
            .unwrap()
            .unwrap();
        assert_eq!(verdict.reason, VerdictReason::ReqEps);
        assert_eq!(verdict.witness, Witness::Pair(p));
    }

    #[test]
    fn sub_threshold_pairs_are_exempt() {
        let mut st = GameState::new(GameConfig::game_h(16, rat(3, 10), rat_int(0))).unwrap();
        let u = bs(16, 1);
        let v = bs(16, 2);
        let p = UPair::new(u, v).unwrap();
        // Drag max{X_u, X_v} to 3, below sqrt(16) = 4.
        st.apply_alice(&AliceMove {
            placements: alloc::vec![
                TokenPlacement::x(Player::Alice, u, 3),
                TokenPlacement::x(Player::Alice, v, 2),
            ],
        })
        .unwrap();
        let out = st
            .apply_bob(&BobMove {
                f_default: Some(rat_int(1)),
                f_updates: [(p, rat_int(5))].into_iter().collect(),
                ..BobMove::default()
            })
            .unwrap();
        assert_eq!(
            out, None,
            "band and update checks are vacuous below the threshold"
        );
    }

    #[test]
    fn req_a_closed_bound() {
        let a_values = [(rat_int(1), None), (rat(9, 10), Some(VerdictReason::ReqA))];
        for (a, expect) in a_values {
            let mut st = GameState::new(GameConfig::game_h(16, rat(6, 10), a)).unwrap();
            let u = bs(16, 1);
            let v = bs(16, 2);
            let p = UPair::new(u, v).unwrap();
            // Three rounds declaring 9/10, 4/10, 9/10: total update exactly 1.
            let values = [rat(9, 10), rat(4, 10), rat(9, 10)];
            let mut verdict = None;
            for (i, val) in values.into_iter().enumerate() {
                let amove = AliceMove {
                    placements: alloc::vec![TokenPlacement::x(
                        Player::Alice,
                        bs(16, 8 + i as u32),
                        15
                    )],
                };
                assert_eq!(st.apply_alice(&amove).unwrap(), None);
                let bmove = BobMove {
                    f_default: (i == 0).then(|| rat_int(1)),
                    f_updates: [(p, val)].into_iter().collect(),
                    ..BobMove::default()
                };
                verdict = st.apply_bob(&bmove).unwrap();
                if verdict.is_some() {
                    break;
                }
            }
            assert_eq!(verdict.map(|v| v.reason), expect);
        }
    }

    #[test]
    fn req_k_counts_oscillations() {
        let mut st = GameState::new(GameConfig::game_g(4, 10, 2)).unwrap();
        let p = pair(4, 1, 2);
        // Values stay inside the (c) sandwich; the zigzag alone trips (k).
        let values = [rat_int(1), rat_int(2), rat_int(1), rat_int(2)];
        let mut verdict = None;
        for (i, val) in values.into_iter().enumerate() {
            st.apply_alice(&AliceMove {
                placements: alloc::vec![TokenPlacement::x(Player::Alice, bs(4, 4 + i as u32), 3)],
            })
            .unwrap();
            verdict = st
                .apply_bob(&BobMove {
                    f_default: (i == 0).then(|| rat_int(1)),
                    f_updates: [(p, val)].into_iter().collect(),
                    ..BobMove::default()
                })
                .unwrap();
            if verdict.is_some() {
                break;
            }
        }
        let v = verdict.unwrap();
        assert_eq!(v.reason, VerdictReason::ReqK);
        assert_eq!(st.oscillations(&p), 3);
    }

    #[test]
    fn untouched_class_catches_bad_default() {
        let mut st = GameState::new(GameConfig::game_g(4, 1, 5)).unwrap();
        st.apply_alice(&alice_one_token(4)).unwrap();
        // Untouched pairs demand f in (3/5, 5/4); the touched singleton
        // {0,0} allows (3/4, 5/3), so 3/2 fails exactly on the class.
        let v = st.apply_bob(&bob_default(rat(3, 2))).unwrap().unwrap();
        assert_eq!(v.reason, VerdictReason::ReqC);
        if let Witness::Pair(p) = v.witness {
            assert!(!st.check_pairs().contains(&p));
        } else {
            panic!("expected a pair witness");
        }
    }

    #[test]
    fn carry_forward_series_counts_nothing() {
        let mut st = GameState::new(GameConfig::game_g(4, 2, 0)).unwrap();
        let p = pair(4, 1, 2);
        for i in 0..3 {
            st.apply_alice(&AliceMove {
                placements: alloc::vec![TokenPlacement::x(Player::Alice, bs(4, 4 + i), 3)],
            })
            .unwrap();
            let bmove = BobMove {
                f_default: (i == 0).then(|| rat_int(1)),
                f_updates: if i == 0 {
                    [(p, rat(9, 10))].into_iter().collect()
                } else {
                    BTreeMap::new()
                },
                ..BobMove::default()
            };
            assert_eq!(st.apply_bob(&bmove).unwrap(), None, "round {i}");
        }
        assert_eq!(st.oscillations(&p), 0);
        assert_eq!(st.total_update(&p), Rat::zero());
        assert_eq!(st.series_of(&p).unwrap().len(), 3);
        assert_eq!(st.declared_rounds(), 3);
    }

    #[test]
    fn late_materialization_backfills_default() {
        let mut st = GameState::new(GameConfig::game_g(4, 2, 10)).unwrap();
        let p = pair(4, 1, 2);
        for i in 0..3 {
            st.apply_alice(&AliceMove {
                placements: alloc::vec![TokenPlacement::x(Player::Alice, bs(4, 4 + i), 3)],
            })
            .unwrap();
            let bmove = BobMove {
                f_default: (i == 0).then(|| rat_int(1)),
                f_updates: if i == 2 {
                    [(p, rat(9, 10))].into_iter().collect()
                } else {
                    BTreeMap::new()
                },
                ..BobMove::default()
            };
            assert_eq!(st.apply_bob(&bmove).unwrap(), None);
        }
        let s = st.series_of(&p).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.value_at(1), Some(&rat_int(1)));
        assert_eq!(s.value_at(3), Some(&rat(9, 10)));
        assert_eq!(s.oscillations(), 1);
    }

    struct ScriptAlice(Vec<AliceMove>);
    struct ScriptBob(Vec<BobMove>);

    impl AliceStrategy for ScriptAlice {
        fn next_move(&mut self, _: &GameState) -> Result<AliceMove, StrategyError> {
            if self.0.is_empty() {
                Ok(AliceMove::terminate())
            } else {
                Ok(self.0.remove(0))
            }
        }
    }

    impl BobStrategy for ScriptBob {
        fn next_move(&mut self, _: &GameState) -> Result<BobMove, StrategyError> {
            if self.0.is_empty() {
                Ok(BobMove::default())
            } else {
                Ok(self.0.remove(0))
            }
        }
    }

    #[test]
    fn run_match_and_replay_round_trip() {
        let config = GameConfig::game_g(3, 2, 5);
        let mut alice = ScriptAlice(alloc::vec![
            alice_one_token(3),
            AliceMove {
                placements: alloc::vec![TokenPlacement::z(Player::Alice, pair(3, 1, 2), 1)],
            },
        ]);
        let mut bob = ScriptBob(alloc::vec![
            bob_default(rat_int(1)),
            BobMove {
                f_default: None,
                f_updates: [(pair(3, 1, 2), rat(1, 2))].into_iter().collect(),
                ..BobMove::default()
            }
        ]);
        let t = run_match(config, &mut alice, &mut bob).unwrap();
        // Alice ran out of moves after two rounds.
        assert_eq!(t.verdict.reason, VerdictReason::AliceNoMove);
        assert_eq!(replay(&t).unwrap(), t.verdict);
    }

    #[test]
    fn replay_detects_tampering() {
        let config = GameConfig::game_g(3, 2, 5);
        let mut alice = ScriptAlice(alloc::vec![alice_one_token(3)]);
        let mut bob = ScriptBob(alloc::vec![bob_default(rat_int(1))]);
        let mut t = run_match(config, &mut alice, &mut bob).unwrap();
        t.verdict.reason = VerdictReason::ReqC;
        t.verdict.winner = Player::Alice;
        assert!(matches!(replay(&t), Err(ReplayError::Divergence { .. })));
    }

    #[test]
    fn strategy_error_is_a_recorded_loss() {
        struct FailingAlice;
        impl AliceStrategy for FailingAlice {
            fn next_move(&mut self, _: &GameState) -> Result<AliceMove, StrategyError> {
                Err(StrategyError::new("boom"))
            }
        }
        let t = run_match(
            GameConfig::game_g(3, 2, 5),
            &mut FailingAlice,
            &mut ScriptBob(Vec::new()),
        )
        .unwrap();
        assert_eq!(t.verdict.winner, Player::Bob);
        assert_eq!(t.verdict.reason, VerdictReason::AliceError);
        assert_eq!(replay(&t).unwrap(), t.verdict);
    }
}
