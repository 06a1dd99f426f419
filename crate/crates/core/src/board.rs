//! Boards, token placement and row-budget accounting.
//!
//! Grid `X` has one column per n-bit string; grid `Z` has one column per
//! unordered pair of n-bit strings (singletons allowed). Rows are indexed
//! `0..n`. The *value* of a column is the minimal occupied row over both
//! players, or `n` when empty. The row restriction allows each player at
//! most `2^i` tokens in row `i` of grid `X` and of every slice `Z_u` (the
//! sub-board of all columns containing the string `u`).
//!
//! Only touched columns are materialized; `Z` has `(2^n + 1 choose 2)`
//! columns and is never allocated densely.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

/// Largest supported board size; column indices fit in `u32`.
pub const MAX_N: u8 = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoardError {
    #[error("board size {0} out of range 1..={MAX_N}")]
    BadSize(u8),
    #[error("value {value} does not fit in {len} bits")]
    ValueOverflow { len: u8, value: u32 },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(u8, u8),
}

/// An n-bit string, `1 <= n <= 30`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitStr {
    len: u8,
    value: u32,
}

impl BitStr {
    pub fn new(len: u8, value: u32) -> Result<Self, BoardError> {
        if len == 0 || len > MAX_N {
            return Err(BoardError::BadSize(len));
        }
        if value >> len != 0 {
            return Err(BoardError::ValueOverflow { len, value });
        }
        Ok(BitStr { len, value })
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    /// All strings of the given length in numeric order.
    pub fn all(len: u8) -> impl Iterator<Item = BitStr> {
        let count = 1u64 << len;
        (0..count).map(move |v| BitStr {
            len,
            value: v as u32,
        })
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(s: &str) -> Result<Self, BoardError> {
        let len = s.len() as u8;
        if len == 0 || len > MAX_N {
            return Err(BoardError::BadSize(len));
        }
        let mut value = 0u32;
        for ch in s.chars() {
            value <<= 1;
            match ch {
                '0' => {}
                '1' => value |= 1,
                _ => {
                    return Err(BoardError::ValueOverflow {
                        len,
                        value: u32::MAX,
                    })
                }
            }
        }
        Ok(BitStr { len, value })
    }
}

impl fmt::Display for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            write!(f, "{}", (self.value >> i) & 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical unordered pair of equal-length strings, `lo <= hi`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UPair {
    lo: BitStr,
    hi: BitStr,
}

impl UPair {
    /// Canonicalizes `{u, v}`; `u == v` yields a singleton pair.
    pub fn new(u: BitStr, v: BitStr) -> Result<Self, BoardError> {
        if u.len() != v.len() {
            return Err(BoardError::LengthMismatch(u.len(), v.len()));
        }
        if u.value() <= v.value() {
            Ok(UPair { lo: u, hi: v })
        } else {
            Ok(UPair { lo: v, hi: u })
        }
    }

    pub fn singleton(u: BitStr) -> Self {
        UPair { lo: u, hi: u }
    }

    pub fn lo(&self) -> BitStr {
        self.lo
    }

    pub fn hi(&self) -> BitStr {
        self.hi
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn len(&self) -> u8 {
        self.lo.len()
    }

    /// Position in the canonical enumeration of unordered pairs:
    /// `(a, b)` with `a <= b` maps to `b(b+1)/2 + a`.
    pub fn linear_index(&self) -> u64 {
        let a = self.lo.value() as u64;
        let b = self.hi.value() as u64;
        b * (b + 1) / 2 + a
    }

    /// The other endpoint, given one of the two.
    pub fn other(&self, u: BitStr) -> BitStr {
        if u == self.lo {
            self.hi
        } else {
            self.lo
        }
    }

    /// All unordered pairs of the given length in `linear_index` order.
    pub fn all(len: u8) -> impl Iterator<Item = UPair> {
        let count = 1u64 << len;
        (0..count).flat_map(move |b| {
            (0..=b).map(move |a| UPair {
                lo: BitStr {
                    len,
                    value: a as u32,
                },
                hi: BitStr {
                    len,
                    value: b as u32,
                },
            })
        })
    }
}

impl fmt::Display for UPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

impl fmt::Debug for UPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    Alice,
    Bob,
}

impl Player {
    pub fn index(self) -> usize {
        match self {
            Player::Alice => 0,
            Player::Bob => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::Alice => Player::Bob,
            Player::Bob => Player::Alice,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Alice => write!(f, "alice"),
            Player::Bob => write!(f, "bob"),
        }
    }
}

/// A column of one of the two boards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Column {
    X(BitStr),
    Z(UPair),
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::X(u) => write!(f, "X[{u}]"),
            Column::Z(p) => write!(f, "Z[{p}]"),
        }
    }
}

/// One token placement. Rows at or beyond `n` are legal no-ops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenPlacement {
    pub column: Column,
    pub row: u32,
    pub player: Player,
}

impl TokenPlacement {
    pub fn x(player: Player, column: BitStr, row: u32) -> Self {
        TokenPlacement {
            column: Column::X(column),
            row,
            player,
        }
    }

    pub fn z(player: Player, pair: UPair, row: u32) -> Self {
        TokenPlacement {
            column: Column::Z(pair),
            row,
            player,
        }
    }
}

/// The ledger a placement ran over budget in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ledger {
    GridX,
    Slice(BitStr),
}

impl fmt::Display for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ledger::GridX => write!(f, "X"),
            Ledger::Slice(u) => write!(f, "Z_{u}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetViolation {
    pub player: Player,
    pub ledger: Ledger,
    pub row: u32,
}

impl fmt::Display for BudgetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} over budget in row {} of {} (limit {})",
            self.player,
            self.row,
            self.ledger,
            row_budget(self.row)
        )
    }
}

/// Outcome of a placement. Violations never mutate state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceOutcome {
    Accepted,
    Noop,
    Violation(BudgetViolation),
}

impl PlaceOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, PlaceOutcome::Accepted)
    }
}

/// Per-player row budget for row `i`.
pub fn row_budget(row: u32) -> u64 {
    1u64 << row.min(63)
}

/// Sparse board pair with per-player budget ledgers.
///
/// Row sets per column are bitmasks (rows fit in 30 bits). Values are
/// non-increasing over a game since tokens are only added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridState {
    n: u8,
    x_tokens: [BTreeMap<BitStr, u32>; 2],
    z_tokens: [BTreeMap<UPair, u32>; 2],
    x_row_counts: [Vec<u64>; 2],
    z_slice_row_counts: [BTreeMap<BitStr, Vec<u64>>; 2],
}

impl GridState {
    pub fn new(n: u8) -> Result<Self, BoardError> {
        if n == 0 || n > MAX_N {
            return Err(BoardError::BadSize(n));
        }
        Ok(GridState {
            n,
            x_tokens: [BTreeMap::new(), BTreeMap::new()],
            z_tokens: [BTreeMap::new(), BTreeMap::new()],
            x_row_counts: [alloc::vec![0; n as usize], alloc::vec![0; n as usize]],
            z_slice_row_counts: [BTreeMap::new(), BTreeMap::new()],
        })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    /// Number of columns of grid `Z`: `(2^n + 1 choose 2)`.
    pub fn z_column_count(&self) -> u64 {
        let m = 1u64 << self.n;
        m * (m + 1) / 2
    }

    /// Attempts a placement. Out-of-board rows and duplicate cells (same
    /// player, same cell) are no-ops and consume no budget; a placement that
    /// would exceed a row budget reports the first violated ledger and
    /// leaves the state untouched.
    pub fn place(&mut self, p: &TokenPlacement) -> PlaceOutcome {
        if p.row >= u32::from(self.n) {
            return PlaceOutcome::Noop;
        }
        let pi = p.player.index();
        let bit = 1u32 << p.row;
        match p.column {
            Column::X(u) => {
                debug_assert_eq!(u.len(), self.n);
                let mask = self.x_tokens[pi].get(&u).copied().unwrap_or(0);
                if mask & bit != 0 {
                    return PlaceOutcome::Noop;
                }
                let count = self.x_row_counts[pi][p.row as usize];
                if count + 1 > row_budget(p.row) {
                    return PlaceOutcome::Violation(BudgetViolation {
                        player: p.player,
                        ledger: Ledger::GridX,
                        row: p.row,
                    });
                }
                self.x_tokens[pi].insert(u, mask | bit);
                self.x_row_counts[pi][p.row as usize] += 1;
                PlaceOutcome::Accepted
            }
            Column::Z(pair) => {
                debug_assert_eq!(pair.len(), self.n);
                let mask = self.z_tokens[pi].get(&pair).copied().unwrap_or(0);
                if mask & bit != 0 {
                    return PlaceOutcome::Noop;
                }
                // A token on {u,v} counts against both slices; a singleton
                // counts once. Check every affected ledger before mutating.
                let slices: &[BitStr] = if pair.is_singleton() {
                    &[pair.lo]
                } else {
                    &[pair.lo, pair.hi]
                };
                for &u in slices.iter() {
                    let count = self.z_slice_row_counts[pi]
                        .get(&u)
                        .map_or(0, |rows| rows[p.row as usize]);
                    if count + 1 > row_budget(p.row) {
                        return PlaceOutcome::Violation(BudgetViolation {
                            player: p.player,
                            ledger: Ledger::Slice(u),
                            row: p.row,
                        });
                    }
                }
                self.z_tokens[pi].insert(pair, mask | bit);
                for &u in slices.iter() {
                    let rows = self.z_slice_row_counts[pi]
                        .entry(u)
                        .or_insert_with(|| alloc::vec![0; self.n as usize]);
                    rows[p.row as usize] += 1;
                }
                PlaceOutcome::Accepted
            }
        }
    }

    fn column_mask(&self, column: &Column) -> u32 {
        match column {
            Column::X(u) => {
                self.x_tokens[0].get(u).copied().unwrap_or(0)
                    | self.x_tokens[1].get(u).copied().unwrap_or(0)
            }
            Column::Z(p) => {
                self.z_tokens[0].get(p).copied().unwrap_or(0)
                    | self.z_tokens[1].get(p).copied().unwrap_or(0)
            }
        }
    }

    /// Minimal occupied row over both players, or `n` for an empty column.
    pub fn value(&self, column: &Column) -> u32 {
        let mask = self.column_mask(column);
        if mask == 0 {
            u32::from(self.n)
        } else {
            mask.trailing_zeros()
        }
    }

    pub fn x_value(&self, u: BitStr) -> u32 {
        self.value(&Column::X(u))
    }

    pub fn z_value(&self, pair: &UPair) -> u32 {
        self.value(&Column::Z(*pair))
    }

    /// `max{X_u, X_v}` for a pair.
    pub fn max_x(&self, pair: &UPair) -> u32 {
        self.x_value(pair.lo).max(self.x_value(pair.hi))
    }

    pub fn has_token(&self, player: Player, column: &Column, row: u32) -> bool {
        if row >= u32::from(self.n) {
            return false;
        }
        let pi = player.index();
        let mask = match column {
            Column::X(u) => self.x_tokens[pi].get(u).copied().unwrap_or(0),
            Column::Z(p) => self.z_tokens[pi].get(p).copied().unwrap_or(0),
        };
        mask & (1 << row) != 0
    }

    pub fn x_row_count(&self, player: Player, row: u32) -> u64 {
        self.x_row_counts[player.index()]
            .get(row as usize)
            .copied()
            .unwrap_or(0)
    }

    pub fn slice_row_count(&self, player: Player, slice: BitStr, row: u32) -> u64 {
        self.z_slice_row_counts[player.index()]
            .get(&slice)
            .and_then(|rows| rows.get(row as usize))
            .copied()
            .unwrap_or(0)
    }

    /// Strings whose `X` column holds at least one token.
    pub fn x_touched(&self) -> BTreeSet<BitStr> {
        self.x_tokens[0]
            .keys()
            .chain(self.x_tokens[1].keys())
            .copied()
            .collect()
    }

    /// Pairs whose `Z` column holds at least one token.
    pub fn z_touched(&self) -> BTreeSet<UPair> {
        self.z_tokens[0]
            .keys()
            .chain(self.z_tokens[1].keys())
            .copied()
            .collect()
    }

    /// Z-columns in the slice of `u` holding at least one token, with values.
    pub fn slice_tokens(&self, u: BitStr) -> BTreeMap<UPair, u32> {
        let mut out = BTreeMap::new();
        for map in &self.z_tokens {
            for pair in map.keys() {
                if pair.lo == u || pair.hi == u {
                    out.insert(*pair, self.z_value(pair));
                }
            }
        }
        out
    }

    /// Recomputes every ledger from the token sets and checks it against the
    /// incremental counters. Returns the first mismatch, if any.
    pub fn audit(&self) -> Result<(), AuditError> {
        for player in [Player::Alice, Player::Bob] {
            let pi = player.index();
            let mut x_rows = alloc::vec![0u64; self.n as usize];
            for mask in self.x_tokens[pi].values() {
                let mut m = *mask;
                while m != 0 {
                    let row = m.trailing_zeros();
                    x_rows[row as usize] += 1;
                    m &= m - 1;
                }
            }
            if x_rows != self.x_row_counts[pi] {
                return Err(AuditError {
                    player,
                    ledger: Ledger::GridX,
                });
            }
            let mut slices: BTreeMap<BitStr, Vec<u64>> = BTreeMap::new();
            for (pair, mask) in &self.z_tokens[pi] {
                let ends: &[BitStr] = if pair.is_singleton() {
                    &[pair.lo]
                } else {
                    &[pair.lo, pair.hi]
                };
                for &u in ends {
                    let rows = slices
                        .entry(u)
                        .or_insert_with(|| alloc::vec![0; self.n as usize]);
                    let mut m = *mask;
                    while m != 0 {
                        let row = m.trailing_zeros();
                        rows[row as usize] += 1;
                        m &= m - 1;
                    }
                }
            }
            if slices != self.z_slice_row_counts[pi] {
                let bad = slices
                    .iter()
                    .find(|(u, rows)| self.z_slice_row_counts[pi].get(u) != Some(rows))
                    .map(|(u, _)| *u)
                    .or_else(|| self.z_slice_row_counts[pi].keys().next().copied())
                    .unwrap_or(BitStr {
                        len: self.n,
                        value: 0,
                    });
                return Err(AuditError {
                    player,
                    ledger: Ledger::Slice(bad),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("ledger mismatch for {player} in {ledger}")]
pub struct AuditError {
    pub player: Player,
    pub ledger: Ledger,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(n: u8, v: u32) -> BitStr {
        BitStr::new(n, v).unwrap()
    }

    #[test]
    fn canonical_pair_orders_endpoints() {
        let p = UPair::new(bs(3, 5), bs(3, 3)).unwrap();
        assert_eq!(p.lo().value(), 3);
        assert_eq!(p.hi().value(), 5);
        let q = UPair::new(bs(3, 2), bs(3, 2)).unwrap();
        assert!(q.is_singleton());
        assert!(UPair::new(bs(3, 1), bs(4, 1)).is_err());
    }

    #[test]
    fn linear_index_matches_enumeration() {
        // {3,5} sits at position 18 in the canonical order.
        let p = UPair::new(bs(3, 3), bs(3, 5)).unwrap();
        assert_eq!(p.linear_index(), 18);
        for (i, pair) in UPair::all(3).enumerate() {
            assert_eq!(pair.linear_index(), i as u64);
        }
    }

    #[test]
    fn bitstr_display_and_parse() {
        let u = bs(3, 0b010);
        assert_eq!(alloc::format!("{u}"), "010");
        assert_eq!(BitStr::parse("010").unwrap(), u);
        assert!(BitStr::parse("01x").is_err());
        assert!(BitStr::parse("").is_err());
    }

    #[test]
    fn example_board_column_values() {
        // Alice on rows 2 of columns 000, 001, 011; Bob on row 0 of 001 and
        // row 2 of 000. Values: X_000 = 2, X_001 = 0, X_010 = 3, X_011 = 2.
        let mut g = GridState::new(3).unwrap();
        for (player, col, row) in [
            (Player::Alice, 0b000, 2),
            (Player::Alice, 0b001, 2),
            (Player::Bob, 0b001, 0),
            (Player::Bob, 0b000, 2),
            (Player::Alice, 0b011, 2),
        ] {
            let out = g.place(&TokenPlacement::x(player, bs(3, col), row));
            assert!(out.is_accepted());
        }
        assert_eq!(g.x_value(bs(3, 0b000)), 2);
        assert_eq!(g.x_value(bs(3, 0b001)), 0);
        assert_eq!(g.x_value(bs(3, 0b010)), 3);
        assert_eq!(g.x_value(bs(3, 0b011)), 2);
        assert_eq!(g.x_row_count(Player::Alice, 2), 3);
        assert_eq!(g.x_row_count(Player::Bob, 0), 1);
        g.audit().unwrap();
    }

    #[test]
    fn empty_column_value_is_n() {
        let g = GridState::new(7).unwrap();
        assert_eq!(g.x_value(bs(7, 5)), 7);
        assert_eq!(g.z_value(&UPair::singleton(bs(7, 5))), 7);
    }

    #[test]
    fn column_value_is_min_row() {
        let mut g = GridState::new(7).unwrap();
        let u = bs(7, 9);
        for row in [4, 1, 6] {
            g.place(&TokenPlacement::x(Player::Alice, u, row));
        }
        assert_eq!(g.x_value(u), 1);
    }

    #[test]
    fn row_zero_budget_is_one() {
        let mut g = GridState::new(3).unwrap();
        assert!(g
            .place(&TokenPlacement::x(Player::Alice, bs(3, 0), 0))
            .is_accepted());
        let out = g.place(&TokenPlacement::x(Player::Alice, bs(3, 1), 0));
        assert_eq!(
            out,
            PlaceOutcome::Violation(BudgetViolation {
                player: Player::Alice,
                ledger: Ledger::GridX,
                row: 0,
            })
        );
        // Bob still has his own row-0 budget.
        assert!(g
            .place(&TokenPlacement::x(Player::Bob, bs(3, 1), 0))
            .is_accepted());
    }

    #[test]
    fn off_board_row_is_noop() {
        let mut g = GridState::new(3).unwrap();
        let pair = UPair::new(bs(3, 1), bs(3, 2)).unwrap();
        assert_eq!(
            g.place(&TokenPlacement::z(Player::Bob, pair, 3)),
            PlaceOutcome::Noop
        );
        assert_eq!(g.z_value(&pair), 3);
        assert_eq!(g.slice_row_count(Player::Bob, bs(3, 1), 2), 0);
    }

    #[test]
    fn duplicate_cell_is_noop() {
        let mut g = GridState::new(4).unwrap();
        let u = bs(4, 3);
        assert!(g.place(&TokenPlacement::x(Player::Bob, u, 0)).is_accepted());
        assert_eq!(
            g.place(&TokenPlacement::x(Player::Bob, u, 0)),
            PlaceOutcome::Noop
        );
        assert_eq!(g.x_row_count(Player::Bob, 0), 1);
        // The opponent may still occupy the same cell.
        assert!(g
            .place(&TokenPlacement::x(Player::Alice, u, 0))
            .is_accepted());
    }

    #[test]
    fn z_token_raises_two_slices_once_for_singletons() {
        let mut g = GridState::new(4).unwrap();
        let u = bs(4, 2);
        let v = bs(4, 9);
        g.place(&TokenPlacement::z(
            Player::Alice,
            UPair::new(u, v).unwrap(),
            2,
        ));
        assert_eq!(g.slice_row_count(Player::Alice, u, 2), 1);
        assert_eq!(g.slice_row_count(Player::Alice, v, 2), 1);
        g.place(&TokenPlacement::z(Player::Alice, UPair::singleton(u), 2));
        assert_eq!(g.slice_row_count(Player::Alice, u, 2), 2);
        g.audit().unwrap();
    }

    #[test]
    fn slice_budget_violation_names_first_slice() {
        let mut g = GridState::new(4).unwrap();
        let u = bs(4, 0);
        let a = bs(4, 1);
        let b = bs(4, 2);
        assert!(g
            .place(&TokenPlacement::z(
                Player::Bob,
                UPair::new(u, a).unwrap(),
                0
            ))
            .is_accepted());
        let out = g.place(&TokenPlacement::z(
            Player::Bob,
            UPair::new(u, b).unwrap(),
            0,
        ));
        assert_eq!(
            out,
            PlaceOutcome::Violation(BudgetViolation {
                player: Player::Bob,
                ledger: Ledger::Slice(u),
                row: 0,
            })
        );
        g.audit().unwrap();
    }

    use proptest::prelude::*;

    fn placement_strategy(n: u8) -> impl Strategy<Value = TokenPlacement> {
        let max = (1u32 << n) - 1;
        (
            any::<bool>(),
            0..=max,
            0..=max,
            0..=u32::from(n) + 1,
            any::<bool>(),
        )
            .prop_map(move |(is_x, a, b, row, alice)| {
                let player = if alice { Player::Alice } else { Player::Bob };
                if is_x {
                    TokenPlacement::x(player, BitStr { len: n, value: a }, row)
                } else {
                    let pair = UPair::new(BitStr { len: n, value: a }, BitStr { len: n, value: b })
                        .unwrap();
                    TokenPlacement::z(player, pair, row)
                }
            })
    }

    proptest! {
        /// Accepted placements keep the incremental ledgers equal to a full
        /// recount, keep at most 2^i - 1 tokens below any row i, and never
        /// raise a column value.
        #[test]
        fn ledgers_audit_under_random_play(
            placements in proptest::collection::vec(placement_strategy(4), 0..80)
        ) {
            let n = 4u8;
            let mut g = GridState::new(n).unwrap();
            let mut watched: Vec<(Column, u32)> = Vec::new();
            for p in &placements {
                let before = g.value(&p.column);
                g.place(p);
                prop_assert!(g.value(&p.column) <= before);
                watched.push((p.column, g.value(&p.column)));
            }
            g.audit().unwrap();
            for (col, value_then) in &watched {
                prop_assert!(g.value(col) <= *value_then);
            }
            for player in [Player::Alice, Player::Bob] {
                for i in 0..=u32::from(n) {
                    let below: u64 = (0..i).map(|r| g.x_row_count(player, r)).sum();
                    prop_assert!(below < row_budget(i));
                    for u in BitStr::all(n) {
                        let below: u64 =
                            (0..i).map(|r| g.slice_row_count(player, u, r)).sum();
                        prop_assert!(below < row_budget(i));
                    }
                }
            }
        }
    }
}
