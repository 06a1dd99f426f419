//! Engine for two adversarial token-placement games, `G` and `H`, played on
//! sparse exponential grids.
//!
//! Both games are full-information and turn-based. Alice places tokens on two
//! boards (`X`, indexed by n-bit strings, and `Z`, indexed by unordered pairs
//! of n-bit strings); Bob places tokens and declares a rational value
//! `f(uv, t)` for every pair each round. Per-row token budgets (`2^i` tokens
//! in row `i`, per player, per board or slice) mirror program-counting
//! constraints, and Bob's declarations are checked each round against the
//! column-value ratio `Z_uv / max{X_u, X_v}`:
//!
//! * game `G(n, c, k)` demands the sandwich
//!   `(Z-1)/(max+c) < f < (Z+c)/max` and at most `k` oscillations per pair,
//! * game `H(n, eps, a)` demands `|f - Z/max| <= eps` and total update at
//!   most `a`, both only for pairs whose `max{X_u, X_v}` has reached a
//!   configurable threshold.
//!
//! The crate provides the boards and budget ledgers ([`board`]), exact
//! rational sequence analytics — oscillation counting and total variation —
//! ([`series`]), the referee with deterministic, replayable transcripts
//! ([`referee`]), Alice's recursive block strategies ([`alice`]) and a
//! family of Bob opponents including the approximation-oracle reduction
//! ([`bob`]).
//!
//! Everything is exact: values are arbitrary-precision rationals, verdicts
//! never depend on floating point, and a match is reproducible from its
//! configuration and seed.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod alice;
pub mod board;
pub mod bob;
pub mod rat;
pub mod referee;
pub mod series;

pub use board::{BitStr, Column, GridState, PlaceOutcome, Player, TokenPlacement, UPair};
pub use rat::Rat;
pub use referee::{
    AliceMove, AliceStrategy, BobMove, BobStrategy, GameConfig, GameKind, GameState, Threshold,
    Transcript, Verdict, VerdictReason,
};
pub use series::ValueSeries;
