//! Sequence analytics for declared `f` values: oscillation counting
//! (minimal monotone segmentation), total variation, and the bounded total
//! variation of ratios of monotone integer sequences.
//!
//! A sequence has `k` oscillations when `k` is the least number of monotone
//! runs covering it, consecutive runs sharing their turning point; a
//! constant (or empty) sequence has 0. Equivalently: the first strict move
//! starts the count at 1 and every strict direction reversal adds 1. The
//! greedy count is validated against [`min_oscillations_bruteforce`].

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::Zero;

use crate::rat::{rat_abs, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Flat,
    Up,
    Down,
}

/// Append-only series of exact rationals with incremental oscillation and
/// total-variation state. Values are stored run-length encoded; a pair whose
/// value never changes costs one entry no matter how many rounds pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSeries {
    runs: Vec<(Rat, u64)>,
    len: u64,
    osc: u64,
    direction: Direction,
    tv: Rat,
}

impl Default for ValueSeries {
    fn default() -> Self {
        Self::new()
    }
}

impl ValueSeries {
    pub fn new() -> Self {
        ValueSeries {
            runs: Vec::new(),
            len: 0,
            osc: 0,
            direction: Direction::Flat,
            tv: Rat::zero(),
        }
    }

    /// Series that already holds `count` copies of `value`.
    pub fn constant(value: Rat, count: u64) -> Self {
        let mut s = ValueSeries::new();
        if count > 0 {
            s.runs.push((value, count));
            s.len = count;
        }
        s
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn last(&self) -> Option<&Rat> {
        self.runs.last().map(|(v, _)| v)
    }

    /// Oscillation count of the whole series so far.
    pub fn oscillations(&self) -> u64 {
        self.osc
    }

    /// Exact `sum |f(t+1) - f(t)|` over the whole series so far.
    pub fn total_update(&self) -> &Rat {
        &self.tv
    }

    pub fn append(&mut self, value: Rat) {
        match self.runs.last_mut() {
            None => {
                self.runs.push((value, 1));
            }
            Some((last, count)) => match value.cmp(last) {
                Ordering::Equal => *count += 1,
                Ordering::Greater => {
                    self.tv += &value - &*last;
                    if self.direction != Direction::Up {
                        self.osc += 1;
                        self.direction = Direction::Up;
                    }
                    self.runs.push((value, 1));
                }
                Ordering::Less => {
                    self.tv += &*last - &value;
                    if self.direction != Direction::Down {
                        self.osc += 1;
                        self.direction = Direction::Down;
                    }
                    self.runs.push((value, 1));
                }
            },
        }
        self.len += 1;
    }

    /// Value at 1-based position `t`.
    pub fn value_at(&self, t: u64) -> Option<&Rat> {
        if t == 0 || t > self.len {
            return None;
        }
        let mut covered = 0;
        for (v, count) in &self.runs {
            covered += count;
            if t <= covered {
                return Some(v);
            }
        }
        None
    }

    /// Oscillation count of the length-`t` prefix.
    pub fn oscillations_at(&self, t: u64) -> u64 {
        let mut osc = 0;
        let mut dir = Direction::Flat;
        let mut covered = 0;
        let mut prev: Option<&Rat> = None;
        for (v, count) in &self.runs {
            if covered >= t {
                break;
            }
            if let Some(p) = prev {
                let step = match v.cmp(p) {
                    Ordering::Greater => Direction::Up,
                    Ordering::Less => Direction::Down,
                    Ordering::Equal => dir,
                };
                if step != dir {
                    osc += 1;
                    dir = step;
                }
            }
            prev = Some(v);
            covered += count;
        }
        osc
    }

    /// Expands the run-length encoding. Test and transcript helper.
    pub fn to_values(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        for (v, count) in &self.runs {
            for _ in 0..*count {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn runs(&self) -> &[(Rat, u64)] {
        &self.runs
    }
}

/// Greedy minimal-segmentation oscillation count.
pub fn min_oscillations(seq: &[Rat]) -> u64 {
    let mut osc = 0;
    let mut dir = Direction::Flat;
    for pair in seq.windows(2) {
        let step = match pair[1].cmp(&pair[0]) {
            Ordering::Greater => Direction::Up,
            Ordering::Less => Direction::Down,
            Ordering::Equal => dir,
        };
        if step != dir {
            osc += 1;
            dir = step;
        }
    }
    osc
}

/// Exact `sum |seq[i+1] - seq[i]|`.
pub fn total_variation(seq: &[Rat]) -> Rat {
    let mut tv = Rat::zero();
    for pair in seq.windows(2) {
        tv += rat_abs(&(&pair[1] - &pair[0]));
    }
    tv
}

/// Longest sequence the brute-force oracle accepts.
pub const BRUTEFORCE_MAX_LEN: usize = 16;

fn monotone(seq: &[Rat]) -> bool {
    seq.windows(2).all(|w| w[1] >= w[0]) || seq.windows(2).all(|w| w[1] <= w[0])
}

/// Exhaustive minimum over all segmentations into monotone runs that share
/// their boundary elements. Independent oracle for [`min_oscillations`];
/// rejects sequences longer than [`BRUTEFORCE_MAX_LEN`].
pub fn min_oscillations_bruteforce(seq: &[Rat]) -> Result<u64, SeqError> {
    if seq.len() > BRUTEFORCE_MAX_LEN {
        return Err(SeqError::TooLong(seq.len()));
    }
    if seq.len() <= 1 || seq.windows(2).all(|w| w[0] == w[1]) {
        return Ok(0);
    }
    // dp[i]: least number of runs covering seq[0..=i] with a boundary at i.
    let m = seq.len();
    let mut dp = alloc::vec![u64::MAX; m];
    dp[0] = 0;
    for i in 1..m {
        for j in 0..i {
            if dp[j] != u64::MAX && monotone(&seq[j..=i]) {
                dp[i] = dp[i].min(dp[j] + 1);
            }
        }
    }
    Ok(dp[m - 1])
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeqError {
    #[error("sequence of length {0} exceeds the brute-force guard")]
    TooLong(usize),
    #[error("ratio_tv precondition violated: {0}")]
    Precondition(&'static str),
}

fn ratio_tv_check(a: &[u64], b: &[u64], c: u64) -> Result<(), SeqError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(SeqError::Precondition("sequences empty or length mismatch"));
    }
    let m = a.len() as u64;
    for (&x, &y) in a.iter().zip(b.iter()) {
        if x < 1 || x > m || y < 1 || y > m {
            return Err(SeqError::Precondition("values outside [1, m]"));
        }
        if x > y + c {
            return Err(SeqError::Precondition("a_i > b_i + c"));
        }
    }
    if a.windows(2).any(|w| w[0] > w[1]) || b.windows(2).any(|w| w[0] > w[1]) {
        return Err(SeqError::Precondition("sequences not non-decreasing"));
    }
    Ok(())
}

/// Exact total variation of the ratio sequence `a_i / b_i` for non-decreasing
/// integer sequences with `1 <= a_i, b_i <= m` and `a_i <= b_i + c`.
///
/// For `c = 0` the result never exceeds `2 ln m`; that bound is asserted by
/// the lemma checkers, not here.
pub fn ratio_tv(a: &[u64], b: &[u64], c: u64) -> Result<Rat, SeqError> {
    ratio_tv_check(a, b, c)?;
    let mut tv = Rat::zero();
    for i in 0..a.len() - 1 {
        let cur = Rat::new(a[i].into(), b[i].into());
        let next = Rat::new(a[i + 1].into(), b[i + 1].into());
        tv += rat_abs(&(next - cur));
    }
    Ok(tv)
}

/// `f64` companion of [`ratio_tv`] for large-scale property runs, where
/// exact summation drowns in coprime denominators. Values are below `2^17`,
/// so each term is one correctly-rounded division; the accumulated relative
/// error stays below `m * 2^-50`, negligible against the Theta(1) gap to
/// the `2 ln m` bound.
pub fn ratio_tv_f64(a: &[u64], b: &[u64], c: u64) -> Result<f64, SeqError> {
    ratio_tv_check(a, b, c)?;
    let mut tv = 0.0f64;
    for i in 0..a.len() - 1 {
        let cur = a[i] as f64 / b[i] as f64;
        let next = a[i + 1] as f64 / b[i + 1] as f64;
        tv += (next - cur).abs();
    }
    Ok(tv)
}

/// Every subsequence has at most as many oscillations and at most the total
/// variation of the full sequence; used when relating Bob's declared series
/// to an oracle trace sampled at increasing times.
pub fn is_subsequence(sub: &[Rat], full: &[Rat]) -> bool {
    let mut it = full.iter();
    sub.iter().all(|v| it.any(|w| w == v))
}
