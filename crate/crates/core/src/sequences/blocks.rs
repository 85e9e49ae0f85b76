//! Block sequences built from a super-exponential schedule `n_1 < n_2 < ...`.
//!
//! `A`: block `k` holds `n_k` equal terms `ln n_k / n_k`.
//! `B`: odd blocks follow `c/n`, even blocks are constant as in `A`.
//!
//! Block sizes quickly leave the range of `u64`, so schedule quantities are
//! carried as [`Tower`] numbers. Individual lengths are evaluable only for
//! indices that fit in `u64`.

use serde::{Deserialize, Serialize};

use crate::error::{construction, domain, Result};
use crate::summation::CompensatedSum;
use crate::tower::{ln_ratio, Tower};

use super::MAX_LENGTH;

pub const MAX_BLOCKS: usize = 12;

/// Largest integer below which `f64` holds every integer exactly.
const EXACT_LIMIT: f64 = 9_007_199_254_740_992.0;

/// Extra Shepp mass a harmonic block must add beyond the next block index.
const SHEPP_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockKind {
    /// `n_k` terms equal to `ln n_k / n_k`.
    Constant { ln_n: Tower },
    /// Terms `c / n` at their global index.
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum BlockVariant {
    A,
    B { c: f64 },
}

/// One block of the schedule, covering indices `start < n <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    /// Number of terms.
    pub len: Tower,
    pub start: Tower,
    pub end: Tower,
    /// `S_end = l_1 + ... + l_end`; an upper bound for harmonic blocks
    /// past the exactly summed first one.
    pub sum_end: Tower,
    /// `sum l_n^2` through `end`, with the same convention.
    pub sq_sum_end: f64,
    /// Lower bound on the Shepp partial at `a = 1/c` through `end` (B only).
    pub shepp_lower_end: Option<f64>,
    /// Lower bound on `n l_n / S_n` at `n = end` (constant blocks only).
    pub s2_end: Option<f64>,
    /// First term exceeded the previous block's last term and was clamped.
    pub clamped: bool,
}

impl Block {
    fn end_exact(&self) -> Option<u64> {
        exact(self.end)
    }

    fn start_exact(&self) -> Option<u64> {
        exact(self.start)
    }
}

fn exact(t: Tower) -> Option<u64> {
    (t.level == 0 && t.v < EXACT_LIMIT).then_some(t.v as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSchedule {
    pub variant: BlockVariant,
    pub blocks: Vec<Block>,
}

/// `ln(n)` and `n` for the smallest integer `n >= max(lower^2, e^x)`,
/// in exact integers while they fit.
fn grow(prev_len: Tower, x: Tower) -> (Tower, Tower) {
    if let (Some(p), true) = (exact(prev_len), x.level == 0 && x.v < 36.0) {
        let sq = (p as f64) * (p as f64);
        let target = x.v.exp().ceil();
        let n = sq.max(target);
        if n < EXACT_LIMIT {
            return (Tower::new(n.ln()), Tower::new(n));
        }
    }
    let ln_n = prev_len.ln().mul(2.0).max(x);
    (ln_n, Tower::exp_of(ln_n))
}

/// `x - ln x` for `x >= 1`, where the correction is negligible once huge.
fn minus_own_ln(x: Tower) -> Tower {
    if x.level == 0 {
        Tower::new(x.v - x.v.ln())
    } else {
        x
    }
}

/// s2 growth target `(10 * 2^(k-1) - 1) * S_prev` for block `k`.
fn s2_target(k: usize, s_prev: Tower) -> Tower {
    s_prev.mul(10.0 * 2f64.powi(k as i32 - 1) - 1.0)
}

/// Lower bound on `n l_n / S_n` at the end of a constant block.
fn s2_at_end(start: Tower, len: Tower, ln_n: Tower, s_prev: Tower) -> f64 {
    let head = if start.v == 0.0 && start.level == 0 {
        1.0
    } else {
        1.0 + ln_ratio(start, len).exp()
    };
    let q = if s_prev.v == 0.0 && s_prev.level == 0 {
        0.0
    } else {
        ln_ratio(s_prev, ln_n).exp()
    };
    head / (1.0 + q)
}

fn ln_sq_over_n(ln_n: Tower) -> f64 {
    let l = ln_n.to_f64();
    (2.0 * l.ln() - l).exp()
}

fn check_k(k_max: usize) -> Result<()> {
    if k_max == 0 || k_max > MAX_BLOCKS {
        return Err(domain(format!("k_max must be in 1..={MAX_BLOCKS}, got {k_max}")));
    }
    Ok(())
}

fn constant_block(k: usize, start: Tower, prev_len: Tower, s_prev: Tower, sq_prev: f64) -> Block {
    let (ln_n, len) = if k == 1 {
        (Tower::new(3f64.ln()), Tower::new(3.0))
    } else {
        grow(prev_len, s2_target(k, s_prev))
    };
    let end = start.add(len);
    Block {
        kind: BlockKind::Constant { ln_n },
        len,
        start,
        end,
        sum_end: s_prev.add(ln_n),
        sq_sum_end: sq_prev + ln_sq_over_n(ln_n),
        shepp_lower_end: None,
        s2_end: Some(s2_at_end(start, len, ln_n, s_prev)),
        clamped: false,
    }
}

/// Schedule `A`: `n_1 = 3`, then `n_k >= n_{k-1}^2` grown until the block
/// boundary ratio `n l_n / S_n` is at least `1 - 0.1 * 2^-(k-1)`.
pub fn block_sequence_a(k_max: usize) -> Result<BlockSchedule> {
    check_k(k_max)?;
    let mut blocks: Vec<Block> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let (start, prev_len, s_prev, sq_prev) = match blocks.last() {
            Some(b) => (b.end, b.len, b.sum_end, b.sq_sum_end),
            None => (Tower::ZERO, Tower::ZERO, Tower::ZERO, 0.0),
        };
        blocks.push(constant_block(k, start, prev_len, s_prev, sq_prev));
    }
    Ok(BlockSchedule {
        variant: BlockVariant::A,
        blocks,
    })
}

/// `a S_N - ln(N + 1)`, or a lower bound on it; the Shepp terms of a
/// following `c/n` block are at least `exp(excess) / n` when `a c = 1`.
#[derive(Debug, Clone, Copy)]
enum Excess {
    Finite(f64),
    /// `-t` with `t` too large for `f64`.
    NegHuge(Tower),
}

impl Excess {
    fn exp(self) -> f64 {
        match self {
            Excess::Finite(x) => x.exp(),
            Excess::NegHuge(_) => 0.0,
        }
    }
}

/// Schedule `B` with constant `c > 1` and intensity `a = 1/c`.
///
/// Block 1 is `min(c/n, 0.99)` summed exactly; each harmonic block `k` is
/// extended until the lower bound on the Shepp partial at `a = 1/c`
/// passes `k + 1` (so every block end `k` has a partial above `k`).
pub fn block_sequence_b(k_max: usize, c: f64) -> Result<BlockSchedule> {
    check_k(k_max)?;
    if !(c.is_finite() && c > 1.0) {
        return Err(construction(format!("block sequence B needs c > 1, got {c}")));
    }
    let a = 1.0 / c;
    let mut blocks: Vec<Block> = Vec::with_capacity(k_max);
    let mut shepp: f64;
    let mut excess: Excess;

    // block 1: exact prefix of min(c/n, 0.99)
    {
        let target = 1.0 + 1.0 + SHEPP_MARGIN;
        let mut s = CompensatedSum::new();
        let mut sq = CompensatedSum::new();
        let mut p = CompensatedSum::new();
        let mut n: u64 = 0;
        let mut limit: u64 = 4;
        loop {
            while n < limit {
                n += 1;
                let l = (c / n as f64).min(MAX_LENGTH);
                s.add(l);
                sq.add(l * l);
                p.add((a * s.value()).exp() / (n as f64 * n as f64));
            }
            if p.value() > target {
                break;
            }
            limit *= 2;
        }
        shepp = p.value();
        excess = Excess::Finite(a * s.value() - ((n + 1) as f64).ln());
        blocks.push(Block {
            kind: BlockKind::Harmonic,
            len: Tower::new(n as f64),
            start: Tower::ZERO,
            end: Tower::new(n as f64),
            sum_end: Tower::new(s.value()),
            sq_sum_end: sq.value(),
            shepp_lower_end: Some(shepp),
            s2_end: None,
            clamped: false,
        });
    }

    for k in 2..=k_max {
        let prev = *blocks.last().expect("block 1 exists");
        let start = prev.end;
        let ln_start1 = start.add(Tower::new(1.0)).ln();
        if k % 2 == 0 {
            let (mut ln_n, mut len) = grow(prev.len, s2_target(k, prev.sum_end).max(Tower::new(c)));
            // entering: ln n / n <= c / N_{k-1}
            let rhs = {
                let l = start.ln();
                if l.level == 0 {
                    Tower::new(l.v - c.ln())
                } else {
                    l
                }
            };
            let mut guard = 0;
            while minus_own_ln(ln_n) < rhs && guard < 64 {
                ln_n = ln_n.mul(2.0);
                len = Tower::exp_of(ln_n);
                guard += 1;
            }
            let end = start.add(len);
            // constant block adds exp(aS0) (1/(N0+1) - 1/(N1+1)) >= exp(excess) / 2
            shepp += 0.5 * excess.exp();
            // excess drops by at least (1 - a) ln n + ln 2
            excess = match (excess, ln_n.level) {
                (Excess::Finite(e), 0) => Excess::Finite(e - (1.0 - a) * ln_n.v - 2f64.ln()),
                _ => Excess::NegHuge(ln_n.mul(1.0 - a)),
            };
            blocks.push(Block {
                kind: BlockKind::Constant { ln_n },
                len,
                start,
                end,
                sum_end: prev.sum_end.add(ln_n),
                sq_sum_end: prev.sq_sum_end + ln_sq_over_n(ln_n),
                shepp_lower_end: Some(shepp),
                s2_end: Some(s2_at_end(start, len, ln_n, prev.sum_end)),
                clamped: false,
            });
        } else {
            let need = (k as f64 + 1.0 + SHEPP_MARGIN - shepp).max(f64::MIN_POSITIVE);
            // ln((N1+1)/(N0+1)) >= need * exp(-excess)
            let ln_r = match excess {
                Excess::Finite(e) => Tower::new(need.ln() - e),
                Excess::NegHuge(t) => t,
            };
            let r = Tower::exp_of(ln_r);
            // n_k >= (previous block length)^2
            let sq_rule = {
                let ln_sq = prev.len.ln().mul(2.0);
                let d = ln_ratio(Tower::exp_of(ln_sq), start.add(Tower::new(1.0)));
                if d.is_finite() {
                    Tower::new(d.exp().ln_1p())
                } else if d > 0.0 {
                    ln_sq
                } else {
                    Tower::ZERO
                }
            };
            let gap = r.max(sq_rule);
            let ln_end1 = ln_start1.add(gap);
            let end1 = Tower::exp_of(ln_end1);
            let end = end1.sub(Tower::new(1.0));
            let len = end.sub(start);
            shepp += match (excess, gap.level) {
                (Excess::Finite(e), 0) => (e + gap.v.ln()).exp(),
                _ => need,
            };
            let clamped = match prev.kind {
                // first term c/(N0+1) against ln n / n of the block before
                BlockKind::Constant { ln_n } => {
                    let lhs = Tower::new(c.ln()).add(ln_n);
                    let rhs = ln_start1.add(ln_n.ln().max(Tower::ZERO));
                    lhs > rhs
                }
                BlockKind::Harmonic => false,
            };
            let s0 = prev.sum_end;
            let n0 = start.to_f64();
            blocks.push(Block {
                kind: BlockKind::Harmonic,
                len,
                start,
                end,
                sum_end: s0.add(gap.mul(c)).add(Tower::new(c / n0)),
                sq_sum_end: prev.sq_sum_end + c * c / n0,
                shepp_lower_end: Some(shepp),
                s2_end: None,
                clamped,
            });
        }
    }
    Ok(BlockSchedule {
        variant: BlockVariant::B { c },
        blocks,
    })
}

impl BlockSchedule {
    pub fn c(&self) -> Option<f64> {
        match self.variant {
            BlockVariant::A => None,
            BlockVariant::B { c } => Some(c),
        }
    }

    /// Number of blocks whose first term had to be clamped to keep the
    /// sequence nonincreasing.
    pub fn clamp_count(&self) -> usize {
        self.blocks.iter().filter(|b| b.clamped).count()
    }

    /// Last index whose length is defined and fits in `u64`.
    pub fn last_index(&self) -> Option<u64> {
        self.blocks.last().and_then(|b| b.end_exact())
    }

    /// `l_n` for `n >= 1`.
    pub fn length(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(domain("lengths are indexed from 1"));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            let inside = match b.end_exact() {
                Some(e) => n <= e,
                None => true,
            };
            if !inside {
                continue;
            }
            let raw = match b.kind {
                BlockKind::Harmonic => {
                    let c = self.c().expect("harmonic blocks only in B");
                    (c / n as f64).min(MAX_LENGTH)
                }
                BlockKind::Constant { ln_n } => {
                    let l = ln_n.to_f64();
                    (l.ln() - l).exp()
                }
            };
            let value = if i > 0 && b.clamped {
                raw.min(self.length(b.start_exact().expect("clamp only on evaluable joins"))?)
            } else {
                raw
            };
            if value < f64::MIN_POSITIVE {
                return Err(domain(format!(
                    "l_{n} lies in block {} and underflows f64",
                    i + 1
                )));
            }
            return Ok(value);
        }
        Err(domain(format!(
            "index {n} lies beyond the {} constructed blocks",
            self.blocks.len()
        )))
    }
}
