//! Named densities.

use crate::error::{construction, Result};

use super::{Piece, PiecewisePolyDensity};

/// Largest supported fat-Cantor depth; piece counts double per level.
pub const MAX_FAT_CANTOR_DEPTH: u32 = 20;

fn constant(from: f64, to: f64, c: f64) -> Piece {
    Piece {
        from,
        to,
        c0: c,
        c1: 0.0,
    }
}

pub fn uniform() -> PiecewisePolyDensity {
    PiecewisePolyDensity::build(vec![constant(0.0, 1.0, 1.0)], Some("uniform".into()))
        .expect("uniform density")
}

/// `|x| + 3/4` on `[-1/2, 1/2)`.
pub fn tent() -> PiecewisePolyDensity {
    let pieces = vec![
        Piece {
            from: 0.0,
            to: 0.5,
            c0: 0.75,
            c1: 1.0,
        },
        Piece {
            from: 0.5,
            to: 1.0,
            c0: 1.25,
            c1: -1.0,
        },
    ];
    PiecewisePolyDensity::build(pieces, Some("tent".into())).expect("tent density")
}

/// `lo` on `[0, split)`, `hi` on `[split, 1)`.
pub fn step(lo: f64, hi: f64, split: f64) -> Result<PiecewisePolyDensity> {
    if !(split > 0.0 && split < 1.0) {
        return Err(construction(format!("step split {split} outside (0, 1)")));
    }
    PiecewisePolyDensity::build(
        vec![constant(0.0, split, lo), constant(split, 1.0, hi)],
        Some(format!("step:{lo}:{hi}:{split}")),
    )
}

/// Closed intervals of the fat Cantor set after `steps` removals; step `k`
/// removes a central open gap of length `4^-(k+1)` from every interval.
fn fat_cantor_intervals(steps: u32) -> Vec<(f64, f64)> {
    let mut ivs = vec![(0.0, 1.0)];
    let mut gap = 0.25;
    for _ in 0..steps {
        let mut next = Vec::with_capacity(2 * ivs.len());
        for (a, b) in ivs {
            let mid = 0.5 * (a + b);
            next.push((a, mid - 0.5 * gap));
            next.push((mid + 0.5 * gap, b));
        }
        ivs = next;
        gap *= 0.25;
    }
    ivs
}

/// Finite-depth staircase built from the fat Cantor set `A`.
///
/// On the dyadic block `[2^-(n+1), 2^-n)`, `n < depth`, the density is
/// `1_{A^c}(2^(n+1) x - 1) + 1/(n+1)` with `A` cut after `depth - n` steps;
/// on `[0, 2^-depth)` it is `1/(depth+1)`. The whole is rescaled to unit mass.
pub fn fat_cantor_density(depth: u32) -> Result<PiecewisePolyDensity> {
    if depth == 0 || depth > MAX_FAT_CANTOR_DEPTH {
        return Err(construction(format!(
            "fat Cantor depth {depth} outside 1..={MAX_FAT_CANTOR_DEPTH}"
        )));
    }
    let tail_end = (-(depth as f64)).exp2();
    let mut raw = vec![constant(0.0, tail_end, 1.0 / (depth as f64 + 1.0))];
    for n in (0..depth).rev() {
        let base = 1.0 / (n as f64 + 1.0);
        let scale = (-(n as f64 + 1.0)).exp2();
        let x = |t: f64| (t + 1.0) * scale;
        let mut cursor = 0.0;
        for (a, b) in fat_cantor_intervals(depth - n) {
            if a > cursor {
                raw.push(constant(x(cursor), x(a), 1.0 + base));
            }
            raw.push(constant(x(a), x(b), base));
            cursor = b;
        }
    }
    PiecewisePolyDensity::normalized(raw, Some(format!("fatcantor:{depth}")))
}
