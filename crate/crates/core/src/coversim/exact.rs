//! `E[|target \ (I_1 u ... u I_N)|] = int_target prod_{n <= N} (1 - mu(B(t, r_n))) dt`.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::circle::{circle_dist, wrap};
use crate::density::PiecewisePolyDensity;
use crate::error::{Error, Result};
use crate::sequences::LengthSequence;
use crate::summation::CompensatedSum;

use super::quadrature::{apply, rules};

pub const DEFAULT_RTOL: f64 = 1e-9;
pub const DEFAULT_MAX_PANELS: usize = 50_000;

/// Kinks `b +- r_n` placed as panel edges for the first few `n`.
const ALIGNED_KINKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactEstimate {
    pub n: u64,
    pub value: f64,
    /// Sum of `|Q16 - Q8|` over the final panels.
    pub error: f64,
    pub panels: usize,
}

/// `t -> ln prod_{n <= N} (1 - mu(B(t, r_n)))` with shared precomputation.
pub struct LogUncoveredProbability<'a> {
    f: &'a PiecewisePolyDensity,
    /// `r_n = l_n / 2`, decreasing.
    radii: Vec<f64>,
    /// Points where `f` is not affine across.
    breaks: Vec<f64>,
    /// `(v, [sum_{n < j <= N} ln(1 - v l_j)]_{n = 0..=N})` for constant pieces.
    tables: Vec<(f64, Vec<f64>)>,
}

fn true_breakpoints(f: &PiecewisePolyDensity) -> Vec<f64> {
    let ps = f.pieces();
    let n = ps.len();
    let mut out = Vec::new();
    for i in 0..n {
        let q = &ps[(i + n - 1) % n];
        let p = &ps[i];
        let q_end = q.c0 + q.c1 * (q.to - q.from);
        let scale = q_end.abs().max(p.c0.abs()).max(1.0);
        if (q_end - p.c0).abs() > 1e-14 * scale || q.c1 != p.c1 {
            out.push(p.from);
        }
    }
    out
}

impl<'a> LogUncoveredProbability<'a> {
    pub fn new(f: &'a PiecewisePolyDensity, lengths: &LengthSequence, n: u64) -> Result<Self> {
        let ls = lengths.prefix(n as usize)?;
        let radii: Vec<f64> = ls.iter().map(|l| 0.5 * l).collect();
        let mut values: Vec<f64> = f.pieces().iter().filter(|p| p.c1 == 0.0).map(|p| p.c0).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let tables = values
            .into_iter()
            .map(|v| {
                let mut acc = CompensatedSum::new();
                let mut t = vec![0.0; ls.len() + 1];
                for (j, &l) in ls.iter().enumerate().rev() {
                    acc.add((-v * l).ln_1p());
                    t[j] = acc.value();
                }
                (v, t)
            })
            .collect();
        Ok(Self {
            f,
            radii,
            breaks: true_breakpoints(f),
            tables,
        })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    fn dist_to_break(&self, t: f64) -> f64 {
        let n = self.breaks.len();
        if n == 0 {
            return f64::INFINITY;
        }
        // nearest candidates: the neighbors of t, and the two ends across 0
        let i = self.breaks.partition_point(|&b| b < t);
        [i.saturating_sub(1), i.min(n - 1), 0, n - 1]
            .iter()
            .map(|&j| circle_dist(self.breaks[j], t))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = wrap(t);
        let d = self.dist_to_break(t);
        // balls with r_n <= d stay inside one affine stretch: mass f(t) l_n
        let n0 = self.radii.partition_point(|&r| r > d);
        let mut acc = CompensatedSum::new();
        for &r in &self.radii[..n0] {
            acc.add((-self.f.mu_ball_unchecked(t, r)).ln_1p());
        }
        if n0 < self.radii.len() {
            let piece = self.f.piece_at(t);
            let v = self.f.value(t);
            match self.tables.iter().find(|(w, _)| *w == v).filter(|_| piece.c1 == 0.0) {
                Some((_, tab)) => acc.add(tab[n0]),
                None => {
                    for &r in &self.radii[n0..] {
                        acc.add((-v * 2.0 * r).ln_1p());
                    }
                }
            }
        }
        acc.value()
    }
}

/// `prod_{n <= N} (1 - mu(B(x, r_n)))`, the probability that `x` is
/// uncovered after `N` steps.
pub fn point_uncovered_probability(
    f: &PiecewisePolyDensity,
    lengths: &LengthSequence,
    n: u64,
    x: f64,
) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for l in lengths.prefix(n as usize)? {
        acc.add((-f.mu_ball_unchecked(wrap(x), 0.5 * l)).ln_1p());
    }
    Ok(acc.value().exp())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn panel(h: &LogUncoveredProbability<'_>, a: f64, b: f64) -> Panel {
    let r = rules();
    let mut g = |t: f64| h.eval(t).exp();
    let lo = apply(&r.low, a, b, &mut g);
    let hi = apply(&r.high, a, b, &mut g);
    Panel {
        a,
        b,
        value: hi,
        error: (hi - lo).abs(),
    }
}

/// Initial panel edges inside `[p, q]`: breakpoints, the first kinks
/// `b +- r_n`, and a geometric grading toward every breakpoint.
fn initial_edges(h: &LogUncoveredProbability<'_>, p: f64, q: f64) -> Vec<f64> {
    let mut edges = vec![p, q];
    let r_min = h.radii().last().copied().unwrap_or(0.5);
    for &b in h.breaks() {
        let mut offsets: Vec<f64> = h.radii().iter().take(ALIGNED_KINKS).copied().collect();
        let mut d = 0.5;
        while d > 0.25 * r_min {
            offsets.push(d);
            d *= 0.5;
        }
        offsets.push(0.0);
        for off in offsets {
            for base in [b - 1.0, b, b + 1.0] {
                for x in [base - off, base + off] {
                    if x > p && x < q {
                        edges.push(x);
                    }
                }
            }
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
}

/// Expected uncovered measure of `target` after `N` steps, by adaptive
/// Gauss-Legendre quadrature to relative tolerance `rtol`.
pub fn expected_uncovered_exact(
    f: &PiecewisePolyDensity,
    lengths: &LengthSequence,
    n: u64,
    target: &ArcSet,
    rtol: f64,
    max_panels: usize,
) -> Result<ExactEstimate> {
    if target.measure() == 0.0 {
        return Ok(ExactEstimate {
            n,
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let h = LogUncoveredProbability::new(f, lengths, n)?;
    let mut heap = BinaryHeap::new();
    for [p, q] in target.linear() {
        if q <= p {
            continue;
        }
        for w in initial_edges(&h, p, q).windows(2) {
            heap.push(panel(&h, w[0], w[1]));
        }
    }
    loop {
        let (value, error) = heap.iter().fold((CompensatedSum::new(), 0.0), |(mut v, e), p| {
            v.add(p.value);
            (v, e + p.error)
        });
        let value = value.value();
        if error <= rtol * value.abs() || value == 0.0 {
            return Ok(ExactEstimate {
                n,
                value,
                error,
                panels: heap.len(),
            });
        }
        if heap.len() >= max_panels {
            return Err(Error::Resolution(format!(
                "{} panels reach error {error:e} against value {value:e} (rtol {rtol:e})",
                heap.len()
            )));
        }
        // split the worst eighth of the panels before re-summing
        let k = (heap.len() / 8).max(1);
        for _ in 0..k {
            let Some(worst) = heap.pop() else { break };
            let m = 0.5 * (worst.a + worst.b);
            heap.push(panel(&h, worst.a, m));
            heap.push(panel(&h, m, worst.b));
        }
    }
}

/// `expected_uncovered_exact` at each `N` with the default tolerances.
pub fn expected_uncovered_curve(
    f: &PiecewisePolyDensity,
    lengths: &LengthSequence,
    ns: &[u64],
    target: &ArcSet,
) -> Result<Vec<ExactEstimate>> {
    ns.iter()
        .map(|&n| expected_uncovered_exact(f, lengths, n, target, DEFAULT_RTOL, DEFAULT_MAX_PANELS))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Arc;
    use crate::density::{step, tent, uniform};

    #[test]
    fn uniform_is_the_product() {
        let seq = LengthSequence::harmonic(0.5).unwrap();
        let e = expected_uncovered_exact(&uniform(), &seq, 4, &ArcSet::full(), 1e-12, 100).unwrap();
        assert!((e.value - 0.2734375).abs() < 1e-15);
        let e = expected_uncovered_exact(&uniform(), &seq, 1000, &ArcSet::full(), 1e-12, 100).unwrap();
        let p: f64 = (1..=1000).map(|n| 1.0 - 0.5 / n as f64).product();
        assert!((e.value - p).abs() < 1e-13 * p);
    }

    #[test]
    fn log_probability_matches_direct_product() {
        let s = step(0.5, 1.5, 0.5).unwrap();
        let seq = LengthSequence::harmonic(1.6).unwrap();
        let h = LogUncoveredProbability::new(&s, &seq, 3000).unwrap();
        for x in [0.0, 0.001, 0.25, 0.4999, 0.7, 0.9999] {
            let direct = point_uncovered_probability(&s, &seq, 3000, x).unwrap().ln();
            assert!((h.eval(x) - direct).abs() < 1e-12, "x = {x}: {} vs {direct}", h.eval(x));
        }
        let t = tent();
        let h = LogUncoveredProbability::new(&t, &seq, 500).unwrap();
        for x in [0.01, 0.3, 0.5] {
            let direct = point_uncovered_probability(&t, &seq, 500, x).unwrap().ln();
            assert!((h.eval(x) - direct).abs() < 1e-12, "x = {x}: {} vs {direct}", h.eval(x));
        }
    }

    #[test]
    fn step_matches_fine_midpoint_rule() {
        let s = step(0.5, 1.5, 0.5).unwrap();
        let seq = LengthSequence::harmonic(1.0).unwrap();
        let half = ArcSet::from_arc(Arc::new(0.0, 0.5).unwrap());
        let e = expected_uncovered_exact(&s, &seq, 200, &half, 1e-10, 10_000).unwrap();
        let h = LogUncoveredProbability::new(&s, &seq, 200).unwrap();
        let m = 200_000;
        let mid: f64 = (0..m).map(|i| h.eval(0.5 * (i as f64 + 0.5) / m as f64).exp()).sum::<f64>() * 0.5
            / m as f64;
        assert!((e.value - mid).abs() < 1e-7 * mid, "{} vs {mid}", e.value);
    }

    #[test]
    fn refuses_when_budget_is_too_small() {
        let s = step(0.5, 1.5, 0.5).unwrap();
        let seq = LengthSequence::harmonic(1.0).unwrap();
        let half = ArcSet::from_arc(Arc::new(0.0, 0.5).unwrap());
        let r = expected_uncovered_exact(&s, &seq, 10_000, &half, 1e-15, 10);
        assert!(matches!(r, Err(Error::Resolution(_))));
    }
}
