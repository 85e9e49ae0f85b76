//! Finite unions of closed arcs in canonical form.

use serde::{Deserialize, Serialize};

use crate::circle::{wrap, Arc};
use crate::summation::sum_compensated;

/// A finite disjoint union of closed arcs.
///
/// Canonical form: arcs sorted by start, pairwise separated by gaps of
/// positive length, an arc crossing 0 kept whole, and the full circle stored
/// as the single arc `(0, 1)`. Degenerate point arcs are allowed.
///
/// Arcs are held by their endpoints reduced mod 1, `[start, end]`; an arc
/// through 0 has `end < start`. Cutting and re-joining at 0 is then exact.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArcSet {
    spans: Vec<[f64; 2]>,
}

impl ArcSet {
    pub fn empty() -> Self {
        Self { spans: Vec::new() }
    }

    pub fn full() -> Self {
        Self {
            spans: vec![[0.0, 1.0]],
        }
    }

    pub fn from_arc(arc: Arc) -> Self {
        Self::from_arcs([arc])
    }

    pub fn from_points<I: IntoIterator<Item = f64>>(points: I) -> Self {
        Self::from_arcs(points.into_iter().map(Arc::point))
    }

    /// Parse `full`, `empty`, `arc:a:b` (counterclockwise, through 0 when
    /// `b < a`), `points:x1,x2,...` or a `+`-joined union of these.
    pub fn parse(spec: &str) -> crate::Result<Self> {
        let bad = |s: &str| crate::Error::Parse(format!("bad number `{s}` in set `{spec}`"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(s));
        let mut out = Self::empty();
        for term in spec.split('+') {
            let parts: Vec<&str> = term.trim().split(':').collect();
            let next = match parts.as_slice() {
                ["full"] => Self::full(),
                ["empty"] => Self::empty(),
                ["arc", a, b] => {
                    let (a, b) = (num(a)?, num(b)?);
                    Self::from_arc(Arc::new(a, if b >= a { b - a } else { b + 1.0 - a })?)
                }
                ["points", xs] => Self::from_points(xs.split(',').map(num).collect::<crate::Result<Vec<_>>>()?),
                _ => return Err(crate::Error::Parse(format!("unknown set `{term}`"))),
            };
            out = out.union(&next);
        }
        Ok(out)
    }

    /// Canonical union of arbitrary (possibly overlapping) arcs.
    pub fn from_arcs<I: IntoIterator<Item = Arc>>(arcs: I) -> Self {
        let mut linear = Vec::new();
        for arc in arcs {
            let (first, second) = arc.linear_pieces();
            linear.push(first);
            if let Some(s) = second {
                linear.push(s);
            }
        }
        Self::from_linear(linear)
    }

    /// Canonicalize closed linear intervals `[s, e]` with `0 <= s <= e <= 1`.
    pub(crate) fn from_linear(mut linear: Vec<[f64; 2]>) -> Self {
        if linear.is_empty() {
            return Self::empty();
        }
        // the point 1 is the point 0
        for iv in linear.iter_mut() {
            if iv[0] >= 1.0 {
                *iv = [0.0, 0.0];
            }
        }
        linear.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let mut merged: Vec<[f64; 2]> = Vec::with_capacity(linear.len());
        for iv in linear {
            match merged.last_mut() {
                Some(last) if iv[0] <= last[1] => {
                    if iv[1] > last[1] {
                        last[1] = iv[1];
                    }
                }
                _ => merged.push(iv),
            }
        }
        if merged.len() == 1 && merged[0][0] <= 0.0 && merged[0][1] >= 1.0 {
            return Self::full();
        }
        // an interval closed at 1 contains the point 0
        if merged[merged.len() - 1][1] >= 1.0 && merged[0][0] > 0.0 {
            merged.insert(0, [0.0, 0.0]);
        }
        let n = merged.len();
        if n > 1 && merged[0][0] == 0.0 && merged[n - 1][1] >= 1.0 {
            let first = merged.remove(0);
            let last = merged.last_mut().expect("n > 1");
            if first[1] >= last[0] {
                return Self::full();
            }
            last[1] = first[1];
        }
        Self { spans: merged }
    }

    /// The components as arcs.
    pub fn arcs(&self) -> Vec<Arc> {
        self.spans
            .iter()
            .map(|&[s, e]| {
                if e < s {
                    Arc {
                        start: s,
                        length: (1.0 - s) + e,
                    }
                } else if e - s >= 1.0 {
                    Arc::full()
                } else {
                    Arc {
                        start: s,
                        length: e - s,
                    }
                }
            })
            .collect()
    }

    /// Components as `[start, end]` mod 1; `end < start` for the arc through 0.
    pub fn spans(&self) -> &[[f64; 2]] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.spans.len() == 1 && self.spans[0] == [0.0, 1.0]
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        sum_compensated(self.linear().iter().map(|&[s, e]| e - s))
    }

    /// Finite sets (only point arcs) are the countable case.
    pub fn is_finite_point_set(&self) -> bool {
        self.spans.iter().all(|&[s, e]| s == e)
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = wrap(x);
        self.linear().iter().any(|iv| iv[0] <= x && x <= iv[1])
            || (x == 0.0 && self.linear().iter().any(|iv| iv[1] >= 1.0))
    }

    /// Cut at 0 into closed intervals of `[0, 1]`, sorted.
    pub(crate) fn linear(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.spans.len() + 1);
        for &[s, e] in &self.spans {
            if e < s {
                out.push([0.0, e]);
                out.push([s, 1.0]);
            } else {
                out.push([s, e]);
            }
        }
        out.sort_by(|a, b| a[0].total_cmp(&b[0]));
        out
    }

    /// Remove the open arc `(arc.start, arc.end())`; closed remnants remain.
    pub fn subtract(&self, arc: &Arc) -> ArcSet {
        if arc.is_point() || self.is_empty() {
            return self.clone();
        }
        let holes = open_linear_pieces(arc);
        let mut out = Vec::with_capacity(self.spans.len() + 2);
        for iv in self.linear() {
            let mut pieces = vec![iv];
            for hole in &holes {
                let mut next = Vec::with_capacity(2);
                for p in pieces {
                    subtract_open(p, *hole, &mut next);
                }
                pieces = next;
            }
            out.extend(pieces);
        }
        Self::from_linear(out)
    }

    /// Intersection with a closed arc.
    pub fn intersect_arc(&self, arc: &Arc) -> ArcSet {
        self.intersect(&ArcSet::from_arc(*arc))
    }

    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mine = self.linear();
        let theirs = other.linear();
        let mut out = Vec::new();
        for iv in &mine {
            for w in &theirs {
                let s = iv[0].max(w[0]);
                let e = iv[1].min(w[1]);
                if s <= e {
                    out.push([s, e]);
                }
            }
        }
        Self::from_linear(out)
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        let mut lin = self.linear();
        lin.extend(other.linear());
        Self::from_linear(lin)
    }

    /// Length of the overlap with an arc.
    pub fn overlap_length(&self, arc: &Arc) -> f64 {
        self.intersect_arc(arc).measure()
    }

    /// `true` when every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &ArcSet) -> bool {
        let host = other.linear();
        self.linear().iter().all(|iv| {
            host.iter().any(|h| h[0] <= iv[0] && iv[1] <= h[1])
                || (iv[0] >= 1.0 && host.iter().any(|h| h[0] == 0.0))
        })
    }

    /// Sample points of each component: its endpoints and `per_arc` evenly
    /// spread interior points.
    pub fn sample_points(&self, per_arc: usize) -> Vec<f64> {
        let mut pts = Vec::new();
        for a in self.arcs() {
            if a.is_point() {
                pts.push(a.start);
                continue;
            }
            pts.push(a.start);
            if !a.is_full() {
                pts.push(wrap(a.end()));
            }
            for i in 0..per_arc {
                pts.push(wrap(a.start + a.length * (i as f64 + 0.5) / per_arc as f64));
            }
        }
        pts
    }
}

/// Linear open pieces of the open arc `(start, start + length)`.
///
/// An arc through 0 removes the circle point 0 itself, so both linear copies
/// of it (0 and 1) are covered by unbounded pieces.
pub(crate) fn open_linear_pieces(arc: &Arc) -> Vec<[f64; 2]> {
    let a = arc.start;
    let b = arc.start + arc.length;
    if b <= 1.0 {
        vec![[a, b]]
    } else {
        vec![[a, f64::INFINITY], [f64::NEG_INFINITY, b - 1.0]]
    }
}

/// `[s, e]` minus the open interval `(p, q)`.
#[inline]
pub(crate) fn subtract_open(iv: [f64; 2], hole: [f64; 2], out: &mut Vec<[f64; 2]>) {
    let [s, e] = iv;
    let [p, q] = hole;
    if e <= p || s >= q {
        out.push(iv);
        return;
    }
    if s <= p {
        out.push([s, p]);
    }
    if q <= e {
        out.push([q, e]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_unions() {
        let s = ArcSet::parse("arc:0.9:0.1+points:0.5").unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.measure() - 0.2).abs() < 1e-15);
        assert!(ArcSet::parse("full").unwrap().is_full());
        assert!(ArcSet::parse("arc:0").is_err());
    }

    fn arc(a: f64, b: f64) -> Arc {
        Arc::from_endpoints(a, b).unwrap()
    }

    #[test]
    fn full_minus_arc_leaves_complement() {
        let s = ArcSet::full().subtract(&Arc::new(0.2, 0.3).unwrap());
        assert_eq!(s.len(), 1);
        assert!((s.measure() - 0.7).abs() < 1e-15);
        assert!(s.contains(0.2) && s.contains(0.5) && !s.contains(0.35));
    }

    #[test]
    fn open_hole_leaves_closed_remnants() {
        let s = ArcSet::from_arc(arc(0.0, 0.4)).subtract(&arc(0.1, 0.2));
        let a = s.arcs();
        assert_eq!(a.len(), 2);
        assert_eq!((a[0].start, a[0].end()), (0.0, 0.1));
        assert!((a[1].start - 0.2).abs() < 1e-15 && (a[1].end() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn disjoint_hole_is_noop() {
        let s = ArcSet::from_arcs([arc(0.1, 0.2), arc(0.5, 0.6)]);
        assert_eq!(s.subtract(&arc(0.3, 0.4)), s);
    }

    #[test]
    fn wrapping_arcs_stay_whole() {
        let s = ArcSet::from_arcs([arc(0.0, 0.1), arc(0.9, 1.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s.arcs()[0].start, 0.9);
        assert!((s.measure() - 0.2).abs() < 1e-15);
        assert!(s.contains(0.0));
    }

    #[test]
    fn hole_through_zero_removes_zero() {
        let s = ArcSet::full().subtract(&Arc::new(0.95, 0.1).unwrap());
        assert!(!s.contains(0.0));
        assert!((s.measure() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn point_arcs_survive_and_merge() {
        let s = ArcSet::from_points([0.0, 0.5, 0.5]);
        assert_eq!(s.len(), 2);
        assert!(s.is_finite_point_set());
        let t = s.union(&ArcSet::from_arc(arc(0.4, 0.5)));
        assert_eq!(t.len(), 2);
        assert!(!t.is_finite_point_set());
    }

    #[test]
    fn touching_arcs_merge() {
        let s = ArcSet::from_arcs([arc(0.1, 0.2), arc(0.2, 0.3)]);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let s = ArcSet::from_arcs([arc(0.7, 1.05), arc(0.02, 0.1), Arc::point(0.5)]);
        assert_eq!(ArcSet::from_linear(s.linear()), s);
        let again = ArcSet::from_arcs(s.arcs());
        assert_eq!(again.len(), s.len());
        assert!((again.measure() - s.measure()).abs() < 1e-15);
    }

    #[test]
    fn arc_ending_at_one_equals_arc_ending_at_zero() {
        let a = ArcSet::from_linear(vec![[0.5, 1.0]]);
        let b = ArcSet::from_linear(vec![[0.5, 1.0], [0.0, 0.0]]);
        assert_eq!(a, b);
        assert!(a.contains(0.0));
    }

    #[test]
    fn union_of_two_halves_is_full() {
        let s = ArcSet::from_arcs([arc(0.0, 0.5), arc(0.5, 1.0)]);
        assert!(s.is_full());
    }

    #[test]
    fn subset_checks() {
        let k = ArcSet::from_arc(arc(0.2, 0.3));
        let u = ArcSet::from_arc(arc(0.1, 0.4));
        assert!(k.is_subset_of(&u));
        assert!(!u.is_subset_of(&k));
        assert!(ArcSet::from_points([0.0]).is_subset_of(&ArcSet::from_arc(arc(0.9, 1.1))));
    }
}
