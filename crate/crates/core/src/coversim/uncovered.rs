//! The uncovered part of a target, updated one open interval at a time.

use std::collections::BTreeMap;
use std::ops::Bound::{Excluded, Unbounded};

use crate::arcset::ArcSet;
use crate::summation::CompensatedSum;

/// Order-preserving key for nonnegative floats.
#[inline]
fn key(x: f64) -> u64 {
    (x + 0.0).to_bits()
}

#[inline]
fn unkey(k: u64) -> f64 {
    f64::from_bits(k)
}

/// Closed intervals of `[0, 1]` keyed by start. The circle point 0 may sit
/// at both ends; open arcs through 0 remove both copies.
#[derive(Debug, Clone, PartialEq)]
pub struct UncoveredSet {
    map: BTreeMap<u64, f64>,
    initial: f64,
    removed: CompensatedSum,
    /// When enabled, point components removed since the last drain.
    hit_log: Option<Vec<f64>>,
}

impl UncoveredSet {
    pub fn from_arcset(set: &ArcSet) -> Self {
        let mut map = BTreeMap::new();
        for [s, e] in set.linear() {
            map.insert(key(s), e);
        }
        Self {
            map,
            initial: set.measure(),
            removed: CompensatedSum::new(),
            hit_log: None,
        }
    }

    pub fn full() -> Self {
        Self::from_arcset(&ArcSet::full())
    }

    pub fn from_points(points: &[f64]) -> Self {
        Self::from_arcset(&ArcSet::from_points(points.iter().copied()))
    }

    /// Start logging removed point components.
    pub fn track_points(&mut self) {
        self.hit_log = Some(Vec::new());
    }

    /// Point components removed since the last call.
    pub fn drain_hits(&mut self) -> Vec<f64> {
        self.hit_log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Number of components (points included).
    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// Lebesgue measure: the initial measure minus every removed overlap.
    pub fn measure(&self) -> f64 {
        if self.map.is_empty() {
            0.0
        } else {
            (self.initial - self.removed.value()).max(0.0)
        }
    }

    /// Measure recomputed from the components.
    pub fn measure_direct(&self) -> f64 {
        self.map
            .iter()
            .map(|(&s, &e)| e - unkey(s))
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn intervals(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.map.iter().map(|(&s, &e)| [unkey(s), e])
    }

    pub fn to_arcset(&self) -> ArcSet {
        ArcSet::from_linear(self.intervals().collect())
    }

    /// Remove the open arc of length `length < 1` centered at `center`.
    pub fn remove_centered(&mut self, center: f64, length: f64) {
        let a = center - 0.5 * length;
        let b = center + 0.5 * length;
        if a < 0.0 {
            self.remove_linear(a + 1.0, f64::INFINITY);
            self.remove_linear(f64::NEG_INFINITY, b);
        } else if b > 1.0 {
            self.remove_linear(a, f64::INFINITY);
            self.remove_linear(f64::NEG_INFINITY, b - 1.0);
        } else {
            self.remove_linear(a, b);
        }
    }

    /// Remove the open interval `(a, b)`; returns the removed length.
    pub fn remove_linear(&mut self, a: f64, b: f64) -> f64 {
        let mut hits: Vec<(u64, f64)> = Vec::new();
        if a >= 0.0 {
            if let Some((&k, &e)) = self.map.range(..=key(a)).next_back() {
                if e > a {
                    hits.push((k, e));
                }
            }
        }
        let lower = if a >= 0.0 { Excluded(key(a)) } else { Unbounded };
        for (&k, &e) in self.map.range((lower, Unbounded)) {
            if unkey(k) >= b {
                break;
            }
            hits.push((k, e));
        }
        let mut removed = 0.0;
        for (k, e) in hits {
            let s = unkey(k);
            self.map.remove(&k);
            removed += e.min(b) - s.max(a);
            if s == e {
                if let Some(log) = self.hit_log.as_mut() {
                    log.push(s);
                }
            }
            if s <= a {
                self.map.insert(k, a);
            }
            if e >= b {
                self.map.insert(key(b), e);
            }
        }
        if removed > 0.0 {
            self.removed.add(removed);
        }
        removed
    }

    /// Whether the closed component set still contains `x`.
    pub fn contains(&self, x: f64) -> bool {
        self.map
            .range(..=key(x))
            .next_back()
            .is_some_and(|(_, &e)| e >= x)
    }
}
