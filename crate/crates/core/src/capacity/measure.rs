//! Probability measures carried by a set, as inputs to the energy integral.

use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::circle::{wrap, Arc};
use crate::error::{construction, Result};
use crate::summation::sum_compensated;

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SupportMeasure {
    Atoms { points: Vec<f64>, weights: Vec<f64> },
    /// Normalized Lebesgue measure on a set of positive length.
    LebesgueOn { set: ArcSet },
    /// Mass `weights[i]` spread uniformly over the arc of length `cell`
    /// centered at `points[i]`; `cell = 0` gives atoms.
    WeightedGrid {
        points: Vec<f64>,
        weights: Vec<f64>,
        cell: f64,
    },
}

/// Uniform mass `weight` on `[start, start + length]`; `length = 0` is an atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Component {
    pub start: f64,
    pub length: f64,
    pub weight: f64,
}

fn check_weights(points: &[f64], weights: &[f64]) -> Result<()> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(construction("points and weights must be nonempty and of equal length"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(construction("points must be finite"));
    }
    if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(construction("weights must be nonnegative"));
    }
    let total = sum_compensated(weights.iter().copied());
    if (total - 1.0).abs() > MASS_TOL {
        return Err(construction(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

impl SupportMeasure {
    pub fn atom(x: f64) -> Self {
        Self::Atoms {
            points: vec![wrap(x)],
            weights: vec![1.0],
        }
    }

    pub fn atoms(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&points, &weights)?;
        Ok(Self::Atoms {
            points: points.into_iter().map(wrap).collect(),
            weights,
        })
    }

    /// Equal weights on the given points.
    pub fn uniform_atoms(points: Vec<f64>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self::atoms(points, weights)
    }

    pub fn lebesgue(set: ArcSet) -> Result<Self> {
        if !(set.measure() > 0.0) {
            return Err(construction("Lebesgue measure needs a set of positive length"));
        }
        Ok(Self::LebesgueOn { set })
    }

    pub fn weighted_grid(points: Vec<f64>, weights: Vec<f64>, cell: f64) -> Result<Self> {
        check_weights(&points, &weights)?;
        if !(0.0..1.0).contains(&cell) {
            return Err(construction(format!("cell width {cell} outside [0, 1)")));
        }
        Ok(Self::WeightedGrid {
            points: points.into_iter().map(wrap).collect(),
            weights,
            cell,
        })
    }

    /// Equal-weight dyadic cells `[k 2^-j, (k+1) 2^-j]` contained in `set`.
    pub fn dyadic_grid(set: &ArcSet, level: u32) -> Result<Self> {
        let h = (-(level as f64)).exp2();
        let cells = 1u64 << level;
        let points: Vec<f64> = (0..cells)
            .map(|k| k as f64 * h)
            .filter(|&s| {
                Arc::new(s, h)
                    .map(|c| ArcSet::from_arc(c).is_subset_of(set))
                    .unwrap_or(false)
            })
            .map(|s| s + 0.5 * h)
            .collect();
        if points.is_empty() {
            return Err(construction(format!("no dyadic cell of level {level} inside the set")));
        }
        let w = 1.0 / points.len() as f64;
        let weights = vec![w; points.len()];
        Self::weighted_grid(points, weights, h)
    }

    /// Parse `lebesgue` (full circle), `lebesgue:a:b`, `atom:x`,
    /// `atoms:x1,x2,...` (equal weights) or `grid:a:b:level` (dyadic cells).
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |s: &str| crate::Error::Parse(format!("bad number `{s}` in measure `{spec}`"));
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(s));
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            ["lebesgue"] => Self::lebesgue(ArcSet::full()),
            ["lebesgue", a, b] => Self::lebesgue(ArcSet::from_arc(Arc::from_endpoints(num(a)?, num(b)?)?)),
            ["atom", x] => Ok(Self::atom(num(x)?)),
            ["atoms", xs] => Self::uniform_atoms(xs.split(',').map(num).collect::<Result<_>>()?),
            ["grid", a, b, level] => Self::dyadic_grid(
                &ArcSet::from_arc(Arc::from_endpoints(num(a)?, num(b)?)?),
                level.parse().map_err(|_| bad(level))?,
            ),
            _ => Err(crate::Error::Parse(format!("unknown measure `{spec}`"))),
        }
    }

    pub(crate) fn components(&self) -> Vec<Component> {
        match self {
            Self::Atoms { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(&p, &w)| Component {
                    start: p,
                    length: 0.0,
                    weight: w,
                })
                .collect(),
            Self::LebesgueOn { set } => {
                let total = set.measure();
                set.arcs()
                    .into_iter()
                    .filter(|a| a.length > 0.0)
                    .map(|a| Component {
                        start: a.start,
                        length: a.length,
                        weight: a.length / total,
                    })
                    .collect()
            }
            Self::WeightedGrid {
                points,
                weights,
                cell,
            } => points
                .iter()
                .zip(weights)
                .map(|(&p, &w)| Component {
                    start: wrap(p - 0.5 * cell),
                    length: *cell,
                    weight: w,
                })
                .collect(),
        }
    }

    /// Closed support.
    pub fn support(&self) -> ArcSet {
        match self {
            Self::LebesgueOn { set } => set.clone(),
            _ => ArcSet::from_arcs(
                self.components()
                    .into_iter()
                    .filter(|c| c.weight > 0.0)
                    .map(|c| Arc::new(c.start, c.length).expect("component arc")),
            ),
        }
    }

    pub fn total_mass(&self) -> f64 {
        sum_compensated(self.components().iter().map(|c| c.weight))
    }

    pub fn label(&self) -> String {
        match self {
            Self::Atoms { points, .. } if points.len() == 1 => format!("atom@{}", points[0]),
            Self::Atoms { points, .. } => format!("atoms[{}]", points.len()),
            Self::LebesgueOn { .. } => "lebesgue".into(),
            Self::WeightedGrid { points, cell, .. } => format!("grid[{}x{cell}]", points.len()),
        }
    }
}
