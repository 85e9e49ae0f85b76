//! The decomposition `mu = alpha_0 mu~_0 + alpha_1 mu~_1` realized by marks.
//!
//! Step `j` draws `eps_j = 1{v_j < alpha_1}` from the marks stream and
//! `xi_j = M~_{eps_j}^-1(u_j)` from the centers stream, so every `xi_j` has
//! law `mu` and `alpha_1 = 1` replays `run_trial` draw for draw.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::density::{Piece, PiecewisePolyDensity};
use crate::error::{construction, domain, Result};
use crate::summation::CompensatedSum;

use super::rng::{CounterRng, STREAM_CENTERS, STREAM_MARKS};
use super::trial::{PointHits, Recorder, TrajectoryPoint, TrialConfig, TrialResult};

/// Pointwise tolerance on `mu_0 + mu_1 = mu`.
pub const DECOMPOSITION_TOL: f64 = 1e-12;

/// A nonnegative piecewise affine function on `[0, 1)` of any mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDensity {
    pieces: Vec<Piece>,
}

impl SubDensity {
    pub fn from_density(f: &PiecewisePolyDensity) -> Self {
        Self {
            pieces: f.pieces().to_vec(),
        }
    }

    pub fn zero() -> Self {
        Self {
            pieces: vec![Piece {
                from: 0.0,
                to: 1.0,
                c0: 0.0,
                c1: 0.0,
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.to <= x).min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        p.c0 + p.c1 * (x - p.from)
    }

    pub fn mass(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let h = p.to - p.from;
                h * (p.c0 + 0.5 * p.c1 * h)
            })
            .collect::<CompensatedSum>()
            .value()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.from).collect()
    }

    /// The same function with extra breakpoints at `cuts`.
    fn refine(&self, cuts: &[f64]) -> Self {
        let mut out = Vec::new();
        for p in &self.pieces {
            let mut from = p.from;
            let mut c0 = p.c0;
            for &c in cuts.iter().filter(|&&c| c > p.from && c < p.to) {
                if c > from {
                    out.push(Piece { from, to: c, c0, c1: p.c1 });
                    c0 = p.c0 + p.c1 * (c - p.from);
                    from = c;
                }
            }
            out.push(Piece { from, to: p.to, c0, c1: p.c1 });
        }
        Self { pieces: out }
    }

    fn zip_with(&self, other: &SubDensity, op: impl Fn(f64, f64) -> f64) -> Self {
        let mut cuts = self.breakpoints();
        cuts.extend(other.breakpoints());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let a = self.refine(&cuts);
        let b = other.refine(&cuts);
        let pieces = a
            .pieces
            .iter()
            .zip(&b.pieces)
            .map(|(p, q)| Piece {
                c0: op(p.c0, q.c0),
                c1: op(p.c1, q.c1),
                ..*p
            })
            .collect();
        Self { pieces }
    }

    /// The function on `set`, zero elsewhere.
    pub fn restrict(&self, set: &ArcSet) -> Self {
        let spans = set.linear();
        let mut cuts: Vec<f64> = spans.iter().flatten().copied().collect();
        cuts.sort_by(f64::total_cmp);
        let fine = self.refine(&cuts);
        let pieces = fine
            .pieces
            .iter()
            .map(|p| {
                let mid = 0.5 * (p.from + p.to);
                if spans.iter().any(|s| s[0] <= mid && mid <= s[1]) {
                    *p
                } else {
                    Piece { c0: 0.0, c1: 0.0, ..*p }
                }
            })
            .collect();
        Self { pieces }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    c0: k * p.c0,
                    c1: k * p.c1,
                    ..*p
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &SubDensity) -> Self {
        self.zip_with(other, |x, y| x + y)
    }

    /// `self - other`; fails where the difference is below `-DECOMPOSITION_TOL`.
    pub fn subtract(&self, other: &SubDensity) -> Result<Self> {
        let mut d = self.zip_with(other, |x, y| x - y);
        for p in &mut d.pieces {
            let end = p.c0 + p.c1 * (p.to - p.from);
            if p.c0.min(end) < -DECOMPOSITION_TOL {
                return Err(construction(format!(
                    "difference is negative on [{}, {})",
                    p.from, p.to
                )));
            }
            if p.c0.abs().max(end.abs()) <= DECOMPOSITION_TOL {
                p.c0 = 0.0;
                p.c1 = 0.0;
            }
        }
        Ok(d)
    }

    /// Largest `|self - other|` at breakpoints of either (both are affine between).
    pub fn max_abs_diff(&self, other: &SubDensity) -> f64 {
        let d = self.zip_with(other, |x, y| x - y);
        d.pieces
            .iter()
            .map(|p| p.c0.abs().max((p.c0 + p.c1 * (p.to - p.from)).abs()))
            .fold(0.0, f64::max)
    }

    /// `(mass, self / mass)`, or `(0, None)` for the zero function.
    pub fn normalize(&self) -> Result<(f64, Option<PiecewisePolyDensity>)> {
        let m = self.mass();
        if m <= DECOMPOSITION_TOL {
            return Ok((0.0, None));
        }
        let d = PiecewisePolyDensity::normalized(self.pieces.clone(), None)?;
        Ok((m, Some(d)))
    }
}

/// `mu = alpha_0 mu~_0 + alpha_1 mu~_1` with `mu~_i` normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledModel {
    pub density: PiecewisePolyDensity,
    pub mu0: Option<PiecewisePolyDensity>,
    pub mu1: Option<PiecewisePolyDensity>,
    pub alpha1: f64,
}

impl CoupledModel {
    /// Split `f` into the unnormalized parts `mu_0` and `mu_1`, checked to sum
    /// to `f` within `DECOMPOSITION_TOL`. A part of mass 0 is dropped.
    pub fn from_parts(f: &PiecewisePolyDensity, mu0: &SubDensity, mu1: &SubDensity) -> Result<Self> {
        let gap = mu0.add(mu1).max_abs_diff(&SubDensity::from_density(f));
        if gap > DECOMPOSITION_TOL {
            return Err(construction(format!("mu_0 + mu_1 differs from mu by {gap:e}")));
        }
        let (a0, d0) = mu0.normalize()?;
        let (a1, d1) = mu1.normalize()?;
        let alpha1 = if d0.is_none() { 1.0 } else if d1.is_none() { 0.0 } else { a1 / (a0 + a1) };
        // a full part is `f` itself, so degenerate models draw exactly as `run_trial`
        let (d0, d1) = match alpha1 {
            x if x == 1.0 => (None, Some(f.clone())),
            x if x == 0.0 => (Some(f.clone()), None),
            _ => (d0, d1),
        };
        Ok(Self {
            density: f.clone(),
            mu0: d0,
            mu1: d1,
            alpha1,
        })
    }

    /// `mu_1 = mu|_set`, `mu_0 = mu` off the set.
    pub fn restriction(f: &PiecewisePolyDensity, set: &ArcSet) -> Result<Self> {
        let full = SubDensity::from_density(f);
        let mu1 = full.restrict(set);
        let mu0 = full.subtract(&mu1)?;
        Self::from_parts(f, &mu0, &mu1)
    }

    /// `mu_1 = alpha_1 g`, `mu_0 = mu - alpha_1 g`; needs `alpha_1 g <= f`.
    pub fn mixture(f: &PiecewisePolyDensity, g: &PiecewisePolyDensity, alpha1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha1) {
            return Err(domain(format!("alpha_1 = {alpha1} outside [0, 1]")));
        }
        let mu1 = SubDensity::from_density(g).scale(alpha1);
        let mu0 = SubDensity::from_density(f).subtract(&mu1)?;
        Self::from_parts(f, &mu0, &mu1)
    }

    pub fn alpha0(&self) -> f64 {
        1.0 - self.alpha1
    }

    /// Draw `j` given its mark and center uniforms.
    #[inline]
    pub fn draw(&self, v: f64, u: f64) -> (bool, f64) {
        let eps = v < self.alpha1;
        let part = if eps { &self.mu1 } else { &self.mu0 };
        let d = part.as_ref().unwrap_or(&self.density);
        (eps, d.inverse_cdf_unchecked(u))
    }

    /// The first `n` centers of the run keyed by `seed`.
    pub fn sample_centers(&self, seed: u64, n: u64) -> Vec<f64> {
        let mut marks = CounterRng::new(seed, STREAM_MARKS);
        let mut centers = CounterRng::new(seed, STREAM_CENTERS);
        (0..n).map(|_| self.draw(marks.next_uniform(), centers.next_uniform()).1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledResult {
    pub trial: TrialResult,
    /// `eps_j` for every step taken.
    pub marks: Vec<bool>,
    /// Cover time by the steps with `eps_j = 1` alone.
    pub lambda_cover_time: Option<u64>,
    pub lambda_trajectory: Vec<TrajectoryPoint>,
}

/// One coupled run. `config.density` must equal `model.density`.
pub fn run_coupled_trial(model: &CoupledModel, config: &TrialConfig) -> Result<CoupledResult> {
    config.validate()?;
    if config.density != model.density {
        return Err(domain("trial density differs from the model density"));
    }
    let mut set = config.target.uncovered();
    let mut lambda = config.target.uncovered();
    let mut rec = Recorder::new(&config.checkpoints, &set);
    let mut lrec = Recorder::new(&config.checkpoints, &lambda);
    let mut hits = PointHits::new(&config.target, &mut set);
    let mut marks_rng = CounterRng::new(config.seed, STREAM_MARKS);
    let mut centers_rng = CounterRng::new(config.seed, STREAM_CENTERS);
    let mut marks = Vec::new();
    let (mut done, mut ldone) = (false, false);
    for n in 1..=config.n_max {
        let l = config.lengths.length(n)?;
        let (eps, xi) = model.draw(marks_rng.next_uniform(), centers_rng.next_uniform());
        marks.push(eps);
        if !done {
            set.remove_centered(xi, l);
            if let Some(h) = hits.as_mut() {
                h.record(n, &mut set);
            }
            done = rec.after_step(n, &set);
        }
        if eps && !ldone {
            lambda.remove_centered(xi, l);
        }
        if !ldone {
            ldone = lrec.after_step(n, &lambda);
        }
        if done && ldone {
            break;
        }
    }
    let (trajectory, cover_time) = rec.finish();
    let (lambda_trajectory, lambda_cover_time) = lrec.finish();
    Ok(CoupledResult {
        trial: TrialResult {
            seed: config.seed,
            cover_time,
            trajectory,
            point_hits: hits.map(PointHits::finish),
        },
        marks,
        lambda_cover_time,
        lambda_trajectory,
    })
}

/// `trials` coupled runs keyed like `run_trials`.
pub fn run_coupled_trials(model: &CoupledModel, config: &TrialConfig, trials: u64) -> Result<Vec<CoupledResult>> {
    config.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|i| run_coupled_trial(model, &config.for_trial(i)))
        .collect()
}
