//! Monte Carlo moments of the martingale `M_N = int Q_N dsigma`.
//!
//! `Q_N(t) = prod_{n <= N} 1{t not in I_n} / (1 - mu(B(t, r_n)))`. The
//! measure is replaced by weighted nodes (atoms, or midpoints of cells of its
//! arcs), so `E[M_N] = 1` holds exactly for the discretized measure too.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::SupportMeasure;
use crate::circle::{circle_dist, wrap};
use crate::density::PiecewisePolyDensity;
use crate::error::{domain, Error, Result};
use crate::sequences::{ell2_classify, LengthSequence, SeriesClass};
use crate::summation::CompensatedSum;

use super::exact::LogUncoveredProbability;
use super::rng::{trial_seed, CounterRng, STREAM_CENTERS};
use super::uncovered::UncoveredSet;

/// Nodes used for the continuous part of a measure.
pub const LEBESGUE_CELLS: usize = 1024;

/// Largest atom count for the exact second moment.
pub const MAX_EXACT_ATOMS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BillardMoments {
    pub n: u64,
    pub trials: u64,
    pub nodes: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub second: f64,
    pub second_se: f64,
    /// Exact `E[M_N^2]` for atom measures.
    pub exact_second: Option<f64>,
}

impl BillardMoments {
    /// `|mean - 1| <= k * se`.
    pub fn mean_within(&self, k: f64) -> bool {
        (self.mean - 1.0).abs() <= k * self.mean_se
    }
}

/// Weighted evaluation nodes of `sigma`.
pub fn billard_nodes(sigma: &SupportMeasure) -> Vec<(f64, f64)> {
    let comps = sigma.components();
    let spread: f64 = comps.iter().map(|c| c.length).sum();
    let mut out = Vec::new();
    for c in comps {
        if c.length == 0.0 {
            out.push((wrap(c.start), c.weight));
            continue;
        }
        let k = ((LEBESGUE_CELLS as f64 * c.length / spread).round() as usize).max(1);
        let h = c.length / k as f64;
        for j in 0..k {
            out.push((wrap(c.start + (j as f64 + 0.5) * h), c.weight / k as f64));
        }
    }
    out
}

fn check_ell2(lengths: &LengthSequence) -> Result<()> {
    match ell2_classify(lengths) {
        SeriesClass::Converges => Ok(()),
        other => Err(Error::Precondition(format!(
            "the martingale estimator needs sum l_n^2 < inf; `{lengths}` gives {other}"
        ))),
    }
}

/// Mean and second moment of `M_N` over `trials` seeded runs.
pub fn billard_moments(
    f: &PiecewisePolyDensity,
    lengths: &LengthSequence,
    sigma: &SupportMeasure,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<BillardMoments> {
    check_ell2(lengths)?;
    if trials < 2 {
        return Err(domain("need at least 2 trials"));
    }
    let nodes = billard_nodes(sigma);
    let h = LogUncoveredProbability::new(f, lengths, n)?;
    // weight_i / P(t_i uncovered), kept in log form until the end
    let logw: Vec<f64> = nodes.iter().map(|&(t, w)| w.ln() - h.eval(t)).collect();
    let ls = lengths.prefix(n as usize)?;
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| martingale_sample(f, &ls, &nodes, &logw, trial_seed(seed, i)))
        .collect();
    let (mean, mean_se) = mean_and_se(samples.iter().copied());
    let (second, second_se) = mean_and_se(samples.iter().map(|m| m * m));
    let exact_second = match sigma {
        SupportMeasure::Atoms { points, weights } if points.len() <= MAX_EXACT_ATOMS => {
            Some(atom_second_moment(f, &ls, points, weights))
        }
        _ => None,
    };
    Ok(BillardMoments {
        n,
        trials,
        nodes: nodes.len(),
        mean,
        mean_se,
        second,
        second_se,
        exact_second,
    })
}

fn martingale_sample(f: &PiecewisePolyDensity, ls: &[f64], nodes: &[(f64, f64)], logw: &[f64], seed: u64) -> f64 {
    let mut set = UncoveredSet::from_points(&nodes.iter().map(|p| p.0).collect::<Vec<_>>());
    let mut rng = CounterRng::new(seed, STREAM_CENTERS);
    for &l in ls {
        let xi = f.inverse_cdf_unchecked(rng.next_uniform());
        set.remove_centered(xi, l);
        if set.is_empty() {
            return 0.0;
        }
    }
    let mut acc = CompensatedSum::new();
    for (&(t, _), &lw) in nodes.iter().zip(logw) {
        if set.contains(t) || (t == 0.0 && set.contains(1.0)) {
            acc.add(lw.exp());
        }
    }
    acc.value()
}

fn mean_and_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.collect();
    let k = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// `mu(B(s, r) n B(t, r))` for two balls of one radius `r < 1/2`.
fn ball_overlap(f: &PiecewisePolyDensity, s: f64, t: f64, r: f64) -> f64 {
    let d = circle_dist(s, t);
    // midpoint on the short side
    let fwd = wrap(t - s);
    let mid = if fwd <= 0.5 { s + 0.5 * fwd } else { t + 0.5 * (1.0 - fwd) };
    let mut m = 0.0;
    if r - 0.5 * d > 0.0 {
        m += f.mu_ball_unchecked(mid, r - 0.5 * d);
    }
    // the balls also meet across the far side once 2r > 1 - d
    let far = r - 0.5 * (1.0 - d);
    if far > 0.0 {
        m += f.mu_ball_unchecked(mid + 0.5, far);
    }
    m
}

/// Exact `E[M_N^2] = sum_ij w_i w_j prod_n P(s_i, t_j both missed) / (p_i p_j)`
/// for an atom measure, with `1 - mu(B_s u B_t)` in the numerator.
pub fn atom_second_moment(f: &PiecewisePolyDensity, ls: &[f64], points: &[f64], weights: &[f64]) -> f64 {
    let k = points.len();
    let mut total = CompensatedSum::new();
    for i in 0..k {
        for j in 0..k {
            let (s, t) = (points[i], points[j]);
            let mut log = 0.0;
            for &l in ls {
                let r = 0.5 * l;
                let ms = f.mu_ball_unchecked(s, r);
                let mt = f.mu_ball_unchecked(t, r);
                let both = 1.0 - (ms + mt - ball_overlap(f, s, t, r));
                log += both.ln() - (-ms).ln_1p() - (-mt).ln_1p();
            }
            total.add(weights[i] * weights[j] * log.exp());
        }
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcset::ArcSet;
    use crate::density::{step, uniform};

    #[test]
    fn single_atom_exact_second_moment_is_inverse_product() {
        let seq = LengthSequence::harmonic(0.5).unwrap();
        let ls = seq.prefix(50).unwrap();
        let got = atom_second_moment(&uniform(), &ls, &[0.3], &[1.0]);
        let want: f64 = ls.iter().map(|l| 1.0 / (1.0 - l)).product();
        assert!((got - want).abs() < 1e-11 * want);
    }

    #[test]
    fn overlap_of_coincident_and_far_balls() {
        let f = uniform();
        assert!((ball_overlap(&f, 0.2, 0.2, 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(ball_overlap(&f, 0.2, 0.6, 0.1), 0.0);
        assert!((ball_overlap(&f, 0.95, 0.05, 0.1) - 0.1).abs() < 1e-15);
        // radius 0.45 at distance 0.5: overlaps of 0.4 on both sides
        assert!((ball_overlap(&f, 0.0, 0.5, 0.45) - 0.8).abs() < 1e-14);
    }

    #[test]
    fn divergent_ell2_is_refused() {
        let seq = LengthSequence::constant(0.1).unwrap();
        let e = billard_moments(&uniform(), &seq, &SupportMeasure::atom(0.1), 10, 10, 1);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn nodes_carry_unit_mass() {
        let set = ArcSet::from_arcs([crate::Arc::new(0.0, 0.25).unwrap(), crate::Arc::new(0.5, 0.25).unwrap()]);
        let nodes = billard_nodes(&SupportMeasure::lebesgue(set).unwrap());
        assert_eq!(nodes.len(), LEBESGUE_CELLS);
        assert!((nodes.iter().map(|n| n.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn martingale_mean_is_one() {
        let seq = LengthSequence::harmonic(0.5).unwrap();
        let f = step(0.5, 1.5, 0.5).unwrap();
        let m = billard_moments(&f, &seq, &SupportMeasure::atoms(vec![0.2, 0.7], vec![0.5, 0.5]).unwrap(), 200, 4000, 9)
            .unwrap();
        assert!(m.mean_within(3.0), "{m:?}");
        let exact = m.exact_second.unwrap();
        assert!((m.second - exact).abs() <= 3.0 * m.second_se, "{m:?}");
    }
}
