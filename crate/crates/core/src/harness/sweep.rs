//! Uncovered-measure decay for `l_n = c/n` across a grid of `c`.

use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::coversim::{expected_uncovered_curve, run_trials, Target, TrialConfig};
use crate::density::PiecewisePolyDensity;
use crate::error::{domain, Result};
use crate::sequences::LengthSequence;
use crate::stats::{loglog_fit, mean_se};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub c_grid: Vec<f64>,
    /// Steps where the exact expectation is evaluated.
    pub exact_grid: Vec<u64>,
    /// Steps where trials are recorded; at most the exact grid's range.
    pub mc_grid: Vec<u64>,
    /// Range of the log-log fit on the exact curve.
    pub fit_range: (u64, u64),
    pub trials: u64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(domain("c grid must be positive"));
        }
        for g in [&self.exact_grid, &self.mc_grid] {
            if g.first() == Some(&0) || g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(domain("step grids must be positive and strictly increasing"));
            }
        }
        if self.fit_range.0 >= self.fit_range.1 {
            return Err(domain("empty fit range"));
        }
        if !self.mc_grid.is_empty() && self.trials < 2 {
            return Err(domain("Monte Carlo cells need at least 2 trials"));
        }
        Ok(())
    }
}

/// One `(c, N)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub c: f64,
    pub n: u64,
    pub exact: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_se: Option<f64>,
    pub trials: u64,
    /// Trials are keyed by `trial_seed(seed, i)` for `i` in `trial_lo..=trial_hi`.
    pub seed: u64,
    pub trial_lo: u64,
    pub trial_hi: u64,
}

impl SweepCell {
    /// `|mc_mean - exact| <= k * mc_se`, when both are present.
    pub fn mc_agrees(&self, k: f64) -> Option<bool> {
        match (self.mc_mean, self.mc_se, self.exact) {
            (Some(m), Some(s), Some(e)) => Some((m - e).abs() <= k * s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub c: f64,
    /// Slope of `ln E[uncovered]` against `ln N` on the exact curve.
    pub slope: f64,
    pub slope_se: f64,
    /// `-c m_f`.
    pub predicted: f64,
    /// `c m_f >= 1`.
    pub covering_regime: bool,
    /// Fraction of trials covering the circle by the last recorded step.
    pub mc_cover_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub density: String,
    pub m_f: f64,
    pub cells: Vec<SweepCell>,
    pub fits: Vec<SweepFit>,
}

/// Exact and Monte Carlo decay of the uncovered measure of the circle.
pub fn phase_transition_sweep(f: &PiecewisePolyDensity, config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let m = f.ess_inf();
    let full = ArcSet::full();
    let mut cells = Vec::new();
    let mut fits = Vec::new();
    let mut grid: Vec<u64> = config.exact_grid.iter().chain(&config.mc_grid).copied().collect();
    grid.sort_unstable();
    grid.dedup();
    for &c in &config.c_grid {
        let seq = LengthSequence::harmonic(c)?;
        let exact: Vec<f64> = expected_uncovered_curve(f, &seq, &config.exact_grid, &full)?
            .into_iter()
            .map(|e| e.value)
            .collect();
        let mut mc: Vec<(f64, f64)> = Vec::new();
        let mut cover_fraction = None;
        if let Some(&n_max) = config.mc_grid.last() {
            let base = TrialConfig {
                density: f.clone(),
                lengths: seq.clone(),
                n_max,
                target: Target::Full,
                seed: config.seed,
                checkpoints: config.mc_grid.clone(),
            };
            let runs = run_trials(&base, config.trials)?;
            for k in 0..config.mc_grid.len() {
                // trajectory[0] is n = 0
                let xs: Vec<f64> = runs.iter().map(|r| r.trajectory[k + 1].uncovered).collect();
                mc.push(mean_se(&xs));
            }
            let covered = runs.iter().filter(|r| r.covered_by(n_max)).count();
            cover_fraction = Some(covered as f64 / config.trials as f64);
        }
        for &n in &grid {
            let e = config.exact_grid.iter().position(|&g| g == n).map(|i| exact[i]);
            let r = config.mc_grid.iter().position(|&g| g == n).map(|i| mc[i]);
            cells.push(SweepCell {
                c,
                n,
                exact: e,
                mc_mean: r.map(|x| x.0),
                mc_se: r.map(|x| x.1),
                trials: if r.is_some() { config.trials } else { 0 },
                seed: config.seed,
                trial_lo: 0,
                trial_hi: config.trials.saturating_sub(1),
            });
        }
        let fit = loglog_fit(&config.exact_grid, &exact, config.fit_range.0, config.fit_range.1);
        fits.push(SweepFit {
            c,
            slope: fit.map_or(f64::NAN, |x| x.slope),
            slope_se: fit.map_or(f64::NAN, |x| x.slope_se),
            predicted: -c * m,
            covering_regime: c * m >= 1.0,
            mc_cover_fraction: cover_fraction,
        });
    }
    Ok(SweepResult {
        density: f.origin().unwrap_or("piecewise").to_string(),
        m_f: m,
        cells,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::uniform;

    #[test]
    fn uniform_exact_cell_is_the_product() {
        let cfg = SweepConfig {
            c_grid: vec![0.5],
            exact_grid: vec![4, 1000, 10_000],
            mc_grid: vec![4],
            fit_range: (1000, 10_000),
            trials: 64,
            seed: 1,
        };
        let r = phase_transition_sweep(&uniform(), &cfg).unwrap();
        assert!((r.cells[0].exact.unwrap() - 0.2734375).abs() < 1e-15);
        assert!((r.fits[0].slope + 0.5).abs() < 0.01);
        assert_eq!(r.cells[0].trials, 64);
        assert_eq!(r.cells[1].mc_mean, None);
    }
}
