//! Cover probabilities of `K` under two densities `mu <= nu` on `U`, coupled
//! through the common part `mu|_U`.
//!
//! Both models use `mu_1 = nu_1 = mu|_U` with the same marks and centers
//! streams, so the steps with `eps_j = 1` are literally shared; only the
//! remaining draws differ.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::circle::Arc;
use crate::density::PiecewisePolyDensity;
use crate::error::{Error, Result};
use crate::sequences::LengthSequence;

use super::coupled::{run_coupled_trial, CoupledModel, SubDensity};
use super::exact::point_uncovered_probability;
use super::rng::trial_seed;
use super::trial::{Target, TrialConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: u64,
    pub p_mu: f64,
    pub p_nu: f64,
    pub se_mu: f64,
    pub se_nu: f64,
    /// Standard error of the paired difference `1{nu covers} - 1{mu covers}`.
    pub se_diff: f64,
    /// Closed form `1 - prod (1 - mu(B(x, r_n)))` for a one-point `K`.
    pub exact_mu: Option<f64>,
    pub exact_nu: Option<f64>,
}

impl ComparisonRow {
    /// `p_nu >= p_mu - k se_diff`.
    pub fn ordered(&self, k: f64) -> bool {
        self.p_nu >= self.p_mu - k * self.se_diff
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub trials: u64,
    pub seed: u64,
    /// Mass of the shared part `mu(U)`.
    pub alpha1: f64,
    pub rows: Vec<ComparisonRow>,
    /// Whether the shared-step coverings of `K` agreed for every seed.
    pub lambda_identical: bool,
}

impl ComparisonReport {
    pub fn all_ordered(&self, k: f64) -> bool {
        self.rows.iter().all(|r| r.ordered(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSetup {
    pub mu: PiecewisePolyDensity,
    pub nu: PiecewisePolyDensity,
    pub u: Arc,
    pub k: ArcSet,
    pub lengths: LengthSequence,
    pub checkpoints: Vec<u64>,
}

/// The two coupled models, after checking `K in U` and `mu <= nu` on `U`.
pub fn comparison_models(setup: &ComparisonSetup) -> Result<(CoupledModel, CoupledModel)> {
    let u_set = ArcSet::from_arc(setup.u);
    if !setup.k.is_subset_of(&u_set) {
        return Err(Error::Precondition("K is not inside U".into()));
    }
    let shared = SubDensity::from_density(&setup.mu).restrict(&u_set);
    let nu_on_u = SubDensity::from_density(&setup.nu).restrict(&u_set);
    nu_on_u
        .subtract(&shared)
        .map_err(|_| Error::Precondition("mu <= nu fails on U".into()))?;
    let mu_rest = SubDensity::from_density(&setup.mu).subtract(&shared)?;
    let nu_rest = SubDensity::from_density(&setup.nu).subtract(&shared)?;
    let m = CoupledModel::from_parts(&setup.mu, &mu_rest, &shared)?;
    let n = CoupledModel::from_parts(&setup.nu, &nu_rest, &shared)?;
    Ok((m, n))
}

/// Estimated `P(K covered by n)` under `mu` and `nu` at each checkpoint.
pub fn comparison_experiment(setup: &ComparisonSetup, trials: u64, seed: u64) -> Result<ComparisonReport> {
    let (m_mu, m_nu) = comparison_models(setup)?;
    let n_max = *setup
        .checkpoints
        .last()
        .ok_or_else(|| Error::Domain("need at least one checkpoint".into()))?;
    let cfg = |d: &PiecewisePolyDensity| TrialConfig {
        density: d.clone(),
        lengths: setup.lengths.clone(),
        n_max,
        target: Target::Set { set: setup.k.clone() },
        seed,
        checkpoints: setup.checkpoints.clone(),
    };
    let (c_mu, c_nu) = (cfg(&setup.mu), cfg(&setup.nu));
    c_mu.validate()?;
    let pairs: Vec<(Option<u64>, Option<u64>, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let a = run_coupled_trial(&m_mu, &TrialConfig { seed: s, ..c_mu.clone() })?;
            let b = run_coupled_trial(&m_nu, &TrialConfig { seed: s, ..c_nu.clone() })?;
            Ok((a.trial.cover_time, b.trial.cover_time, a.lambda_cover_time == b.lambda_cover_time))
        })
        .collect::<Result<_>>()?;
    let point = setup.k.is_finite_point_set() && setup.k.len() == 1;
    let x = setup.k.spans()[0][0];
    let t = trials as f64;
    let mut rows = Vec::with_capacity(setup.checkpoints.len());
    for &n in &setup.checkpoints {
        let hit = |c: Option<u64>| f64::from(u8::from(c.is_some_and(|c| c <= n)));
        let a: Vec<f64> = pairs.iter().map(|p| hit(p.0)).collect();
        let b: Vec<f64> = pairs.iter().map(|p| hit(p.1)).collect();
        let (p_mu, p_nu) = (a.iter().sum::<f64>() / t, b.iter().sum::<f64>() / t);
        let se = |p: f64| (p * (1.0 - p) / t).sqrt();
        let dm = p_nu - p_mu;
        let var_d = a.iter().zip(&b).map(|(x, y)| (y - x - dm).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
        let exact = |d: &PiecewisePolyDensity| -> Result<Option<f64>> {
            Ok(if point {
                Some(1.0 - point_uncovered_probability(d, &setup.lengths, n, x)?)
            } else {
                None
            })
        };
        rows.push(ComparisonRow {
            n,
            p_mu,
            p_nu,
            se_mu: se(p_mu),
            se_nu: se(p_nu),
            se_diff: (var_d / t).sqrt(),
            exact_mu: exact(&setup.mu)?,
            exact_nu: exact(&setup.nu)?,
        });
    }
    Ok(ComparisonReport {
        trials,
        seed,
        alpha1: m_mu.alpha1,
        rows,
        lambda_identical: pairs.iter().all(|p| p.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{step, uniform};

    fn setup(mu: PiecewisePolyDensity, nu: PiecewisePolyDensity, k: ArcSet) -> ComparisonSetup {
        ComparisonSetup {
            mu,
            nu,
            u: Arc::from_endpoints(0.1, 0.4).unwrap(),
            k,
            lengths: LengthSequence::harmonic(1.5).unwrap(),
            checkpoints: vec![100, 1000, 5000],
        }
    }

    fn k() -> ArcSet {
        ArcSet::from_arc(Arc::from_endpoints(0.2, 0.3).unwrap())
    }

    #[test]
    fn equal_densities_give_identical_runs() {
        let f = step(0.5, 1.5, 0.5).unwrap();
        let r = comparison_experiment(&setup(f.clone(), f, k()), 64, 5).unwrap();
        assert!(r.rows.iter().all(|row| row.p_mu == row.p_nu && row.se_diff == 0.0));
        assert!(r.lambda_identical);
    }

    #[test]
    fn domination_failure_is_refused() {
        let s = setup(uniform(), step(0.5, 1.5, 0.5).unwrap(), k());
        assert!(matches!(comparison_experiment(&s, 4, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn point_target_has_ordered_closed_forms() {
        let s = setup(step(0.5, 1.5, 0.5).unwrap(), uniform(), ArcSet::from_points([0.25]));
        let r = comparison_experiment(&s, 256, 3).unwrap();
        for row in &r.rows {
            assert!(row.exact_nu.unwrap() >= row.exact_mu.unwrap());
            assert!(row.ordered(2.0));
        }
    }
}
