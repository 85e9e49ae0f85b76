//! Energy-versus-Shepp comparison for sets of positive length, and a
//! capacity-zero test over a fixed family of candidate measures.

use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::error::{Error, Result};
use crate::sequences::{shepp_classify, shepp_partials, sum_classify, LengthSequence, SeriesClass};

use super::energy::energy;
use super::kernel::KernelPhi;
use super::measure::SupportMeasure;
use super::{classify_ladder, Growth};

/// Energies of `sigma` at each truncation, as logs.
pub fn energy_ladder(
    seq: &LengthSequence,
    a: f64,
    sigma: &SupportMeasure,
    truncations: &[u64],
) -> Result<Vec<f64>> {
    truncations
        .iter()
        .map(|&n| Ok(energy(&KernelPhi::new(seq, a, n)?, sigma)?.log_value))
        .collect()
}

fn growth_of(class: SeriesClass) -> Option<Growth> {
    match class {
        SeriesClass::Converges => Some(Growth::Bounded),
        SeriesClass::Diverges => Some(Growth::Unbounded),
        SeriesClass::Unknown => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma33Report {
    pub checkpoints: Vec<u64>,
    /// `ln` energy of normalized Lebesgue measure on `F`.
    pub energy_log: Vec<f64>,
    /// `ln` Shepp partial sums.
    pub shepp_log: Vec<f64>,
    pub energy_growth: Growth,
    pub shepp_growth: Growth,
    /// Closed-form verdict on the Shepp side, shared by both sides.
    pub analytic: SeriesClass,
    /// Both readings decisive, equal, and equal to the analytic verdict
    /// when there is one.
    pub consistent: bool,
}

/// Evaluate both sides of the energy/Shepp equivalence for `|F| > 0`.
pub fn lemma33_equiv(
    seq: &LengthSequence,
    a: f64,
    f: &ArcSet,
    checkpoints: &[u64],
) -> Result<Lemma33Report> {
    if !(f.measure() > 0.0) {
        return Err(Error::Precondition("the set must have positive length".into()));
    }
    let sigma = SupportMeasure::lebesgue(f.clone())?;
    let energy_log = energy_ladder(seq, a, &sigma, checkpoints)?;
    let shepp_log: Vec<f64> = shepp_partials(seq, a, checkpoints)?
        .into_iter()
        .map(|v| v.log)
        .collect();
    let energy_growth = classify_ladder(&energy_log);
    let shepp_growth = classify_ladder(&shepp_log);
    let analytic = shepp_classify(seq, a);
    let consistent = energy_growth == shepp_growth
        && energy_growth != Growth::Inconclusive
        && growth_of(analytic).is_none_or(|g| g == energy_growth);
    Ok(Lemma33Report {
        checkpoints: checkpoints.to_vec(),
        energy_log,
        shepp_log,
        energy_growth,
        shepp_growth,
        analytic,
        consistent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CapEvidence {
    /// Every tested measure has unbounded energy: evidence for capacity 0.
    DivergesForTestedMeasures { tested: Vec<String> },
    /// A measure with bounded energy: evidence for positive capacity.
    FiniteWitness {
        sigma: SupportMeasure,
        energy_log: f64,
    },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapCandidate {
    pub label: String,
    pub energy_log: Vec<f64>,
    pub growth: Growth,
    /// Closed-form verdict where one applies (atoms: `sum l_n`).
    pub analytic: Option<Growth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapReport {
    pub truncations: Vec<u64>,
    pub evidence: CapEvidence,
    pub candidates: Vec<CapCandidate>,
    pub caveat: String,
}

/// Most components that get their own atom candidate.
const MAX_ATOM_CANDIDATES: usize = 8;
const GRID_LEVEL: u32 = 5;

fn candidates(f: &ArcSet) -> Vec<SupportMeasure> {
    let mut out = Vec::new();
    if f.measure() > 0.0 {
        out.push(SupportMeasure::lebesgue(f.clone()).expect("positive length"));
        if let Ok(g) = SupportMeasure::dyadic_grid(f, GRID_LEVEL) {
            out.push(g);
        }
    }
    for arc in f.arcs().into_iter().take(MAX_ATOM_CANDIDATES) {
        out.push(SupportMeasure::atom(arc.midpoint()));
    }
    if f.len() > 1 {
        let pts: Vec<f64> = f.arcs().iter().map(|a| a.midpoint()).collect();
        out.push(SupportMeasure::uniform_atoms(pts).expect("nonempty"));
    }
    out
}

/// Search a fixed family of measures on `F` for one of bounded energy.
///
/// The test is one-sided: a finite witness is evidence of positive
/// capacity, while divergence for every candidate says nothing about
/// measures outside the family.
pub fn cap_zero_heuristic(
    seq: &LengthSequence,
    a: f64,
    f: &ArcSet,
    truncations: &[u64],
) -> Result<CapReport> {
    if f.is_empty() {
        return Err(Error::Precondition("the set must be nonempty".into()));
    }
    let atom_class = growth_of(if a == 0.0 {
        SeriesClass::Converges
    } else {
        sum_classify(seq)
    });
    let mut cands = Vec::new();
    let mut witness = None;
    for sigma in candidates(f) {
        let logs = energy_ladder(seq, a, &sigma, truncations)?;
        let growth = classify_ladder(&logs);
        let analytic = match &sigma {
            SupportMeasure::Atoms { .. } => atom_class,
            _ => None,
        };
        let decided = analytic.unwrap_or(growth);
        if decided == Growth::Bounded && witness.is_none() {
            witness = Some((sigma.clone(), *logs.last().expect("nonempty ladder")));
        }
        cands.push(CapCandidate {
            label: sigma.label(),
            energy_log: logs,
            growth,
            analytic,
        });
    }
    let evidence = if let Some((sigma, energy_log)) = witness {
        CapEvidence::FiniteWitness { sigma, energy_log }
    } else if cands
        .iter()
        .all(|c| c.analytic.unwrap_or(c.growth) == Growth::Unbounded)
    {
        CapEvidence::DivergesForTestedMeasures {
            tested: cands.iter().map(|c| c.label.clone()).collect(),
        }
    } else {
        CapEvidence::Inconclusive {
            reason: "no candidate bounded and not all readings unbounded".into(),
        }
    };
    Ok(CapReport {
        truncations: truncations.to_vec(),
        evidence,
        candidates: cands,
        caveat: "one-sided test over a finite family of measures; divergence for the \
                 tested measures is evidence, not proof, of capacity zero"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::Arc;

    const SHORT: [u64; 3] = [1_000, 10_000, 100_000];

    fn half() -> ArcSet {
        ArcSet::from_arc(Arc::new(0.0, 0.5).unwrap())
    }

    #[test]
    fn energy_matches_shepp_at_critical_harmonic() {
        let seq = LengthSequence::harmonic(2.0).unwrap();
        let r = lemma33_equiv(&seq, 0.5, &half(), &SHORT).unwrap();
        assert_eq!(r.analytic, SeriesClass::Diverges);
        assert_eq!(r.energy_growth, Growth::Unbounded, "{r:?}");
        assert_eq!(r.shepp_growth, Growth::Unbounded);
        assert!(r.consistent);
    }

    #[test]
    fn zero_intensity_is_bounded() {
        let seq = LengthSequence::harmonic(1.0).unwrap();
        let r = lemma33_equiv(&seq, 0.0, &ArcSet::full(), &SHORT).unwrap();
        assert!(r.energy_log.iter().all(|l| l.abs() < 1e-12));
        assert_eq!(r.energy_growth, Growth::Bounded);
        assert!(lemma33_equiv(&seq, 0.5, &ArcSet::from_points([0.2]), &SHORT).is_err());
    }

    #[test]
    fn point_set_capacity() {
        let pt = ArcSet::from_points([0.3]);
        let harm = LengthSequence::harmonic(1.0).unwrap();
        let r = cap_zero_heuristic(&harm, 1.0, &pt, &SHORT).unwrap();
        assert!(matches!(r.evidence, CapEvidence::DivergesForTestedMeasures { .. }));
        let sq = LengthSequence::power(1.0, 2.0).unwrap();
        let r = cap_zero_heuristic(&sq, 1.0, &pt, &SHORT).unwrap();
        assert!(matches!(r.evidence, CapEvidence::FiniteWitness { .. }));
        let r = cap_zero_heuristic(&harm, 0.0, &pt, &SHORT).unwrap();
        assert!(matches!(r.evidence, CapEvidence::FiniteWitness { .. }));
    }
}
