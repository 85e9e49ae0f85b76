//! Covering verdicts assembled from the density and series modules.
//!
//! The routes are tried in order:
//! 1. a point of `K_f` with `sum mu(B(x, r_n)) < inf` is covered only finitely
//!    often, so the circle is not covered whatever the hypotheses;
//! 2. constant lengths `l`: covered iff no arc where `f = 0` is `l` long;
//! 3. `l_n = c/n`: covered iff `c m_f >= 1`, with no regularity needed;
//! 4. `f = m_f` on an open arc: covered iff the Shepp series diverges at `m_f`;
//! 5. the two-case criterion (`m_f = 0` with countable `K_f`, or `m_f > 0` with
//!    the translate condition), which needs `dom_1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::capacity::{cap_zero_heuristic, CapEvidence, CapReport};
use crate::density::{
    borel_cantelli_point, flat_part_of_kf, flatness_partial, translate_countability, DensityAnalysis, Dom1,
    FlatSet, PiecewisePolyDensity, TriState,
};
use crate::error::Result;
use crate::sequences::{shepp_classify, sum_classify, LengthSequence, SeriesClass};

/// Step above `m_f` used to probe `for all a > m_f`.
const ABOVE_PROBE: f64 = 1e-9;
/// Interior samples per arc of `K_f`.
const SAMPLES_PER_ARC: usize = 3;
/// Partial-sum horizon of the pointwise series.
const POINT_HORIZON: u64 = 10_000;
/// Energy ladder used when no closed form decides the capacity.
const CAP_LADDER: [u64; 3] = [1_000, 10_000, 100_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Covered,
    NotCovered,
    HypothesesUnmet,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Covered => "covered",
            Verdict::NotCovered => "not-covered",
            Verdict::HypothesesUnmet => "hypotheses-unmet",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    BorelCantelli,
    ConstantLengths,
    HarmonicThreshold,
    FlatInterval,
    ZeroInfimum,
    PositiveInfimum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSeries {
    pub x: f64,
    pub class: SeriesClass,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheppRow {
    pub a: f64,
    pub class: SeriesClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitySummary {
    /// `Cap_{Phi^(m_f)}(F_f cap K_f) = 0`.
    pub zero: TriState,
    pub reason: String,
    /// Numeric search, run only when no closed form applies.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub evidence: Option<CapReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub density: String,
    pub lengths: String,
    pub m_f: f64,
    pub k_f: ArcSet,
    pub k_f_countable: bool,
    pub dom1: Dom1,
    pub flatness: Vec<PointSeries>,
    pub borel_cantelli: Vec<PointSeries>,
    pub shepp: Vec<SheppRow>,
    pub shepp_at_m: SeriesClass,
    /// Divergence for every `a > m_f`.
    pub shepp_above_m: SeriesClass,
    pub flat_set: FlatSet,
    pub translate_countable: bool,
    pub capacity: CapacitySummary,
    pub route: Option<Route>,
    pub verdict: Verdict,
    /// Human-readable account of how the verdict was reached.
    pub trail: Vec<String>,
}

fn density_label(f: &PiecewisePolyDensity) -> String {
    match f.origin() {
        Some(o) => o.to_string(),
        None => format!("piecewise[{}]", f.pieces().len()),
    }
}

/// Whether `l_n = c/n` eventually, with `c`.
fn harmonic_constant(seq: &LengthSequence) -> Option<f64> {
    match seq {
        LengthSequence::Harmonic { c } => Some(*c),
        LengthSequence::Power { a, t } if *t == 1.0 => Some(*a),
        LengthSequence::Explicit { tail: Some(t), .. } => harmonic_constant(t),
        _ => None,
    }
}

/// Class of `sum l_n` when `m_f`-energy of an atom is the question.
fn point_capacity_zero(seq: &LengthSequence, m: f64) -> SeriesClass {
    if m == 0.0 {
        SeriesClass::Converges
    } else {
        sum_classify(seq)
    }
}

fn from_class(c: SeriesClass) -> TriState {
    match c {
        SeriesClass::Diverges => TriState::Yes,
        SeriesClass::Converges => TriState::No,
        SeriesClass::Unknown => TriState::Unknown,
    }
}

fn capacity_summary(seq: &LengthSequence, m: f64, flat: &FlatSet) -> Result<CapacitySummary> {
    let arcs = flat.closure.arcs();
    let has_arc = arcs.iter().any(|a| !a.is_point());
    let has_point = arcs.iter().any(|a| a.is_point());
    if arcs.is_empty() {
        return Ok(CapacitySummary {
            zero: TriState::Yes,
            reason: "F_f cap K_f is empty".into(),
            evidence: None,
        });
    }
    let mut parts = Vec::new();
    let mut reason = Vec::new();
    if has_arc {
        let c = shepp_classify(seq, m);
        reason.push(format!("arcs: energy of Lebesgue measure {} with the Shepp series at m_f", c));
        parts.push(from_class(c));
    }
    if has_point {
        let c = point_capacity_zero(seq, m);
        reason.push(format!("points: atom energy exp(m_f S_N) with sum l_n {c}"));
        parts.push(from_class(c));
    }
    if !flat.undecided.is_empty() {
        reason.push(format!("{} points of K_f have undecided flatness", flat.undecided.len()));
        parts.push(TriState::Unknown);
    }
    let zero = if parts.contains(&TriState::No) {
        TriState::No
    } else if parts.iter().all(|p| *p == TriState::Yes) {
        TriState::Yes
    } else {
        TriState::Unknown
    };
    let mut evidence = None;
    let mut zero_out = zero;
    if zero == TriState::Unknown && seq.last_index().is_none() {
        let rep = cap_zero_heuristic(seq, m, &flat.closure, &CAP_LADDER)?;
        if let CapEvidence::FiniteWitness { .. } = rep.evidence {
            zero_out = TriState::No;
            reason.push("numeric search found a measure of bounded energy".into());
        }
        evidence = Some(rep);
    }
    Ok(CapacitySummary {
        zero: zero_out,
        reason: reason.join("; "),
        evidence,
    })
}

/// The covering verdict for `f` and `seq`, with every ingredient.
pub fn criteria_report(f: &PiecewisePolyDensity, seq: &LengthSequence, a_list: &[f64]) -> Result<CriteriaReport> {
    let analysis = DensityAnalysis::new(f);
    let m = analysis.m_f;
    let k_f = analysis.k_f.clone();
    let k_f_countable = k_f.is_finite_point_set();
    let samples = k_f.sample_points(SAMPLES_PER_ARC);
    let horizon = seq.last_index().map_or(POINT_HORIZON, |l| l.min(POINT_HORIZON));
    let cps = [horizon];
    let mut flatness = Vec::with_capacity(samples.len());
    let mut borel_cantelli = Vec::with_capacity(samples.len());
    for &x in &samples {
        let fr = flatness_partial(f, &analysis, x, seq, &cps)?;
        flatness.push(PointSeries {
            x: fr.x,
            class: fr.classification,
            partial_sum: fr.partial_sums[0],
        });
        let bc = borel_cantelli_point(f, x, seq, horizon)?;
        borel_cantelli.push(PointSeries {
            x: bc.x,
            class: bc.classification,
            partial_sum: bc.partial_sum,
        });
    }
    let shepp = a_list
        .iter()
        .map(|&a| SheppRow {
            a,
            class: shepp_classify(seq, a),
        })
        .collect();
    let shepp_at_m = shepp_classify(seq, m);
    let shepp_above_m = shepp_classify(seq, m + ABOVE_PROBE * m.max(1.0));
    let flat_set = flat_part_of_kf(f, &analysis, seq);
    let translate_countable = translate_countability(&k_f, &flat_set, analysis.translate_offsets.as_deref().unwrap_or(&[]));
    let capacity = capacity_summary(seq, m, &flat_set)?;

    let mut trail = vec![
        format!("m_f = {m}"),
        format!("K_f has {} component(s), measure {}", k_f.len(), k_f.measure()),
        format!("dom_1: {:?}", analysis.dom1.status),
        format!("Shepp at m_f {shepp_at_m}; for all a > m_f {shepp_above_m}"),
    ];
    let (route, verdict) = decide(
        f,
        seq,
        &analysis,
        k_f_countable,
        &borel_cantelli,
        shepp_at_m,
        shepp_above_m,
        translate_countable,
        &capacity,
        &mut trail,
    );
    Ok(CriteriaReport {
        density: density_label(f),
        lengths: seq.to_string(),
        m_f: m,
        k_f,
        k_f_countable,
        dom1: analysis.dom1.clone(),
        flatness,
        borel_cantelli,
        shepp,
        shepp_at_m,
        shepp_above_m,
        flat_set,
        translate_countable,
        capacity,
        route,
        verdict,
        trail,
    })
}

fn by_class(c: SeriesClass) -> Verdict {
    match c {
        SeriesClass::Diverges => Verdict::Covered,
        SeriesClass::Converges => Verdict::NotCovered,
        SeriesClass::Unknown => Verdict::Inconclusive,
    }
}

#[allow(clippy::too_many_arguments)]
fn decide(
    f: &PiecewisePolyDensity,
    seq: &LengthSequence,
    analysis: &DensityAnalysis,
    k_f_countable: bool,
    borel_cantelli: &[PointSeries],
    shepp_at_m: SeriesClass,
    shepp_above_m: SeriesClass,
    translate_countable: bool,
    capacity: &CapacitySummary,
    trail: &mut Vec<String>,
) -> (Option<Route>, Verdict) {
    let m = analysis.m_f;
    if let Some(p) = borel_cantelli.iter().find(|p| p.class == SeriesClass::Converges) {
        trail.push(format!("sum mu(B(x, r_n)) converges at x = {}: covered finitely often", p.x));
        return (Some(Route::BorelCantelli), Verdict::NotCovered);
    }
    if let Some(LengthSequence::Constant { l }) = seq.asymptotic() {
        let longest_gap = if m > 0.0 {
            0.0
        } else {
            analysis.k_f.arcs().iter().map(|a| a.length).fold(0.0, f64::max)
        };
        let v = if longest_gap < *l { Verdict::Covered } else { Verdict::NotCovered };
        trail.push(format!("constant lengths {l}: longest zero arc {longest_gap} gives {v}"));
        return (Some(Route::ConstantLengths), v);
    }
    if let Some(c) = harmonic_constant(seq) {
        let v = if c * m >= 1.0 { Verdict::Covered } else { Verdict::NotCovered };
        trail.push(format!("l_n = c/n with c m_f = {}: {v} iff c m_f >= 1", c * m));
        return (Some(Route::HarmonicThreshold), v);
    }
    let flat_piece = f
        .pieces()
        .iter()
        .any(|p| p.c1 == 0.0 && p.c0 == m && p.to > p.from);
    if flat_piece {
        let v = by_class(shepp_at_m);
        trail.push(format!("f = m_f on an open arc: Shepp at m_f {shepp_at_m} gives {v}"));
        return (Some(Route::FlatInterval), v);
    }
    match analysis.dom1.status {
        TriState::Yes => {}
        TriState::No => {
            trail.push("dom_1 fails".into());
            return (None, Verdict::HypothesesUnmet);
        }
        TriState::Unknown => {
            trail.push("dom_1 undecided".into());
            return (None, Verdict::Inconclusive);
        }
    }
    if m == 0.0 {
        if !k_f_countable {
            trail.push("m_f = 0 but K_f is uncountable".into());
            return (None, Verdict::HypothesesUnmet);
        }
        // K_f is finite here, so the samples are all of it
        let all_div = borel_cantelli.iter().all(|p| p.class == SeriesClass::Diverges);
        let cond0 = if all_div {
            SeriesClass::Diverges
        } else {
            SeriesClass::Unknown
        };
        trail.push(format!("every point of K_f: sum mu(B(x, r_n)) {cond0}"));
        let v = match (cond0, shepp_above_m) {
            (_, SeriesClass::Converges) => Verdict::NotCovered,
            (SeriesClass::Diverges, SeriesClass::Diverges) => Verdict::Covered,
            _ => Verdict::Inconclusive,
        };
        return (Some(Route::ZeroInfimum), v);
    }
    if !translate_countable {
        trail.push("K_f minus the translates of F_f cap K_f is uncountable".into());
        return (None, Verdict::HypothesesUnmet);
    }
    trail.push(format!("Cap(F_f cap K_f) = 0: {:?} ({})", capacity.zero, capacity.reason));
    let v = match (shepp_above_m, capacity.zero) {
        (SeriesClass::Converges, _) | (_, TriState::No) => Verdict::NotCovered,
        (SeriesClass::Diverges, TriState::Yes) => Verdict::Covered,
        _ => Verdict::Inconclusive,
    };
    (Some(Route::PositiveInfimum), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{fat_cantor_density, step, tent, uniform};

    fn verdict(f: &PiecewisePolyDensity, s: LengthSequence) -> (Option<Route>, Verdict) {
        let r = criteria_report(f, &s, &[1.0]).unwrap();
        (r.route, r.verdict)
    }

    #[test]
    fn step_with_large_harmonic_is_covered() {
        let f = step(0.5, 1.5, 0.5).unwrap();
        let r = verdict(&f, LengthSequence::harmonic(2.5).unwrap());
        assert_eq!(r, (Some(Route::HarmonicThreshold), Verdict::Covered));
        let r = verdict(&f, LengthSequence::harmonic(1.6).unwrap());
        assert_eq!(r.1, Verdict::NotCovered);
    }

    #[test]
    fn tent_with_summable_lengths_fails_at_zero() {
        let r = criteria_report(&tent(), &LengthSequence::power(1.0, 2.0).unwrap(), &[1.0]).unwrap();
        assert_eq!(r.verdict, Verdict::NotCovered);
        assert_eq!(r.route, Some(Route::BorelCantelli));
        assert_eq!(r.borel_cantelli[0].x, 0.0);
    }

    #[test]
    fn uniform_reduces_to_shepp() {
        let f = uniform();
        assert_eq!(verdict(&f, LengthSequence::log_harmonic()).1, Verdict::Covered);
        assert_eq!(verdict(&f, LengthSequence::constant(0.3).unwrap()).1, Verdict::Covered);
    }

    #[test]
    fn step_with_logharmonic_is_not_covered() {
        let f = step(0.5, 1.5, 0.5).unwrap();
        let r = verdict(&f, LengthSequence::log_harmonic());
        assert_eq!(r, (Some(Route::FlatInterval), Verdict::NotCovered));
    }

    #[test]
    fn tent_goes_through_the_positive_case() {
        let r = criteria_report(&tent(), &LengthSequence::log_harmonic(), &[]).unwrap();
        assert_eq!(r.route, Some(Route::PositiveInfimum));
        assert_eq!(r.verdict, Verdict::Covered);
    }

    #[test]
    fn fat_cantor_tail_decides() {
        let f = fat_cantor_density(2).unwrap();
        let r = criteria_report(&f, &LengthSequence::power(1.0, 0.5).unwrap(), &[]).unwrap();
        assert!(!r.k_f_countable);
        assert_eq!((r.route, r.verdict), (Some(Route::FlatInterval), Verdict::Covered));
        let r = criteria_report(&f, &LengthSequence::harmonic(0.5).unwrap(), &[]).unwrap();
        assert_eq!((r.route, r.verdict), (Some(Route::HarmonicThreshold), Verdict::NotCovered));
        let r = criteria_report(&f, &LengthSequence::constant(0.3).unwrap(), &[]).unwrap();
        assert_eq!((r.route, r.verdict), (Some(Route::ConstantLengths), Verdict::Covered));
    }

    #[test]
    fn uncountable_zero_set_without_flat_piece_is_refused() {
        let f = tent();
        let mut analysis = DensityAnalysis::new(&f);
        analysis.m_f = 0.0;
        let seq = LengthSequence::power(1.0, 0.5).unwrap();
        let cap = CapacitySummary {
            zero: TriState::Yes,
            reason: String::new(),
            evidence: None,
        };
        let mut trail = Vec::new();
        let d = decide(&f, &seq, &analysis, false, &[], SeriesClass::Diverges, SeriesClass::Diverges, true, &cap, &mut trail);
        assert_eq!(d, (None, Verdict::HypothesesUnmet));
    }
}
