//! Partial sums and closed-form classification of the series criteria.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::summation::{CompensatedSum, LogSumExp, LogValue};

use super::{LengthSequence, SeriesClass, LOG_HARMONIC_START};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `H_n = 1 + 1/2 + ... + 1/n`.
pub fn harmonic_number(n: u64) -> f64 {
    if n <= 256 {
        return (1..=n).rev().map(|k| 1.0 / k as f64).collect::<CompensatedSum>().value();
    }
    let x = n as f64;
    let x2 = x * x;
    x.ln() + EULER_GAMMA + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2)
}

fn check_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(domain("no checkpoints given"));
    }
    if checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("checkpoints must be positive and strictly increasing"));
    }
    Ok(())
}

/// `sum_{n <= N} n^-2 exp(a S_n)` for each checkpoint `N`, in log space.
pub fn shepp_partials(seq: &LengthSequence, a: f64, checkpoints: &[u64]) -> Result<Vec<LogValue>> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(domain(format!("intensity a = {a} must be >= 0")));
    }
    check_checkpoints(checkpoints)?;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut s = CompensatedSum::new();
    let mut acc = LogSumExp::new();
    let mut n = 0u64;
    for &cp in checkpoints {
        while n < cp {
            n += 1;
            s.add(seq.length(n)?);
            acc.add_log(a * s.value() - 2.0 * (n as f64).ln());
        }
        out.push(LogValue::from_log(acc.log_value()));
    }
    Ok(out)
}

/// Shepp partial sum through `N`.
pub fn shepp_partial(seq: &LengthSequence, a: f64, n: u64) -> Result<LogValue> {
    Ok(shepp_partials(seq, a, &[n])?[0])
}

/// Convergence of `sum l_n`.
pub fn sum_classify(seq: &LengthSequence) -> SeriesClass {
    use LengthSequence::*;
    match seq.asymptotic() {
        Some(Power { t, .. }) if *t > 1.0 => SeriesClass::Converges,
        Some(Harmonic { .. } | Power { .. } | Constant { .. } | LogHarmonic) => SeriesClass::Diverges,
        // each block contributes ln n_k
        Some(BlockA { .. } | BlockB { .. }) => SeriesClass::Diverges,
        _ => SeriesClass::Unknown,
    }
}

/// Convergence of `sum l_n^2`.
pub fn ell2_classify(seq: &LengthSequence) -> SeriesClass {
    use LengthSequence::*;
    match seq.asymptotic() {
        Some(Harmonic { .. } | LogHarmonic | BlockA { .. } | BlockB { .. }) => SeriesClass::Converges,
        Some(Power { t, .. }) if *t > 0.5 => SeriesClass::Converges,
        Some(Power { .. } | Constant { .. }) => SeriesClass::Diverges,
        _ => SeriesClass::Unknown,
    }
}

/// Convergence of `sum n^-2 exp(a S_n)` from the family's closed form.
pub fn shepp_classify(seq: &LengthSequence, a: f64) -> SeriesClass {
    use LengthSequence::*;
    if !(a >= 0.0 && a.is_finite()) {
        return SeriesClass::Unknown;
    }
    let Some(fam) = seq.asymptotic() else {
        return SeriesClass::Unknown;
    };
    if a == 0.0 {
        return SeriesClass::Converges;
    }
    match fam {
        // S_n = c ln n + O(1)
        Harmonic { c } => {
            if a * c >= 1.0 {
                SeriesClass::Diverges
            } else {
                SeriesClass::Converges
            }
        }
        Power { t, .. } if *t > 1.0 => SeriesClass::Converges,
        Power { .. } | Constant { .. } => SeriesClass::Diverges,
        // terms behave like 1 / (n^(2 - 2a) ln^(4a) n)
        LogHarmonic => {
            if a > 0.5 {
                SeriesClass::Diverges
            } else {
                SeriesClass::Converges
            }
        }
        BlockB { schedule } => match schedule.c() {
            Some(c) if a * c >= 1.0 => SeriesClass::Diverges,
            _ => SeriesClass::Unknown,
        },
        BlockA { .. } | Explicit { .. } => SeriesClass::Unknown,
    }
}

fn log_harmonic_s15() -> f64 {
    (1..LOG_HARMONIC_START)
        .map(|n| LengthSequence::LogHarmonic.length(n).expect("defined"))
        .collect::<CompensatedSum>()
        .value()
}

/// Upper bound on `sum_{n > N} n^-2 exp(a S_n)` from the closed form, when
/// the family converges at `a`.
pub fn shepp_tail_bound(seq: &LengthSequence, a: f64, n: u64) -> Option<f64> {
    use LengthSequence::*;
    if n == 0 || shepp_classify(seq, a) != SeriesClass::Converges {
        return None;
    }
    let x = n as f64;
    if a == 0.0 {
        return Some(1.0 / x);
    }
    // explicit prefixes shift S_n by a bounded amount we do not track
    if !matches!(seq, Harmonic { .. } | Power { .. } | LogHarmonic) {
        return None;
    }
    match seq {
        // S_n <= c (ln n + 1)
        Harmonic { c } => {
            let p = a * c;
            Some(p.exp() * x.powf(p - 1.0) / (1.0 - p))
        }
        // S_n <= a0 zeta(t) <= a0 t / (t - 1)
        Power { a: a0, t } => Some((a * a0 * t / (t - 1.0)).exp() / x),
        // S_n <= B + 2 ln n - 4 ln ln n for n >= 16
        LogHarmonic => {
            if n < LOG_HARMONIC_START {
                return None;
            }
            let b = log_harmonic_s15() - 2.0 * 15f64.ln() + 4.0 * 16f64.ln().ln();
            if a == 0.5 {
                Some((0.5 * b).exp() / x.ln())
            } else {
                Some((a * b).exp() * x.powf(2.0 * a - 1.0) / (1.0 - 2.0 * a))
            }
        }
        _ => None,
    }
}

/// `n l_n / S_n`.
pub fn s2_ratio(seq: &LengthSequence, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("s2 ratio needs n >= 1"));
    }
    let mut s = CompensatedSum::new();
    let mut last = 0.0;
    for i in 1..=n {
        last = seq.length(i)?;
        s.add(last);
    }
    Ok(n as f64 * last / s.value())
}

/// Analytic status of `limsup n l_n / S_n < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S2Class {
    Holds,
    Fails,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct S2Report {
    /// `(n, n l_n / S_n)` at each evaluable checkpoint.
    pub ratios: Vec<(u64, f64)>,
    /// Lower bounds on the ratio at block boundaries (block families only).
    pub block_boundaries: Vec<(usize, f64)>,
    /// Largest observed ratio.
    pub max_ratio: f64,
    /// Exact limsup when the family determines it.
    pub limsup: Option<f64>,
    pub class: S2Class,
}

/// Ratios at the checkpoints plus the family's limsup.
pub fn s2_limsup_estimate(seq: &LengthSequence, checkpoints: &[u64]) -> Result<S2Report> {
    use LengthSequence::*;
    check_checkpoints(checkpoints)?;
    let mut ratios = Vec::new();
    let mut s = CompensatedSum::new();
    let mut n = 0u64;
    'outer: for &cp in checkpoints {
        let mut last = 0.0;
        while n < cp {
            match seq.length(n + 1) {
                Ok(l) => {
                    n += 1;
                    last = l;
                    s.add(l);
                }
                Err(_) => break 'outer,
            }
        }
        if last == 0.0 {
            last = seq.length(n)?;
        }
        ratios.push((n, n as f64 * last / s.value()));
    }
    let block_boundaries: Vec<(usize, f64)> = match seq {
        BlockA { schedule } | BlockB { schedule } => schedule
            .blocks
            .iter()
            .enumerate()
            .filter_map(|(k, b)| b.s2_end.map(|r| (k + 1, r)))
            .collect(),
        _ => Vec::new(),
    };
    let max_ratio = ratios
        .iter()
        .map(|r| r.1)
        .chain(block_boundaries.iter().map(|r| r.1))
        .fold(0.0, f64::max);
    let (limsup, class) = match seq.asymptotic() {
        Some(Harmonic { .. } | LogHarmonic) => (Some(0.0), S2Class::Holds),
        Some(Power { t, .. }) if *t > 1.0 => (Some(0.0), S2Class::Holds),
        Some(Power { t, .. }) => (Some(1.0 - t), S2Class::Holds),
        Some(Constant { .. } | BlockA { .. } | BlockB { .. }) => (Some(1.0), S2Class::Fails),
        _ => (None, S2Class::Unknown),
    };
    Ok(S2Report {
        ratios,
        block_boundaries,
        max_ratio,
        limsup,
        class,
    })
}

/// Indices with `l_n > n^(-2/3)`, the witnesses that force Shepp divergence
/// when `sum l_n^2` diverges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma34Witness {
    pub searched: u64,
    pub count: u64,
    /// Up to 32 witnesses `(n, ln(n^-2 exp(a S_n)))`, the latest kept.
    pub samples: Vec<(u64, f64)>,
    /// Log of the Shepp partial through `searched`.
    pub shepp_log_partial: f64,
    pub ell2: SeriesClass,
    pub shepp: SeriesClass,
}

pub fn lemma34_check(seq: &LengthSequence, a: f64, n_max: u64) -> Result<Lemma34Witness> {
    const KEEP: usize = 32;
    if n_max == 0 {
        return Err(domain("search range must be nonempty"));
    }
    let mut s = CompensatedSum::new();
    let mut acc = LogSumExp::new();
    let mut count = 0;
    let mut samples = std::collections::VecDeque::with_capacity(KEEP);
    for n in 1..=n_max {
        let l = seq.length(n)?;
        s.add(l);
        let x = n as f64;
        let log_term = a * s.value() - 2.0 * x.ln();
        acc.add_log(log_term);
        if l > x.powf(-2.0 / 3.0) {
            count += 1;
            if samples.len() == KEEP {
                samples.pop_front();
            }
            samples.push_back((n, log_term));
        }
    }
    Ok(Lemma34Witness {
        searched: n_max,
        count,
        samples: samples.into_iter().collect(),
        shepp_log_partial: acc.log_value(),
        ell2: ell2_classify(seq),
        shepp: shepp_classify(seq, a),
    })
}

/// Partial sums and classifications of every series criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub sequence: String,
    pub checkpoints: Vec<u64>,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
    /// Per intensity: `(a, log Shepp partials, classification)`.
    pub shepp: Vec<(f64, Vec<f64>, SeriesClass)>,
    pub s2: Vec<f64>,
    pub sum_class: SeriesClass,
    pub ell2_class: SeriesClass,
    pub s2_class: S2Class,
}

pub fn diagnostics(seq: &LengthSequence, a_list: &[f64], checkpoints: &[u64]) -> Result<SeriesDiagnostics> {
    check_checkpoints(checkpoints)?;
    let mut sum = Vec::new();
    let mut sum_sq = Vec::new();
    let mut s2 = Vec::new();
    let mut s = CompensatedSum::new();
    let mut q = CompensatedSum::new();
    let mut accs: Vec<LogSumExp> = vec![LogSumExp::new(); a_list.len()];
    let mut logs: Vec<Vec<f64>> = vec![Vec::new(); a_list.len()];
    let mut n = 0u64;
    let mut last = 0.0;
    for &cp in checkpoints {
        while n < cp {
            n += 1;
            last = seq.length(n)?;
            s.add(last);
            q.add(last * last);
            let ln_n2 = 2.0 * (n as f64).ln();
            for (acc, &a) in accs.iter_mut().zip(a_list) {
                acc.add_log(a * s.value() - ln_n2);
            }
        }
        sum.push(s.value());
        sum_sq.push(q.value());
        s2.push(n as f64 * last / s.value());
        for (l, acc) in logs.iter_mut().zip(&accs) {
            l.push(acc.log_value());
        }
    }
    Ok(SeriesDiagnostics {
        sequence: seq.to_string(),
        checkpoints: checkpoints.to_vec(),
        sum,
        sum_sq,
        shepp: a_list
            .iter()
            .zip(logs)
            .map(|(&a, l)| (a, l, shepp_classify(seq, a)))
            .collect(),
        s2,
        sum_class: sum_classify(seq),
        ell2_class: ell2_classify(seq),
        s2_class: s2_limsup_estimate(seq, &checkpoints[..1])?.class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(c: f64) -> LengthSequence {
        LengthSequence::harmonic(c).unwrap()
    }

    #[test]
    fn zero_intensity_is_basel_partial() {
        let p = shepp_partial(&harmonic(1.0), 0.0, 10).unwrap();
        let direct: f64 = (1..=10).map(|n| 1.0 / (n * n) as f64).sum();
        assert!((p.value().unwrap() - 1.549_767_731_166_540_7).abs() < 1e-14);
        assert!((p.value().unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn shepp_matches_direct_summation() {
        let seq = harmonic(0.8);
        let p = shepp_partial(&seq, 1.3, 1000).unwrap().value().unwrap();
        let mut s = 0.0;
        let mut direct = 0.0;
        for n in 1..=1000u64 {
            s += seq.length(n).unwrap();
            direct += (1.3 * s).exp() / (n * n) as f64;
        }
        assert!((p - direct).abs() / direct < 1e-9);
    }

    #[test]
    fn closed_form_classifications() {
        assert_eq!(shepp_classify(&harmonic(2.0), 0.5), SeriesClass::Diverges);
        assert_eq!(shepp_classify(&harmonic(0.75), 1.0), SeriesClass::Converges);
        let lh = LengthSequence::log_harmonic();
        assert_eq!(shepp_classify(&lh, 0.5), SeriesClass::Converges);
        assert_eq!(shepp_classify(&lh, 0.6), SeriesClass::Diverges);
        let c = LengthSequence::constant(0.3).unwrap();
        assert_eq!(shepp_classify(&c, 0.01), SeriesClass::Diverges);
        assert_eq!(ell2_classify(&c), SeriesClass::Diverges);
        assert_eq!(ell2_classify(&harmonic(3.0)), SeriesClass::Converges);
        let e = LengthSequence::explicit(vec![0.5], None).unwrap();
        assert_eq!(shepp_classify(&e, 1.0), SeriesClass::Unknown);
    }

    #[test]
    fn s2_ratio_for_harmonic_is_inverse_harmonic_number() {
        let r = s2_ratio(&harmonic(0.3), 10_000).unwrap();
        let want = 1.0 / harmonic_number(10_000);
        assert!((r - want).abs() < 1e-12);
        assert!((r - 0.1021).abs() < 1e-4);
    }

    #[test]
    fn s2_constant_is_one() {
        let c = LengthSequence::constant(0.3).unwrap();
        assert!((s2_ratio(&c, 77).unwrap() - 1.0).abs() < 1e-14);
        let rep = s2_limsup_estimate(&c, &[10, 100]).unwrap();
        assert_eq!(rep.class, S2Class::Fails);
    }

    #[test]
    fn harmonic_number_asymptotic_agrees_with_sum() {
        let exact: f64 = (1..=1000u64).rev().map(|k| 1.0 / k as f64).sum();
        assert!((harmonic_number(1000) - exact).abs() < 1e-13);
    }

    #[test]
    fn ell2_witnesses_for_constant_sequence() {
        let c = LengthSequence::constant(0.3).unwrap();
        let w = lemma34_check(&c, 0.1, 100).unwrap();
        // 0.3 > n^(-2/3) from n = 7 on
        assert_eq!(w.count, 94);
        assert_eq!(w.ell2, SeriesClass::Diverges);
        assert_eq!(w.shepp, SeriesClass::Diverges);
        let h = lemma34_check(&harmonic(1.0), 1.0, 1000).unwrap();
        // 1/n > n^(-2/3) never holds past n = 1
        assert_eq!(h.count, 0);
    }

    #[test]
    fn tail_bounds_dominate_computed_tails() {
        for (seq, a) in [
            (harmonic(0.75), 1.0),
            (LengthSequence::log_harmonic(), 0.5),
            (LengthSequence::log_harmonic(), 0.3),
            (LengthSequence::power(1.0, 2.0).unwrap(), 1.0),
        ] {
            let p = shepp_partials(&seq, a, &[1000, 100_000]).unwrap();
            let tail = p[1].value().unwrap() - p[0].value().unwrap();
            let bound = shepp_tail_bound(&seq, a, 1000).unwrap();
            assert!(tail <= bound, "{seq} a={a}: {tail} > {bound}");
        }
    }

    #[test]
    fn diagnostics_partials_are_monotone() {
        let d = diagnostics(&harmonic(1.0), &[0.5, 1.0], &[10, 100, 1000]).unwrap();
        assert!(d.sum.windows(2).all(|w| w[1] >= w[0]));
        assert!(d.sum_sq.windows(2).all(|w| w[1] >= w[0]));
        for (_, logs, _) in &d.shepp {
            assert!(logs.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
