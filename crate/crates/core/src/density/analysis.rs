//! Essential infimum set, flatness and the pointwise series of `mu_f(B(x, r_n))`.

use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::circle::{wrap, Arc};
use crate::error::{domain, Result};
use crate::sequences::{ell2_classify, sum_classify, LengthSequence, SeriesClass};
use crate::summation::CompensatedSum;

use super::PiecewisePolyDensity;

/// Three-valued answer for conditions that may not be decidable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dom1 {
    pub status: TriState,
    /// A point with `E^bar_f = m_f`, when one exists.
    pub witness: Option<f64>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityAnalysis {
    pub m_f: f64,
    pub ess_sup: f64,
    pub k_f: ArcSet,
    pub dom1: Dom1,
    pub translate_offsets: Option<Vec<f64>>,
}

impl DensityAnalysis {
    pub fn new(f: &PiecewisePolyDensity) -> Self {
        let k_f = compute_kf(f);
        let m_f = f.ess_inf();
        let mut a = Self {
            m_f,
            ess_sup: f.ess_sup(),
            k_f,
            dom1: Dom1 {
                status: TriState::Unknown,
                witness: None,
                warning: None,
            },
            translate_offsets: None,
        };
        a.dom1 = dom1_check(f, &a);
        a
    }

    pub fn with_translates(mut self, offsets: Vec<f64>) -> Self {
        self.translate_offsets = Some(offsets);
        self
    }
}

/// `v` equals the minimum `m` up to the rounding of the piece arithmetic.
#[inline]
fn attains(v: f64, m: f64) -> bool {
    v - m <= 4.0 * f64::EPSILON * m.abs()
}

/// `E_f(x)`: the smaller one-sided limit.
pub fn local_ess_inf(f: &PiecewisePolyDensity, x: f64) -> f64 {
    let (l, r) = f.one_sided(x);
    l.min(r)
}

/// `E^bar_f(x)`: the larger one-sided limit.
pub fn local_ess_sup(f: &PiecewisePolyDensity, x: f64) -> f64 {
    let (l, r) = f.one_sided(x);
    l.max(r)
}

/// `K_f = { x : E_f(x) = m_f }`: closures of pieces constant at `m_f` plus
/// endpoints where an affine piece reaches `m_f`.
pub fn compute_kf(f: &PiecewisePolyDensity) -> ArcSet {
    let m = f.ess_inf();
    let mut linear = Vec::new();
    for p in f.pieces() {
        let (s, e) = (attains(p.start_value(), m), attains(p.end_value(), m));
        if s && e {
            linear.push([p.from, p.to]);
        } else if s {
            linear.push([p.from, p.from]);
        } else if e {
            linear.push([p.to, p.to]);
        }
    }
    ArcSet::from_linear(linear)
}

/// Condition `lim E^bar_f(x_n) = m_f` for some sequence `x_n`.
///
/// For affine pieces the infimum of `E^bar_f` over the open piece is its
/// smaller endpoint value, so the condition always holds; a witness point is
/// reported when `E^bar_f` attains `m_f`.
pub fn dom1_check(f: &PiecewisePolyDensity, analysis: &DensityAnalysis) -> Dom1 {
    let m = analysis.m_f;
    let inf_sup = f
        .pieces()
        .iter()
        .map(|p| p.min_value())
        .fold(f64::INFINITY, f64::min);
    let status = if attains(inf_sup, m) {
        TriState::Yes
    } else {
        TriState::No
    };
    let witness = analysis
        .k_f
        .sample_points(3)
        .into_iter()
        .find(|&x| attains(local_ess_sup(f, x), m));
    let warning = f
        .origin()
        .filter(|o| o.starts_with("fatcantor"))
        .map(|o| {
            format!(
                "{o}: finite-depth surrogate; the infinite-depth limit has K_f = {{0}} and \
                 E^bar_f >= 1 everywhere, so the condition fails there"
            )
        });
    Dom1 {
        status,
        witness,
        warning,
    }
}

/// Local shape of `f - level` around `x`.
struct LocalShape {
    /// `(f(x-) - level, f(x+) - level)`.
    jump: (f64, f64),
    /// Slopes of `f` moving away from `x` on each side.
    slope_away: (f64, f64),
    /// Distance to the far end of each adjacent piece.
    reach: (f64, f64),
}

fn local_shape(f: &PiecewisePolyDensity, x: f64, level: f64) -> LocalShape {
    let (reach_l, reach_r, il, ir) = f.adjacent_reach(x);
    let (vl, vr) = f.one_sided(x);
    LocalShape {
        jump: (vl - level, vr - level),
        slope_away: (-f.pieces()[il].c1, f.pieces()[ir].c1),
        reach: (reach_l, reach_r),
    }
}

/// Evidence on `sum_n int_{B(x, r_n)} (f - level)` for `level <= f` near `x`.
struct SeriesVerdict {
    class: SeriesClass,
    /// `C` with every term `<= C r_n^2`.
    bound_constant: Option<f64>,
    /// `kappa` with terms `>= kappa * l_n` (or `kappa * r_n^2`) eventually.
    witness_constant: Option<f64>,
    reason: String,
}

fn classify_at_level(
    f: &PiecewisePolyDensity,
    x: f64,
    level: f64,
    lengths: &LengthSequence,
) -> SeriesVerdict {
    let shape = local_shape(f, x, level);
    let sum_l = sum_classify(lengths);
    let ell2 = ell2_classify(lengths);
    let sup_gap = f.ess_sup() - level;

    let mut out = SeriesVerdict {
        class: SeriesClass::Unknown,
        bound_constant: None,
        witness_constant: None,
        reason: String::new(),
    };

    // Lipschitz-dominant: f - level <= C |t - x| on the whole circle
    let flat_both = shape.jump.0 <= 0.0 && shape.jump.1 <= 0.0;
    if flat_both {
        let near = shape.slope_away.0.max(shape.slope_away.1).max(0.0);
        let reach = shape.reach.0.min(shape.reach.1).min(0.5);
        out.bound_constant = Some(near.max(sup_gap / reach));
    }

    if let LengthSequence::Constant { l } = lengths {
        let term = f.ball_excess(x, 0.5 * l, level).abs();
        out.class = if term > 0.0 {
            SeriesClass::Diverges
        } else {
            SeriesClass::Converges
        };
        out.reason = format!("constant lengths: every term equals {term:e}");
        return out;
    }

    if sum_l == SeriesClass::Converges {
        out.class = SeriesClass::Converges;
        out.reason = format!("terms <= {sup_gap:e} * l_n and sum l_n converges");
        return out;
    }

    if !flat_both {
        let kappa = 0.25 * (shape.jump.0.max(0.0) + shape.jump.1.max(0.0));
        out.witness_constant = Some(kappa);
        out.class = sum_l;
        out.reason = format!(
            "one-sided limits exceed the level by {:e}/{:e}: terms >= {kappa:e} * l_n eventually",
            shape.jump.0, shape.jump.1
        );
        return out;
    }

    let (sl, sr) = (shape.slope_away.0.max(0.0), shape.slope_away.1.max(0.0));
    if sl == 0.0 && sr == 0.0 {
        out.class = SeriesClass::Converges;
        out.reason = "f equals the level on a neighborhood: terms vanish once r_n < reach".into();
        return out;
    }
    let kappa = 0.25 * (sl + sr);
    out.witness_constant = Some(kappa);
    out.class = ell2;
    out.reason = format!(
        "Lipschitz at the level: kappa r_n^2 <= term <= C r_n^2 with kappa = {kappa:e}, C = {:e}",
        out.bound_constant.unwrap_or(f64::NAN)
    );
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub x: f64,
    pub checkpoints: Vec<u64>,
    /// `sum_{n <= N} |mu_f(B(x, r_n)) - m_f l_n|` at each checkpoint.
    pub partial_sums: Vec<f64>,
    pub classification: SeriesClass,
    pub bound_constant: Option<f64>,
    pub witness_constant: Option<f64>,
    pub reason: String,
}

fn partials_at_level(
    f: &PiecewisePolyDensity,
    x: f64,
    level: f64,
    lengths: &LengthSequence,
    checkpoints: &[u64],
) -> Result<Vec<f64>> {
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.first() == Some(&0) {
        return Err(domain("checkpoints must be positive and strictly increasing"));
    }
    let mut acc = CompensatedSum::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut n = 0;
    for &cp in checkpoints {
        while n < cp {
            n += 1;
            let r = 0.5 * lengths.length(n)?;
            acc.add(f.ball_excess(x, r, level).abs());
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Partial sums of the flatness series at `x` and its classification.
pub fn flatness_partial(
    f: &PiecewisePolyDensity,
    analysis: &DensityAnalysis,
    x: f64,
    lengths: &LengthSequence,
    checkpoints: &[u64],
) -> Result<FlatnessReport> {
    let x = wrap(x);
    let partial_sums = partials_at_level(f, x, analysis.m_f, lengths, checkpoints)?;
    let v = classify_at_level(f, x, analysis.m_f, lengths);
    Ok(FlatnessReport {
        x,
        checkpoints: checkpoints.to_vec(),
        partial_sums,
        classification: v.class,
        bound_constant: v.bound_constant,
        witness_constant: v.witness_constant,
        reason: v.reason,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelCantelli {
    pub x: f64,
    pub n: u64,
    /// `sum_{n <= N} mu_f(B(x, r_n))`.
    pub partial_sum: f64,
    pub classification: SeriesClass,
    pub reason: String,
}

/// `sum_n mu_f(B(x, r_n))`: divergence means `x` is covered infinitely often.
pub fn borel_cantelli_point(
    f: &PiecewisePolyDensity,
    x: f64,
    lengths: &LengthSequence,
    n: u64,
) -> Result<BorelCantelli> {
    if n == 0 {
        return Err(domain("N must be >= 1"));
    }
    let x = wrap(x);
    let partial = partials_at_level(f, x, 0.0, lengths, &[n])?[0];
    let v = classify_at_level(f, x, 0.0, lengths);
    Ok(BorelCantelli {
        x,
        n,
        partial_sum: partial,
        classification: v.class,
        reason: v.reason,
    })
}

/// The part of `K_f` where the flatness series converges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSet {
    /// Closure of the flat part: arcs of `K_f` whose interior is flat, plus
    /// isolated flat points.
    pub closure: ArcSet,
    /// Endpoints of `closure` that are not flat.
    pub excluded: Vec<f64>,
    /// Points whose series could not be classified.
    pub undecided: Vec<f64>,
}

impl FlatSet {
    pub fn contains(&self, x: f64) -> bool {
        let x = wrap(x);
        self.closure.contains(x) && !self.excluded.contains(&x)
    }
}

/// `F_f cap K_f`. Interiors of pieces constant at `m_f` are flat; endpoints
/// and isolated points of `K_f` are classified one by one.
pub fn flat_part_of_kf(
    f: &PiecewisePolyDensity,
    analysis: &DensityAnalysis,
    lengths: &LengthSequence,
) -> FlatSet {
    let m = analysis.m_f;
    let mut linear = Vec::new();
    let mut excluded = Vec::new();
    let mut undecided = Vec::new();
    for arc in analysis.k_f.arcs() {
        let ends = if arc.is_point() {
            vec![arc.start]
        } else if arc.is_full() {
            vec![]
        } else {
            vec![arc.start, wrap(arc.end())]
        };
        if !arc.is_point() {
            let (first, second) = arc.linear_pieces();
            linear.push(first);
            if let Some(s) = second {
                linear.push(s);
            }
        }
        for x in ends {
            match classify_at_level(f, x, m, lengths).class {
                SeriesClass::Converges => linear.push([x, x]),
                SeriesClass::Diverges if !arc.is_point() => excluded.push(x),
                SeriesClass::Diverges => {}
                SeriesClass::Unknown => {
                    undecided.push(x);
                    if !arc.is_point() {
                        excluded.push(x);
                    }
                }
            }
        }
    }
    FlatSet {
        closure: ArcSet::from_linear(linear),
        excluded,
        undecided,
    }
}

/// Components shorter than this count as points after translation.
const SLIVER: f64 = 1e-12;

/// Whether `K_f minus the union of (a_n + F)` is countable, for `F` the flat set
/// and offsets `a_n` (the identity translate is always included).
///
/// Removing finitely many points never changes countability, so only the
/// closure of `F` matters; the remainder is countable exactly when it has
/// no component of positive length.
pub fn translate_countability(k_f: &ArcSet, flat: &FlatSet, offsets: &[f64]) -> bool {
    let mut rest = k_f.clone();
    for &a in std::iter::once(&0.0).chain(offsets) {
        for arc in flat.closure.arcs().iter().filter(|a| !a.is_point()) {
            let moved = Arc::new(wrap(arc.start + a), arc.length).expect("valid arc");
            rest = rest.subtract(&moved);
        }
    }
    rest.arcs().iter().all(|a| a.length <= SLIVER)
}
