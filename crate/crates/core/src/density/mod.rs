//! Piecewise affine densities on the circle and their exact integrals.

pub mod analysis;
pub mod builders;
pub mod spec_file;

use serde::{Deserialize, Serialize};

use crate::circle::{wrap, Arc};
use crate::error::{construction, domain, Result};
use crate::summation::CompensatedSum;

pub use analysis::{
    borel_cantelli_point, compute_kf, dom1_check, flat_part_of_kf, flatness_partial,
    local_ess_inf, local_ess_sup, translate_countability, BorelCantelli, DensityAnalysis, Dom1,
    FlatSet, FlatnessReport, TriState,
};
pub use builders::{fat_cantor_density, step, tent, uniform, MAX_FAT_CANTOR_DEPTH};
pub use spec_file::{density_to_toml, load_density, parse_density, parse_density_text, DensityFile};

/// Tolerance on `int f = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// `c0 + c1 * (x - from)` on `[from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    pub c0: f64,
    pub c1: f64,
}

impl Piece {
    #[inline]
    fn len(&self) -> f64 {
        self.to - self.from
    }

    /// Value at local coordinate `t = x - from`.
    #[inline]
    fn at(&self, t: f64) -> f64 {
        self.c0 + self.c1 * t
    }

    fn start_value(&self) -> f64 {
        self.c0
    }

    fn end_value(&self) -> f64 {
        self.at(self.len())
    }

    fn min_value(&self) -> f64 {
        self.start_value().min(self.end_value())
    }

    fn max_value(&self) -> f64 {
        self.start_value().max(self.end_value())
    }

    /// `int_{t0}^{t1} (f - level)` in local coordinates.
    #[inline]
    fn excess(&self, t0: f64, t1: f64, level: f64) -> f64 {
        let g0 = (self.c0 - level) + self.c1 * t0;
        let g1 = (self.c0 - level) + self.c1 * t1;
        0.5 * (t1 - t0) * (g0 + g1)
    }

    /// `int_0^t f`.
    #[inline]
    fn mass_to(&self, t: f64) -> f64 {
        t * (self.c0 + 0.5 * self.c1 * t)
    }
}

/// A probability density on `[0, 1)` given by affine pieces.
///
/// The pieces tile `[0, 1)` in order; a piece entered across 0 in a spec is
/// split there. `origin` tags densities whose analysis carries caveats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePolyDensity {
    pieces: Vec<Piece>,
    /// `cum[i] = int_0^{pieces[i].from} f`, with a final entry `= 1`.
    cum: Vec<f64>,
    origin: Option<String>,
}

/// Input piece as it appears in spec files: `poly = [c0]` or `[c0, c1]` in
/// the local coordinate `x - from`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub from: f64,
    pub to: f64,
    pub poly: Vec<f64>,
}

impl PiecewisePolyDensity {
    /// Build from pieces covering one full turn of the circle, contiguous
    /// and increasing. The first `from` may be any real; the pieces are
    /// reduced mod 1 and cut at 0.
    pub fn from_specs(specs: &[PieceSpec]) -> Result<Self> {
        let mut raw = Vec::with_capacity(specs.len());
        for s in specs {
            let (c0, c1) = match s.poly.as_slice() {
                [c0] => (*c0, 0.0),
                [c0, c1] => (*c0, *c1),
                _ => {
                    return Err(construction(format!(
                        "piece [{}, {}): poly must have 1 or 2 coefficients",
                        s.from, s.to
                    )))
                }
            };
            raw.push(Piece {
                from: s.from,
                to: s.to,
                c0,
                c1,
            });
        }
        Self::from_pieces(raw)
    }

    pub fn from_pieces(raw: Vec<Piece>) -> Result<Self> {
        Self::build(raw, None)
    }

    pub(crate) fn build(raw: Vec<Piece>, origin: Option<String>) -> Result<Self> {
        if raw.is_empty() {
            return Err(construction("density needs at least one piece"));
        }
        for p in &raw {
            if ![p.from, p.to, p.c0, p.c1].iter().all(|v| v.is_finite()) {
                return Err(construction("piece parameters must be finite"));
            }
            if !(p.to > p.from) {
                return Err(construction(format!("piece [{}, {}) is empty", p.from, p.to)));
            }
        }
        for w in raw.windows(2) {
            if w[1].from != w[0].to {
                return Err(construction(format!(
                    "pieces not contiguous at {} / {}",
                    w[0].to, w[1].from
                )));
            }
        }
        let span = raw[raw.len() - 1].to - raw[0].from;
        if (span - 1.0).abs() > 1e-12 {
            return Err(construction(format!("pieces span {span}, not one full turn")));
        }
        // shift so the first piece starts in [0, 1), then cut at 1
        let shift = raw[0].from.floor();
        let mut low = Vec::new();
        let mut high = Vec::new();
        for p in raw {
            let (a, b) = (p.from - shift, p.to - shift);
            if b <= 1.0 {
                low.push(Piece { from: a, to: b, ..p });
            } else if a >= 1.0 {
                high.push(Piece {
                    from: a - 1.0,
                    to: b - 1.0,
                    ..p
                });
            } else {
                low.push(Piece { from: a, to: 1.0, ..p });
                high.push(Piece {
                    from: 0.0,
                    to: b - 1.0,
                    c0: p.c0 + p.c1 * (1.0 - a),
                    c1: p.c1,
                });
            }
        }
        high.extend(low);
        let mut pieces: Vec<Piece> = high.into_iter().filter(|p| p.to > p.from).collect();
        pieces[0].from = 0.0;
        let n = pieces.len();
        pieces[n - 1].to = 1.0;
        for p in &pieces {
            if p.start_value() < 0.0 || p.end_value() < 0.0 {
                return Err(construction(format!(
                    "density negative on [{}, {})",
                    p.from, p.to
                )));
            }
        }
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = CompensatedSum::new();
        cum.push(0.0);
        for p in &pieces {
            acc.add(p.mass_to(p.len()));
            cum.push(acc.value());
        }
        let total = acc.value();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(construction(format!("density integrates to {total}, not 1")));
        }
        cum[n] = 1.0;
        Ok(Self { pieces, cum, origin })
    }

    /// Rescale nonnegative pieces to unit mass.
    pub fn normalized(raw: Vec<Piece>, origin: Option<String>) -> Result<Self> {
        let total: f64 = raw.iter().map(|p| p.mass_to(p.len())).collect::<CompensatedSum>().value();
        if !(total > 0.0 && total.is_finite()) {
            return Err(construction(format!("pieces have mass {total}")));
        }
        let scaled = raw
            .into_iter()
            .map(|p| Piece {
                c0: p.c0 / total,
                c1: p.c1 / total,
                ..p
            })
            .collect();
        Self::build(scaled, origin)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn origin(&self) -> Option<&str> {
        self.origin.as_deref()
    }

    /// Interior breakpoints plus 0.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().map(|p| p.from).collect()
    }

    pub fn specs(&self) -> Vec<PieceSpec> {
        self.pieces
            .iter()
            .map(|p| PieceSpec {
                from: p.from,
                to: p.to,
                poly: if p.c1 == 0.0 { vec![p.c0] } else { vec![p.c0, p.c1] },
            })
            .collect()
    }

    /// The piece containing `x in [0, 1)`.
    pub(crate) fn piece_at(&self, x: f64) -> &Piece {
        &self.pieces[self.piece_index(x)]
    }

    /// Index of the piece containing `x in [0, 1)`.
    #[inline]
    fn piece_index(&self, x: f64) -> usize {
        self.pieces.partition_point(|p| p.to <= x).min(self.pieces.len() - 1)
    }

    /// `f(x)`, right-continuous.
    pub fn value(&self, x: f64) -> f64 {
        let x = wrap(x);
        let p = &self.pieces[self.piece_index(x)];
        p.at(x - p.from)
    }

    /// `(f(x-), f(x+))`.
    pub fn one_sided(&self, x: f64) -> (f64, f64) {
        let x = wrap(x);
        let i = self.piece_index(x);
        let p = &self.pieces[i];
        let right = p.at(x - p.from);
        let left = if x == p.from {
            let q = &self.pieces[(i + self.pieces.len() - 1) % self.pieces.len()];
            q.end_value()
        } else {
            right
        };
        (left, right)
    }

    pub fn ess_inf(&self) -> f64 {
        self.pieces.iter().map(Piece::min_value).fold(f64::INFINITY, f64::min)
    }

    pub fn ess_sup(&self) -> f64 {
        self.pieces.iter().map(Piece::max_value).fold(0.0, f64::max)
    }

    /// `M(x) = int_0^x f` for `x in [0, 1]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let i = self.piece_index(x);
        let p = &self.pieces[i];
        self.cum[i] + p.mass_to(x - p.from)
    }

    /// `inf { t : M(t) >= u }`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(domain(format!("u = {u} outside [0, 1]")));
        }
        Ok(self.inverse_cdf_unchecked(u))
    }

    #[inline]
    pub(crate) fn inverse_cdf_unchecked(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        // first breakpoint with M >= u
        let j = self.cum.partition_point(|&c| c < u);
        if j < self.cum.len() && self.cum[j] == u {
            return if j < self.pieces.len() { self.pieces[j].from } else { 1.0 };
        }
        let i = j - 1;
        let p = &self.pieces[i];
        let v = u - self.cum[i];
        // solve c0 t + c1 t^2 / 2 = v for the smallest t >= 0
        let t = if p.c1 == 0.0 {
            v / p.c0
        } else {
            let disc = (p.c0 * p.c0 + 2.0 * p.c1 * v).max(0.0);
            2.0 * v / (p.c0 + disc.sqrt())
        };
        p.from + t.clamp(0.0, p.len())
    }

    /// `int_a^b (f - level)` over the real interval `[a, b]`, `b - a <= 1`,
    /// with `f` extended periodically.
    pub fn excess_over(&self, a: f64, b: f64, level: f64) -> f64 {
        debug_assert!(b >= a && b - a <= 1.0 + 1e-15);
        let k = a.floor();
        let (a, b) = (a - k, b - k);
        if b <= 1.0 {
            self.excess_linear(a, b, level)
        } else {
            self.excess_linear(a, 1.0, level) + self.excess_linear(0.0, b - 1.0, level)
        }
    }

    /// `int_a^b (f - level)` for `0 <= a <= b <= 1`.
    fn excess_linear(&self, a: f64, b: f64, level: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let i = self.piece_index(a);
        let j = self.piece_index(if b >= 1.0 { 1.0 - f64::EPSILON } else { b });
        let j = if b < 1.0 && self.pieces[j].from == b && j > i { j - 1 } else { j };
        let pi = &self.pieces[i];
        if i == j {
            return pi.excess(a - pi.from, b - pi.from, level);
        }
        let pj = &self.pieces[j];
        let head = pi.excess(a - pi.from, pi.len(), level);
        let tail = pj.excess(0.0, b - pj.from, level);
        let middle = if j > i + 1 {
            (self.cum[j] - self.cum[i + 1]) - level * (pj.from - pi.to)
        } else {
            0.0
        };
        head + middle + tail
    }

    /// `mu_f(arc)`.
    pub fn mass(&self, arc: &Arc) -> f64 {
        if arc.is_full() {
            return 1.0;
        }
        self.excess_over(arc.start, arc.end(), 0.0)
    }

    /// `mu_f(B(x, r))` for the open ball `(x - r, x + r)`, `0 < r < 1/2`.
    pub fn mu_ball(&self, x: f64, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 0.5) {
            return Err(domain(format!("radius {r} outside (0, 1/2)")));
        }
        Ok(self.mu_ball_unchecked(x, r))
    }

    #[inline]
    pub(crate) fn mu_ball_unchecked(&self, x: f64, r: f64) -> f64 {
        let x = wrap(x);
        self.excess_over(x - r, x + r, 0.0)
    }

    /// `mu_f(B(x, r)) - level * 2r`, computed without cancellation.
    pub(crate) fn ball_excess(&self, x: f64, r: f64, level: f64) -> f64 {
        let x = wrap(x);
        self.excess_over(x - r, x + r, level)
    }

    /// Essential infimum of `f` over a nondegenerate arc.
    pub fn ess_inf_interval(&self, arc: &Arc) -> Result<f64> {
        if arc.is_point() {
            return Err(domain("essential infimum over a null arc"));
        }
        if arc.is_full() {
            return Ok(self.ess_inf());
        }
        let (first, second) = arc.linear_pieces();
        let mut m = f64::INFINITY;
        for iv in std::iter::once(first).chain(second) {
            m = m.min(self.ess_inf_linear(iv[0], iv[1]));
        }
        Ok(m)
    }

    fn ess_inf_linear(&self, a: f64, b: f64) -> f64 {
        let mut m = f64::INFINITY;
        if b <= a {
            return m;
        }
        let i = self.piece_index(a);
        for p in &self.pieces[i..] {
            if p.from >= b {
                break;
            }
            let t0 = (a.max(p.from)) - p.from;
            let t1 = (b.min(p.to)) - p.from;
            if t1 > t0 {
                m = m.min(p.at(t0).min(p.at(t1)));
            }
        }
        m
    }

    /// Largest `r` such that `(x - r, x + r)` meets at most the two pieces
    /// adjacent to `x`.
    pub(crate) fn adjacent_reach(&self, x: f64) -> (f64, f64, usize, usize) {
        let x = wrap(x);
        let n = self.pieces.len();
        let i = self.piece_index(x);
        let p = &self.pieces[i];
        let (left_idx, left_reach) = if x == p.from {
            let q = (i + n - 1) % n;
            (q, self.pieces[q].len())
        } else {
            (i, x - p.from)
        };
        (left_reach, p.to - x, left_idx, i)
    }
}
