//! Energy `int int Phi(t, s) dsigma(t) dsigma(s)` of a support measure.
//!
//! The double integral reduces to `int_0^{1/2} g(u) exp(a K(u)) du` where `g`
//! is the density of the circle distance between two independent draws and
//! `K(u) = sum (l_n - u)_+`. For the measures here `g` is piecewise linear and
//! `K` is affine between consecutive `l_n`, so each cell integrates in closed
//! form. Atom pairs contribute point masses of `g`.

use serde::{Deserialize, Serialize};

use crate::circle::circle_dist;
use crate::error::{Error, Result};
use crate::summation::{LogSumExp, LogValue, OVERFLOW_LOG};

use super::kernel::KernelPhi;
use super::measure::{Component, SupportMeasure};

/// Component pairs above this are refused rather than approximated.
pub const MAX_COMPONENT_PAIRS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub truncation: u64,
    pub a: f64,
    /// `ln` of the energy.
    pub log_value: f64,
    /// `ln` of rigorous bounds from the monotonicity of `K` on each cell.
    pub lower_log: f64,
    pub upper_log: f64,
    /// Number of integration cells.
    pub cells: usize,
}

impl EnergyEstimate {
    pub fn overflowed(&self) -> bool {
        self.log_value > OVERFLOW_LOG
    }

    /// The energy, `None` when flagged as overflowed.
    pub fn value(&self) -> Option<f64> {
        LogValue::from_log(self.log_value).value()
    }
}

/// `int_0^1 (1 - s) e^{-x s} ds`.
fn psi_a(x: f64) -> f64 {
    if x < 1.0 {
        let (mut term, mut sum) = (0.5, 0.0);
        for m in 0..24 {
            sum += term;
            term *= -x / (m as f64 + 3.0);
        }
        sum
    } else {
        (x - 1.0 + (-x).exp()) / (x * x)
    }
}

/// `int_0^1 s e^{-x s} ds`.
fn psi_b(x: f64) -> f64 {
    if x < 1.0 {
        // sum_m (-x)^m (m + 1) / (m + 2)!
        let (mut fact, mut sum) = (0.5, 0.0);
        for m in 0..24 {
            sum += fact * (m as f64 + 1.0);
            fact *= -x / (m as f64 + 3.0);
        }
        sum
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (x * x)
    }
}

/// Jump in value and slope of the distance density at `u`.
#[derive(Debug, Clone, Copy)]
struct Event {
    u: f64,
    jump: f64,
    dslope: f64,
}

/// Piecewise linear density of `d = t - s` on the real line, pushed to `u`.
struct DistanceDensity {
    events: Vec<Event>,
    /// `(u, weight)` point masses.
    atoms: Vec<(f64, f64)>,
}

impl DistanceDensity {
    fn new() -> Self {
        Self {
            events: Vec::new(),
            atoms: Vec::new(),
        }
    }

    fn push_u_piece(&mut self, u0: f64, u1: f64, v0: f64, v1: f64) {
        if u1 <= u0 {
            return;
        }
        let slope = (v1 - v0) / (u1 - u0);
        self.events.push(Event {
            u: u0,
            jump: v0,
            dslope: slope,
        });
        self.events.push(Event {
            u: u1,
            jump: -v1,
            dslope: -slope,
        });
    }

    /// Linear piece on `d in [x0, x1]`, `x1 - x0 <= 1`.
    fn push_d_piece(&mut self, x0: f64, x1: f64, v0: f64, v1: f64) {
        if x1 <= x0 {
            return;
        }
        let at = |x: f64| v0 + (v1 - v0) * ((x - x0) / (x1 - x0));
        let k = x0.floor();
        let (a, b) = (x0 - k, x1 - k);
        let mut parts = vec![(a, b.min(1.0), v0, if b > 1.0 { at(k + 1.0) } else { v1 })];
        if b > 1.0 {
            parts.push((0.0, b - 1.0, at(k + 1.0), v1));
        }
        for (p, q, vp, vq) in parts {
            // fold d in [1/2, 1] onto u = 1 - d
            let mid = |x: f64| vp + (vq - vp) * ((x - p) / (q - p));
            if q <= 0.5 {
                self.push_u_piece(p, q, vp, vq);
            } else if p >= 0.5 {
                self.push_u_piece(1.0 - q, 1.0 - p, vq, vp);
            } else {
                let vm = mid(0.5);
                self.push_u_piece(p, 0.5, vp, vm);
                self.push_u_piece(1.0 - q, 0.5, vq, vm);
            }
        }
    }

    fn add_pair(&mut self, ci: &Component, cj: &Component) {
        let w = ci.weight * cj.weight;
        if w == 0.0 {
            return;
        }
        let (li, lj) = (ci.length, cj.length);
        match (li > 0.0, lj > 0.0) {
            (false, false) => self.atoms.push((circle_dist(ci.start, cj.start), w)),
            (true, false) => {
                let x0 = ci.start - cj.start;
                self.push_d_piece(x0, x0 + li, w / li, w / li);
            }
            (false, true) => {
                let x0 = ci.start - cj.start - lj;
                self.push_d_piece(x0, x0 + lj, w / lj, w / lj);
            }
            (true, true) => {
                let c = ci.start - cj.start - lj;
                let (lo, hi) = (li.min(lj), li.max(lj));
                let peak = w / hi;
                self.push_d_piece(c, c + lo, 0.0, peak);
                self.push_d_piece(c + lo, c + hi, peak, peak);
                self.push_d_piece(c + hi, c + lo + hi, peak, 0.0);
            }
        }
    }
}

struct Accumulator {
    value: LogSumExp,
    lower: LogSumExp,
    upper: LogSumExp,
    cells: usize,
}

impl Accumulator {
    fn cell(&mut self, kernel: &KernelPhi, k: usize, u0: f64, u1: f64, g0: f64, g1: f64) {
        let (g0, g1) = (g0.max(0.0), g1.max(0.0));
        let w = u1 - u0;
        let mass = 0.5 * w * (g0 + g1);
        if !(mass > 0.0) {
            return;
        }
        let a = kernel.a;
        let k0 = a * kernel.affine_at(k, u0).max(0.0);
        let k1 = a * kernel.affine_at(k, u1).max(0.0);
        let x = a * k as f64 * w;
        let shape = w * (g0 * psi_a(x) + g1 * psi_b(x));
        self.value.add_log(k0 + shape.ln());
        self.lower.add_log(mass.ln() + k1);
        self.upper.add_log(mass.ln() + k0);
        self.cells += 1;
    }
}

/// Energy of `sigma` under the truncated kernel.
pub fn energy(kernel: &KernelPhi, sigma: &SupportMeasure) -> Result<EnergyEstimate> {
    let comps = sigma.components();
    if comps.len().saturating_mul(comps.len()) > MAX_COMPONENT_PAIRS {
        return Err(Error::Resolution(format!(
            "{} components exceed the pair budget; energy is inconclusive",
            comps.len()
        )));
    }
    let mut dd = DistanceDensity::new();
    for ci in &comps {
        for cj in &comps {
            dd.add_pair(ci, cj);
        }
    }
    let mut acc = Accumulator {
        value: LogSumExp::new(),
        lower: LogSumExp::new(),
        upper: LogSumExp::new(),
        cells: 0,
    };
    for &(u, w) in &dd.atoms {
        let log = w.ln() + kernel.a * kernel.kernel_sum(u);
        acc.value.add_log(log);
        acc.lower.add_log(log);
        acc.upper.add_log(log);
    }

    let mut events = dd.events;
    events.sort_by(|x, y| x.u.total_cmp(&y.u));
    let lengths = kernel.lengths();
    let mut k = kernel.count_above(0.0);
    let (mut u, mut g, mut slope) = (0.0f64, 0.0f64, 0.0f64);
    let mut ei = 0;
    while ei < events.len() && events[ei].u <= 0.0 {
        g += events[ei].jump;
        slope += events[ei].dslope;
        ei += 1;
    }
    while u < 0.5 {
        let next_event = events.get(ei).map_or(0.5, |e| e.u);
        let next_kink = if k > 0 { lengths[k - 1] } else { f64::INFINITY };
        let next = next_event.min(next_kink).min(0.5);
        let g_next = g + slope * (next - u);
        if next > u {
            acc.cell(kernel, k, u, next, g, g_next);
        }
        u = next;
        g = g_next;
        while k > 0 && lengths[k - 1] <= u {
            k -= 1;
        }
        while ei < events.len() && events[ei].u <= u {
            g += events[ei].jump;
            slope += events[ei].dslope;
            ei += 1;
        }
    }

    Ok(EnergyEstimate {
        truncation: kernel.n,
        a: kernel.a,
        log_value: acc.value.log_value(),
        lower_log: acc.lower.log_value(),
        upper_log: acc.upper.log_value(),
        cells: acc.cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcset::ArcSet;
    use crate::circle::Arc;
    use crate::sequences::LengthSequence;

    fn kernel(c: f64, a: f64, n: u64) -> KernelPhi {
        KernelPhi::new(&LengthSequence::harmonic(c).unwrap(), a, n).unwrap()
    }

    #[test]
    fn psi_series_meets_closed_form() {
        let x: f64 = 0.999_999;
        let a = (x - 1.0 + (-x).exp()) / (x * x);
        let b = (1.0 - (-x).exp() * (1.0 + x)) / (x * x);
        assert!((psi_a(x) - a).abs() < 1e-12);
        assert!((psi_b(x) - b).abs() < 1e-12);
        assert!((psi_a(0.0) - 0.5).abs() < 1e-16);
        assert!((psi_b(0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn single_atom_is_exp_a_s_n() {
        let k = kernel(1.0, 0.5, 1000);
        let e = energy(&k, &SupportMeasure::atom(0.3)).unwrap();
        assert_eq!(e.log_value, 0.5 * k.total());
        assert_eq!(e.lower_log, e.upper_log);
    }

    #[test]
    fn zero_intensity_gives_unit_energy() {
        let k = kernel(1.0, 0.0, 1000);
        let set = ArcSet::from_arcs([Arc::new(0.1, 0.2).unwrap(), Arc::new(0.6, 0.05).unwrap()]);
        let e = energy(&k, &SupportMeasure::lebesgue(set).unwrap()).unwrap();
        assert!(e.log_value.abs() < 1e-13, "{}", e.log_value);
    }

    /// Midpoint rule in both variables as an independent reference.
    fn brute_energy(k: &KernelPhi, arc: Arc, m: usize) -> f64 {
        let h = arc.length / m as f64;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                let t = arc.start + (i as f64 + 0.5) * h;
                let r = arc.start + (j as f64 + 0.5) * h;
                s += k.log_phi(t, r).exp();
            }
        }
        s / (m * m) as f64
    }

    #[test]
    fn arc_energy_matches_double_quadrature() {
        let k = kernel(1.0, 0.7, 40);
        let arc = Arc::new(0.8, 0.45).unwrap();
        let e = energy(&k, &SupportMeasure::lebesgue(ArcSet::from_arc(arc)).unwrap()).unwrap();
        let want = brute_energy(&k, arc, 1500);
        let got = e.log_value.exp();
        assert!((got - want).abs() < 2e-4 * want, "{got} vs {want}");
        assert!(e.lower_log <= e.log_value && e.log_value <= e.upper_log);
    }

    #[test]
    fn full_circle_mixed_atoms_and_cells() {
        let k = kernel(0.6, 1.3, 25);
        let grid = SupportMeasure::weighted_grid(vec![0.1, 0.7], vec![0.3, 0.7], 0.2).unwrap();
        let e = energy(&k, &grid).unwrap();
        // reference: midpoint samples of each cell
        let m = 600;
        let pts: Vec<(f64, f64)> = [(0.1, 0.3), (0.7, 0.7)]
            .iter()
            .flat_map(|&(p, w)| {
                (0..m).map(move |i| (p - 0.1 + 0.2 * (i as f64 + 0.5) / m as f64, w / m as f64))
            })
            .collect();
        let mut want = 0.0;
        for &(t, wt) in &pts {
            for &(s, ws) in &pts {
                want += wt * ws * k.log_phi(t, s).exp();
            }
        }
        let got = e.log_value.exp();
        assert!((got - want).abs() < 1e-4 * want, "{got} vs {want}");
    }

    #[test]
    fn energy_grows_with_truncation_and_intensity() {
        let set = ArcSet::from_arc(Arc::new(0.0, 0.5).unwrap());
        let sigma = SupportMeasure::lebesgue(set).unwrap();
        let e1 = energy(&kernel(2.0, 0.5, 1000), &sigma).unwrap();
        let e2 = energy(&kernel(2.0, 0.5, 10_000), &sigma).unwrap();
        let e3 = energy(&kernel(2.0, 0.6, 10_000), &sigma).unwrap();
        assert!(e1.log_value < e2.log_value && e2.log_value < e3.log_value);
    }
}
