//! Gauss-Legendre rules on `[-1, 1]`.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point rule, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

pub(crate) struct Rules {
    pub low: (Vec<f64>, Vec<f64>),
    pub high: (Vec<f64>, Vec<f64>),
}

/// The 8- and 16-point rules; their difference is the error estimate.
pub(crate) fn rules() -> &'static Rules {
    static R: OnceLock<Rules> = OnceLock::new();
    R.get_or_init(|| Rules {
        low: gauss_legendre(8),
        high: gauss_legendre(16),
    })
}

/// `int_a^b f` with a rule.
pub(crate) fn apply(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let (h, m) = (0.5 * (b - a), 0.5 * (a + b));
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(&x, &w)| w * f(m + h * x))
        .sum::<f64>()
        * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 15 is exact for 8 points
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((i - 2.0 / 15.0).abs() < 1e-14);
        let r = rules();
        let v = apply(&r.high, 0.0, 1.0, &mut |t: f64| t.exp());
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }
}
