//! Small estimators shared by the experiments.

use serde::{Deserialize, Serialize};

use crate::summation::CompensatedSum;

/// Asymptotic 1% critical value of `sqrt(n) D_n`.
pub const KS_CRIT_1PCT: f64 = 1.628;

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).collect::<CompensatedSum>().value() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Kolmogorov-Smirnov distance between the sample and a continuous CDF.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of `D_n` for a sample of size `n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    KS_CRIT_1PCT / (n as f64).sqrt()
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub points: usize,
}

impl LinearFit {
    /// Half-width of the 95% normal interval on the slope.
    pub fn slope_ci95(&self) -> f64 {
        1.96 * self.slope_se
    }
}

pub fn ols(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_se,
        points: n,
    })
}

/// Fit of `ln y` against `ln n` over the pairs with `lo <= n <= hi` and `y > 0`.
pub fn loglog_fit(ns: &[u64], ys: &[f64], lo: u64, hi: u64) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(ys)
        .filter(|(&n, &y)| n >= lo && n <= hi && y > 0.0)
        .map(|(&n, &y)| ((n as f64).ln(), y.ln()))
        .unzip();
    ols(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let fit = ols(&x, &y).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-15 && (fit.intercept - 2.0).abs() < 1e-14);
        assert!(fit.slope_se < 1e-14);
        assert!(ols(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn loglog_of_power_law() {
        let ns = [10u64, 100, 1000, 10_000];
        let ys: Vec<f64> = ns.iter().map(|&n| 3.0 * (n as f64).powf(-0.7)).collect();
        let fit = loglog_fit(&ns, &ys, 100, 10_000).unwrap();
        assert_eq!(fit.points, 3);
        assert!((fit.slope + 0.7).abs() < 1e-12);
    }

    #[test]
    fn ks_of_perfect_grid_is_half_step() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_statistic(&xs, |x| x) - 0.005).abs() < 1e-12);
        assert!((ks_critical_1pct(10_000) - 0.01628).abs() < 1e-15);
    }

    #[test]
    fn mean_se_of_constant() {
        assert_eq!(mean_se(&[2.0, 2.0, 2.0]), (2.0, 0.0));
    }
}
