use dvoretzky::capacity::{energy, kernel_sum_brute, KernelPhi, SupportMeasure};
use dvoretzky::summation::{CompensatedSum, LogSumExp};
use dvoretzky::{ArcSet, Arc, LengthSequence};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = LengthSequence> {
    prop_oneof![
        (0.05f64..3.0).prop_map(|c| LengthSequence::harmonic(c).unwrap()),
        (0.1f64..2.0, 0.3f64..2.5).prop_map(|(a, t)| LengthSequence::power(a, t).unwrap()),
        (0.01f64..0.9).prop_map(|l| LengthSequence::constant(l).unwrap()),
        Just(LengthSequence::log_harmonic()),
    ]
}

/// `sum (l_n - u)_+` with every term exact and the positive terms summed
/// with compensation.
fn reference_kernel_sum(lengths: &[f64], u: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &l in lengths {
        if l > u {
            let d = l - u;
            let err = (l - d) - u;
            acc.add(d);
            acc.add(-err);
        }
    }
    acc.value()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_kernel_sum_is_exact(seq in family(), u in 0.0f64..0.5, n in 1u64..10_000) {
        let k = KernelPhi::new(&seq, 1.0, n).unwrap();
        let want = reference_kernel_sum(k.lengths(), u);
        let got = k.kernel_sum(u);
        prop_assert!((got - want).abs() <= 1e-12 * want, "{seq} u = {u} N = {n}: {got} vs {want}");
        let naive = kernel_sum_brute(k.lengths(), u);
        prop_assert!((naive - want).abs() <= 1e-9 * want.max(1e-300));
    }

    #[test]
    fn phi_is_symmetric_and_kernel_sum_decreasing(
        seq in family(),
        a in 0.0f64..3.0,
        t in 0.0f64..1.0,
        s in 0.0f64..1.0,
        u1 in 0.0f64..0.5,
        u2 in 0.0f64..0.5,
    ) {
        let k = KernelPhi::new(&seq, a, 2000).unwrap();
        prop_assert_eq!(k.log_phi(t, s), k.log_phi(s, t));
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        prop_assert!(k.kernel_sum(lo) >= k.kernel_sum(hi));
    }

    #[test]
    fn energy_grows_with_truncation_and_intensity(
        seq in family(),
        a in 0.0f64..2.0,
        da in 0.0f64..1.0,
        start in 0.0f64..1.0,
        len in 0.01f64..1.0,
    ) {
        let sigma = SupportMeasure::lebesgue(ArcSet::from_arc(Arc::new(start, len).unwrap())).unwrap();
        let e = |a: f64, n: u64| energy(&KernelPhi::new(&seq, a, n).unwrap(), &sigma).unwrap().log_value;
        let tol = 1e-12;
        prop_assert!(e(a, 100) <= e(a, 1000) + tol);
        prop_assert!(e(a, 1000) <= e(a + da, 1000) + tol);
    }

    #[test]
    fn atom_energy_is_the_weighted_double_sum(
        seq in family(),
        a in 0.0f64..2.0,
        pts in prop::collection::vec((0.0f64..1.0, 0.1f64..1.0), 1..6),
    ) {
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let (xs, ws): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, w)| (x, w / total)).unzip();
        let sigma = SupportMeasure::atoms(xs.clone(), ws.clone()).unwrap();
        let k = KernelPhi::new(&seq, a, 500).unwrap();
        let mut want = LogSumExp::new();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                want.add_log(ws[i].ln() + ws[j].ln() + k.log_phi(xs[i], xs[j]));
            }
        }
        let got = energy(&k, &sigma).unwrap().log_value;
        prop_assert!((got - want.log_value()).abs() <= 1e-12 * got.abs().max(1.0), "{got} vs {}", want.log_value());
    }
}
