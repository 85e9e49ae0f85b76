//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the terminal.

use std::time::Instant;

use dvoretzky::capacity::{energy, lemma33_equiv, KernelPhi, SupportMeasure};
use dvoretzky::coversim::{
    billard_moments, comparison_experiment, expected_uncovered_curve, log_checkpoints, run_coupled_trial, run_trial,
    run_trials, ComparisonSetup, CounterRng, CoupledModel, Target, TrialConfig, UncoveredSet, STREAM_CENTERS,
};
use dvoretzky::density::{flatness_partial, step, tent, uniform};
use dvoretzky::harness::write_jsonl;
use dvoretzky::sequences::{ell2_classify, shepp_classify, shepp_partials, shepp_tail_bound};
use dvoretzky::stats::{ks_critical_1pct, ks_statistic, loglog_fit, mean_se};
use dvoretzky::summation::CompensatedSum;
use dvoretzky::{Arc, ArcSet, DensityAnalysis, LengthSequence, PiecewisePolyDensity, SeriesClass};

type Outcome = Result<(bool, String), dvoretzky::Error>;

fn harmonic(c: f64) -> LengthSequence {
    LengthSequence::harmonic(c).unwrap()
}

fn arc(a: f64, b: f64) -> ArcSet {
    ArcSet::from_arc(Arc::from_endpoints(a, b).unwrap())
}

/// `|mean - want| <= 3 se`, with a floor for cells where every trial agrees.
fn within_3se(mean: f64, se: f64, want: f64) -> bool {
    (mean - want).abs() <= 3.0 * se + 1e-12
}

/// `prod_{n <= N} (1 - l_n)` by compensated log sums.
fn product_oracle(seq: &LengthSequence, ns: &[u64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    let mut out = Vec::new();
    let mut n = 0;
    for &cp in ns {
        while n < cp {
            n += 1;
            acc.add((-seq.length(n).unwrap()).ln_1p());
        }
        out.push(acc.value().exp());
    }
    out
}

fn phase_transition() -> Outcome {
    let start = Instant::now();
    let f = uniform();
    let exact_grid = log_checkpoints(8, 100_000);
    let mc_grid = log_checkpoints(2, 100_000);
    let mut ok = true;
    let mut notes = Vec::new();
    for c in [0.3, 0.5, 0.8] {
        let seq = harmonic(c);
        let exact: Vec<f64> = expected_uncovered_curve(&f, &seq, &exact_grid, &ArcSet::full())?
            .iter()
            .map(|e| e.value)
            .collect();
        let oracle = product_oracle(&seq, &exact_grid);
        let oracle_err = exact.iter().zip(&oracle).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
        let fit = loglog_fit(&exact_grid, &exact, 1_000, 100_000).expect("enough points");
        let cfg = TrialConfig {
            density: f.clone(),
            lengths: seq.clone(),
            n_max: 100_000,
            target: Target::Full,
            seed: 11,
            checkpoints: mc_grid.clone(),
        };
        let runs = run_trials(&cfg, 1024)?;
        let mc_exact = product_oracle(&seq, &mc_grid);
        let mut worst_z: f64 = 0.0;
        let mut mc_ok = true;
        for (k, want) in mc_exact.iter().enumerate() {
            let xs: Vec<f64> = runs.iter().map(|r| r.trajectory[k + 1].uncovered).collect();
            let (m, se) = mean_se(&xs);
            mc_ok &= within_3se(m, se, *want);
            if se > 1e-12 {
                worst_z = worst_z.max((m - want).abs() / se);
            }
        }
        let slope_ok = (fit.slope + c).abs() <= 0.05;
        ok &= slope_ok && mc_ok && oracle_err <= 1e-12;
        notes.push(format!("c={c}: slope {:.4}, max|z| {worst_z:.2}, oracle rel {oracle_err:.1e}", fit.slope));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    Ok((ok, format!("{}; {secs:.1}s", notes.join("; "))))
}

fn step_threshold() -> Outcome {
    let f = step(0.5, 1.5, 0.5)?;
    let k = arc(0.0, 0.5);
    let grid = log_checkpoints(4, 100_000);
    let mut ok = true;
    let mut notes = Vec::new();
    for c in [1.0, 1.6] {
        let exact: Vec<f64> = expected_uncovered_curve(&f, &harmonic(c), &grid, &k)?.iter().map(|e| e.value).collect();
        let fit = loglog_fit(&grid, &exact, 1_000, 100_000).expect("enough points");
        ok &= (fit.slope + c / 2.0).abs() <= 0.05;
        notes.push(format!("c={c}: slope {:.4} (want {})", fit.slope, -c / 2.0));
    }
    let points: Vec<f64> = (0..64).map(|i| i as f64 / 128.0).collect();
    let cfg = TrialConfig {
        density: f,
        lengths: harmonic(2.2),
        n_max: 1_000_000,
        target: Target::Points { points },
        seed: 22,
        checkpoints: vec![1_000_000],
    };
    let trials = 1000;
    let runs = run_trials(&cfg, trials)?;
    let covered = runs.iter().filter(|r| r.covered_by(1_000_000)).count() as f64 / trials as f64;
    ok &= covered > 0.99;
    notes.push(format!("c=2.2 grid cover frequency {covered:.3} over {trials} trials"));
    Ok((ok, notes.join("; ")))
}

/// Least growth of a divergent Shepp partial over the last decade. The
/// slowest pair, LogHarmonic at a = 0.6, gains about 6%.
const SHEPP_GROWTH_DELTA: f64 = 0.05;

fn shepp_pairs() -> Outcome {
    let pairs: [(LengthSequence, f64, SeriesClass); 6] = [
        (harmonic(0.75), 1.0, SeriesClass::Converges),
        (harmonic(0.75), 4.0 / 3.0, SeriesClass::Diverges),
        (LengthSequence::log_harmonic(), 0.5, SeriesClass::Converges),
        (LengthSequence::log_harmonic(), 0.6, SeriesClass::Diverges),
        (harmonic(2.5), 0.5, SeriesClass::Diverges),
        (LengthSequence::power(1.0, 2.0)?, 1.0, SeriesClass::Converges),
    ];
    let cps = [1_000, 10_000, 100_000];
    let mut ok = true;
    let mut notes = Vec::new();
    for (seq, a, want) in pairs {
        let class = shepp_classify(&seq, a);
        let logs: Vec<f64> = shepp_partials(&seq, a, &cps)?.iter().map(|v| v.log).collect();
        let ratio = (logs[2] - logs[1]).exp();
        let numeric = match want {
            SeriesClass::Diverges => logs[1] > logs[0] && ratio > 1.0 + SHEPP_GROWTH_DELTA,
            _ => shepp_tail_bound(&seq, a, 10_000).is_some_and(|t| logs[2].exp() - logs[1].exp() <= t),
        };
        ok &= class == want && numeric;
        notes.push(format!("{seq}@{a:.3}: {class}, S(1e5)/S(1e4) = {ratio:.4}"));
    }
    Ok((ok, notes.join(", ")))
}

fn reference_kernel_sum(lengths: &[f64], u: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for &l in lengths.iter().filter(|&&l| l > u) {
        let d = l - u;
        acc.add(d);
        acc.add(-((l - d) - u));
    }
    acc.value()
}

fn kernel_exactness() -> Outcome {
    let mut rng = CounterRng::new(44, STREAM_CENTERS);
    let families = [harmonic(1.0), harmonic(0.3), LengthSequence::power(0.8, 0.7)?, LengthSequence::log_harmonic()];
    let kernels: Vec<KernelPhi> = families.iter().map(|s| KernelPhi::new(s, 1.0, 10_000)).collect::<Result<_, _>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let kern = &kernels[i % kernels.len()];
        let n = 1 + (rng.next_uniform() * 10_000.0) as usize;
        let u = 0.5 * rng.next_uniform();
        let truncated = KernelPhi::new(&kern.seq, 1.0, n as u64)?;
        let want = reference_kernel_sum(&kern.lengths()[..n], u);
        let got = truncated.kernel_sum(u);
        let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
        worst = worst.max(rel);
    }
    let mut atoms_ok = true;
    for (seq, a) in [(harmonic(1.0), 0.7), (LengthSequence::log_harmonic(), 1.3), (harmonic(2.0), 0.25)] {
        let k = KernelPhi::new(&seq, a, 100_000)?;
        let s_n: f64 = seq.prefix(100_000)?.into_iter().collect::<CompensatedSum>().value();
        let e = energy(&k, &SupportMeasure::atom(0.37))?;
        atoms_ok &= e.log_value == a * k.total() && (e.log_value - a * s_n).abs() <= 1e-15 * e.log_value;
    }
    Ok((worst <= 1e-12 && atoms_ok, format!("1000 cases, worst relative error {worst:.1e}; atom energy = exp(a S_N): {atoms_ok}")))
}

fn energy_shepp() -> Outcome {
    let f = arc(0.0, 0.5);
    let pairs = [(harmonic(1.0), 0.5), (harmonic(2.0), 0.5), (harmonic(0.75), 1.0), (harmonic(0.75), 2.0)];
    let mut ok = true;
    let mut seen = Vec::new();
    let mut notes = Vec::new();
    for (seq, a) in pairs {
        let r = lemma33_equiv(&seq, a, &f, &[1_000, 10_000, 100_000])?;
        ok &= r.consistent && r.energy_growth == r.shepp_growth;
        seen.push(r.analytic);
        notes.push(format!("{seq}@{a}: energy {} / Shepp {}", r.energy_growth, r.shepp_growth));
    }
    ok &= seen.contains(&SeriesClass::Converges) && seen.contains(&SeriesClass::Diverges);
    Ok((ok, notes.join(", ")))
}

fn flatness() -> Outcome {
    let f = tent();
    let an = DensityAnalysis::new(&f);
    let seq = harmonic(1.0);
    let n_max = 500;
    let cps: Vec<u64> = (1..=n_max).collect();
    let rep = flatness_partial(&f, &an, 0.0, &seq, &cps)?;
    let mut worst: f64 = 0.0;
    let mut prev = 0.0;
    for (i, &s) in rep.partial_sums.iter().enumerate() {
        let r = 0.5 * seq.length(i as u64 + 1)?;
        worst = worst.max((s - prev - r * r).abs());
        prev = s;
    }
    let mut class_ok = true;
    let families = [
        harmonic(0.5),
        harmonic(3.0),
        LengthSequence::log_harmonic(),
        LengthSequence::power(1.0, 0.75)?,
        LengthSequence::power(0.5, 0.3)?,
        LengthSequence::constant(0.2)?,
    ];
    for seq in &families {
        let c = flatness_partial(&f, &an, 0.0, seq, &[10, 100])?.classification;
        if ell2_classify(seq) == SeriesClass::Converges {
            class_ok &= c == SeriesClass::Converges;
        }
    }
    Ok((worst <= 1e-12 && class_ok, format!("terms vs r_n^2 over n <= {n_max}: worst {worst:.1e}; classification follows sum l^2: {class_ok}")))
}

fn martingale() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let configs: [(&str, PiecewisePolyDensity, LengthSequence, SupportMeasure); 3] = [
        ("uniform/lebesgue", uniform(), harmonic(0.5), SupportMeasure::lebesgue(ArcSet::full())?),
        ("step/arc", step(0.5, 1.5, 0.5)?, harmonic(0.8), SupportMeasure::lebesgue(arc(0.1, 0.6))?),
        ("tent/two atoms", tent(), harmonic(0.3), SupportMeasure::uniform_atoms(vec![0.0, 0.3])?),
    ];
    for (name, f, seq, sigma) in configs {
        let m = billard_moments(&f, &seq, &sigma, 1_000, 10_000, 77)?;
        ok &= m.mean_within(3.0);
        notes.push(format!("{name}: E[M] = {:.4} ± {:.4}", m.mean, m.mean_se));
    }
    let seq = harmonic(0.5);
    let n = 1_000;
    let hand: f64 = (1..=n).map(|k| 1.0 / (1.0 - seq.length(k).unwrap())).product();
    let m = billard_moments(&uniform(), &seq, &SupportMeasure::atom(0.25), n, 10_000, 78)?;
    let exact = m.exact_second.unwrap_or(f64::NAN);
    let second_ok = (m.second - hand).abs() <= 3.0 * m.second_se && ((exact - hand) / hand).abs() <= 1e-10;
    ok &= second_ok && m.mean_within(3.0);
    notes.push(format!("atom E[M^2] = {:.2} ± {:.2} vs prod 1/(1-l_n) = {hand:.2}", m.second, m.second_se));
    Ok((ok, notes.join("; ")))
}

fn coupling() -> Outcome {
    let n = 100_000;
    let models = [
        ("step restricted to [0.1, 0.4]", step(0.5, 1.5, 0.5)?, CoupledModel::restriction(&step(0.5, 1.5, 0.5)?, &arc(0.1, 0.4))?),
        ("tent restricted to two arcs", tent(), CoupledModel::restriction(&tent(), &arc(0.0, 0.2).union(&arc(0.5, 0.8)))?),
        ("uniform mixed with tent", uniform(), CoupledModel::mixture(&uniform(), &tent(), 0.3)?),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, (name, f, model)) in models.iter().enumerate() {
        let xs = model.sample_centers(900 + i as u64, n);
        let d = ks_statistic(&xs, |x| f.cdf(x)) * (n as f64).sqrt();
        let crit = ks_critical_1pct(n as usize) * (n as f64).sqrt();
        ok &= d < crit;
        notes.push(format!("{name}: sqrt(n) D = {d:.3}"));
    }
    let f = step(0.5, 1.5, 0.5)?;
    let cfg = TrialConfig {
        density: f.clone(),
        lengths: harmonic(1.2),
        n_max: 20_000,
        target: Target::Full,
        seed: 5,
        checkpoints: log_checkpoints(8, 20_000),
    };
    let full = CoupledModel::restriction(&f, &ArcSet::full())?;
    let mut identical = true;
    for i in 0..20 {
        let c = cfg.for_trial(i);
        identical &= run_coupled_trial(&full, &c)?.trial == run_trial(&c)?;
    }
    ok &= identical;
    notes.push(format!("alpha_1 = 1 replays run_trial: {identical}"));
    Ok((ok, notes.join("; ")))
}

fn comparison() -> Outcome {
    let u = Arc::from_endpoints(0.1, 0.4).unwrap();
    let pairs = [
        ("uniform <= step", uniform(), step(1.5, 0.5, 0.5)?, arc(0.2, 0.3)),
        ("step <= uniform", step(0.5, 1.5, 0.5)?, uniform(), arc(0.2, 0.3)),
        ("step <= tent", step(0.5, 1.5, 0.5)?, tent(), ArcSet::from_points([0.25])),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, mu, nu, k) in pairs {
        let setup = ComparisonSetup {
            mu,
            nu,
            u,
            k,
            lengths: harmonic(0.5),
            checkpoints: vec![100, 1_000, 10_000],
        };
        let r = comparison_experiment(&setup, 400, 99)?;
        ok &= r.all_ordered(2.0);
        let last = r.rows.last().expect("rows");
        notes.push(format!("{name}: P_nu {:.3} vs P_mu {:.3} at N = {}", last.p_nu, last.p_mu, last.n));
    }
    Ok((ok, notes.join("; ")))
}

fn determinism_and_arcsets() -> Outcome {
    let cfg = TrialConfig {
        density: tent(),
        lengths: harmonic(0.9),
        n_max: 10_000,
        target: Target::Full,
        seed: 2024,
        checkpoints: log_checkpoints(8, 10_000),
    };
    let bytes = |threads: usize| -> Result<Vec<u8>, dvoretzky::Error> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool");
        let runs = pool.install(|| run_trials(&cfg, 64))?;
        let mut out = Vec::new();
        write_jsonl(&runs, &mut out)?;
        Ok(out)
    };
    let same = bytes(1)? == bytes(8)?;

    let mut rng = CounterRng::new(10, STREAM_CENTERS);
    let mut set = ArcSet::full();
    let mut unc = UncoveredSet::full();
    let mut worst: f64 = 0.0;
    let ops = 100_000;
    for _ in 0..ops {
        if set.measure() < 0.05 || set.len() > 200 {
            let mut arcs = Vec::new();
            for _ in 0..4 {
                arcs.push(Arc::new(rng.next_uniform(), 0.3 * rng.next_uniform()).unwrap());
            }
            set = ArcSet::from_arcs(arcs);
            unc = UncoveredSet::from_arcset(&set);
        }
        let cut = Arc::new(rng.next_uniform(), 0.05 * rng.next_uniform()).unwrap();
        let before = set.measure();
        let overlap = set.overlap_length(&cut);
        set = set.subtract(&cut);
        unc.remove_centered(cut.midpoint(), cut.length);
        worst = worst
            .max((set.measure() - (before - overlap)).abs())
            .max((unc.measure() - set.measure()).abs())
            .max((unc.measure() - unc.measure_direct()).abs());
    }
    Ok((same && worst <= 1e-12, format!("JSONL identical for 1 and 8 threads: {same}; {ops} subtractions, worst accounting error {worst:.1e}")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("phase-transition decay", phase_transition),
        ("step-density threshold", step_threshold),
        ("Shepp classification", shepp_pairs),
        ("kernel and energy exactness", kernel_exactness),
        ("energy/Shepp co-behavior", energy_shepp),
        ("flatness bound", flatness),
        ("martingale moments", martingale),
        ("coupling laws", coupling),
        ("comparison principle", comparison),
        ("determinism and arc sets", determinism_and_arcsets),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name} ({:.1}s): {detail}", i + 1, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
