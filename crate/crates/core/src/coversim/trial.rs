//! Single covering runs and batches of independent trials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::circle::wrap;
use crate::density::PiecewisePolyDensity;
use crate::error::{domain, Error, Result};
use crate::sequences::LengthSequence;

use super::rng::{trial_seed, CounterRng, STREAM_CENTERS};
use super::uncovered::UncoveredSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Full,
    Set { set: ArcSet },
    Points { points: Vec<f64> },
}

impl Target {
    pub fn uncovered(&self) -> UncoveredSet {
        match self {
            Target::Full => UncoveredSet::full(),
            Target::Set { set } => UncoveredSet::from_arcset(set),
            Target::Points { points } => UncoveredSet::from_points(points),
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Target::Full => 1.0,
            Target::Set { set } => set.measure(),
            Target::Points { .. } => 0.0,
        }
    }

    /// Parse `full`, `grid:n`, `points:x1,...` (tracked pointwise) or an
    /// arc-set spec.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "full" {
            return Ok(Target::Full);
        }
        if let Some(n) = spec.strip_prefix("grid:") {
            let n: usize = n.parse().map_err(|_| crate::Error::Parse(format!("bad grid size in `{spec}`")))?;
            if n == 0 {
                return Err(domain("grid target needs at least one point"));
            }
            return Ok(Target::grid(n));
        }
        let set = ArcSet::parse(spec)?;
        if set.is_finite_point_set() {
            Ok(Target::Points {
                points: set.spans().iter().map(|s| s[0]).collect(),
            })
        } else {
            Ok(Target::Set { set })
        }
    }

    /// `n` equally spaced points `k / n`.
    pub fn grid(n: usize) -> Self {
        Target::Points {
            points: (0..n).map(|k| k as f64 / n as f64).collect(),
        }
    }
}

/// Parse `log:K` (K points per decade), `full`-style lists `10,100,1e3`, or
/// `none`, clipped to `[1, n_max]`; `n_max` is always included.
pub fn parse_checkpoints(spec: &str, n_max: u64) -> Result<Vec<u64>> {
    let mut out: Vec<u64> = if let Some(k) = spec.strip_prefix("log:") {
        let per: u32 = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad checkpoint density `{k}`")))?;
        if per == 0 {
            return Err(Error::Parse("checkpoints per decade must be positive".into()));
        }
        log_checkpoints(per, n_max)
    } else if spec == "none" {
        Vec::new()
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| *v >= 1.0 && v.fract() == 0.0)
                    .map(|v| v as u64)
                    .ok_or_else(|| Error::Parse(format!("bad checkpoint `{s}`")))
            })
            .collect::<Result<_>>()?
    };
    out.retain(|&n| n >= 1 && n <= n_max);
    if n_max >= 1 {
        out.push(n_max);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `round(10^(j / per))` for `j >= 0` up to `n_max`, deduplicated.
pub fn log_checkpoints(per: u32, n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for j in 0.. {
        let n = 10f64.powf(j as f64 / per as f64).round() as u64;
        if n > n_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub density: PiecewisePolyDensity,
    pub lengths: LengthSequence,
    pub n_max: u64,
    pub target: Target,
    pub seed: u64,
    pub checkpoints: Vec<u64>,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("checkpoints must be strictly increasing"));
        }
        if self.checkpoints.iter().any(|&c| c == 0 || c > self.n_max) {
            return Err(domain("checkpoints must lie in [1, N_max]"));
        }
        if let Some(last) = self.lengths.last_index() {
            if last < self.n_max {
                return Err(domain(format!(
                    "sequence `{}` is defined only up to n = {last}",
                    self.lengths
                )));
            }
        }
        Ok(())
    }

    /// The config of trial `index` in a batch keyed by `self.seed`.
    pub fn for_trial(&self, index: u64) -> TrialConfig {
        TrialConfig {
            seed: trial_seed(self.seed, index),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub n: u64,
    pub uncovered: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    /// First `n` with the target inside `I_1 u ... u I_n`; `None` when not
    /// covered by `N_max`.
    pub cover_time: Option<u64>,
    /// Uncovered measure at `n = 0` and at each checkpoint.
    pub trajectory: Vec<TrajectoryPoint>,
    /// First hit time of each target point (point targets only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub point_hits: Option<Vec<Option<u64>>>,
}

impl TrialResult {
    /// Whether the target was covered by step `n`.
    pub fn covered_by(&self, n: u64) -> bool {
        self.cover_time.is_some_and(|t| t <= n)
    }
}

/// Records the trajectory and the cover time while a run proceeds.
pub(crate) struct Recorder<'a> {
    checkpoints: &'a [u64],
    next: usize,
    pub trajectory: Vec<TrajectoryPoint>,
    pub cover_time: Option<u64>,
}

impl<'a> Recorder<'a> {
    pub fn new(checkpoints: &'a [u64], initial: &UncoveredSet) -> Self {
        let mut r = Self {
            checkpoints,
            next: 0,
            trajectory: Vec::with_capacity(checkpoints.len() + 1),
            cover_time: None,
        };
        r.trajectory.push(TrajectoryPoint {
            n: 0,
            uncovered: initial.measure(),
        });
        if initial.is_empty() {
            r.cover_time = Some(0);
        }
        r
    }

    /// Call after step `n`; returns `true` once the target is covered.
    #[inline]
    pub fn after_step(&mut self, n: u64, set: &UncoveredSet) -> bool {
        if self.cover_time.is_none() && set.is_empty() {
            self.cover_time = Some(n);
        }
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] <= n {
            self.trajectory.push(TrajectoryPoint {
                n: self.checkpoints[self.next],
                uncovered: set.measure(),
            });
            self.next += 1;
        }
        self.cover_time.is_some()
    }

    /// Fill the remaining checkpoints of a covered run with 0.
    pub fn finish(mut self) -> (Vec<TrajectoryPoint>, Option<u64>) {
        if self.cover_time.is_some() {
            for &n in &self.checkpoints[self.next..] {
                self.trajectory.push(TrajectoryPoint { n, uncovered: 0.0 });
            }
        }
        (self.trajectory, self.cover_time)
    }
}

/// First hit times of the points of a point target.
pub(crate) struct PointHits {
    /// Sorted distinct points (circle point 0 kept as 0).
    sorted: Vec<f64>,
    first: Vec<Option<u64>>,
    /// Index into `sorted` for each original point.
    order: Vec<usize>,
}

impl PointHits {
    pub fn new(target: &Target, set: &mut UncoveredSet) -> Option<Self> {
        let Target::Points { points } = target else {
            return None;
        };
        set.track_points();
        let mut sorted: Vec<f64> = points.iter().map(|&p| wrap(p)).collect();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let order = points
            .iter()
            .map(|&p| sorted.partition_point(|&q| q < wrap(p)))
            .collect();
        Some(Self {
            first: vec![None; sorted.len()],
            sorted,
            order,
        })
    }

    pub fn record(&mut self, n: u64, set: &mut UncoveredSet) {
        for x in set.drain_hits() {
            // the circle point 0 may be stored as 1
            let x = wrap(x);
            let i = self.sorted.partition_point(|&q| q < x);
            if i < self.sorted.len() && self.first[i].is_none() {
                self.first[i] = Some(n);
            }
        }
    }

    pub fn finish(self) -> Vec<Option<u64>> {
        self.order.iter().map(|&i| self.first[i]).collect()
    }
}

/// One covering run: `xi_n = M^-1(u_n)` with `u_n` from the centers stream of
/// `config.seed`, and `I_n` the open arc of length `l_n` centered at `xi_n`.
pub fn run_trial(config: &TrialConfig) -> Result<TrialResult> {
    config.validate()?;
    let mut set = config.target.uncovered();
    let mut rec = Recorder::new(&config.checkpoints, &set);
    let mut rng = CounterRng::new(config.seed, STREAM_CENTERS);
    let mut hits = PointHits::new(&config.target, &mut set);
    for n in 1..=config.n_max {
        let l = config.lengths.length(n)?;
        let xi = config.density.inverse_cdf_unchecked(rng.next_uniform());
        set.remove_centered(xi, l);
        if let Some(h) = hits.as_mut() {
            h.record(n, &mut set);
        }
        if rec.after_step(n, &set) {
            break;
        }
    }
    let (trajectory, cover_time) = rec.finish();
    Ok(TrialResult {
        seed: config.seed,
        cover_time,
        trajectory,
        point_hits: hits.map(PointHits::finish),
    })
}

/// `trials` independent runs of `config`, trial `i` keyed by
/// `trial_seed(config.seed, i)`. Results come back in trial order whatever
/// the thread count.
pub fn run_trials(config: &TrialConfig, trials: u64) -> Result<Vec<TrialResult>> {
    config.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|i| run_trial(&config.for_trial(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{step, uniform};

    fn cfg(target: Target, n_max: u64, seed: u64) -> TrialConfig {
        TrialConfig {
            density: uniform(),
            lengths: LengthSequence::harmonic(0.5).unwrap(),
            n_max,
            target,
            seed,
            checkpoints: log_checkpoints(4, n_max),
        }
    }

    #[test]
    fn checkpoint_parsing() {
        assert_eq!(parse_checkpoints("log:1", 1000).unwrap(), vec![1, 10, 100, 1000]);
        assert_eq!(parse_checkpoints("10,1e2", 50).unwrap(), vec![10, 50]);
        assert_eq!(parse_checkpoints("log:8", 10).unwrap(), vec![1, 2, 3, 4, 6, 7, 10]);
        assert!(parse_checkpoints("log:x", 10).is_err());
        assert_eq!(parse_checkpoints("none", 0).unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn zero_steps_leave_the_target() {
        let r = run_trial(&cfg(Target::Full, 0, 1)).unwrap();
        assert_eq!(r.trajectory, vec![TrajectoryPoint { n: 0, uncovered: 1.0 }]);
        assert_eq!(r.cover_time, None);
    }

    #[test]
    fn trajectory_nonincreasing_and_deterministic() {
        let c = cfg(Target::Full, 5000, 9);
        let r = run_trial(&c).unwrap();
        assert!(r.trajectory.windows(2).all(|w| w[1].uncovered <= w[0].uncovered));
        assert_eq!(r, run_trial(&c).unwrap());
        assert_ne!(r, run_trial(&cfg(Target::Full, 5000, 10)).unwrap());
    }

    #[test]
    fn cover_time_matches_trajectory() {
        let c = TrialConfig {
            density: step(0.5, 1.5, 0.5).unwrap(),
            lengths: LengthSequence::harmonic(3.0).unwrap(),
            ..cfg(Target::grid(16), 100_000, 3)
        };
        let r = run_trial(&c).unwrap();
        let t = r.cover_time.expect("covered");
        let hits = r.point_hits.unwrap();
        assert_eq!(hits.iter().map(|h| h.unwrap()).max(), Some(t));
    }

    #[test]
    fn batch_is_thread_independent() {
        let c = cfg(Target::Full, 2000, 5);
        let a = run_trials(&c, 16).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_trials(&c, 16)).unwrap();
        assert_eq!(a, b);
    }
}
