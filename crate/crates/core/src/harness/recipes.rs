//! Named experiments with validated parameters and desk-scale defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::arcset::ArcSet;
use crate::capacity::SupportMeasure;
use crate::circle::Arc;
use crate::coversim::{billard_moments, comparison_experiment, parse_checkpoints, BillardMoments, ComparisonReport, ComparisonSetup};
use crate::density::parse_density;
use crate::error::{Error, Result};
use crate::sequences::parse_sequence;

use super::criteria::{criteria_report, CriteriaReport, Verdict};
use super::demos::{all_passed, section5_c1c2, section6_blocks, BlocksReport, C1C2Demo, C1C2Report};
use super::sweep::{phase_transition_sweep, SweepConfig, SweepResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    PhaseTransition,
    CriteriaReport,
    Section5C1c2,
    Section6Blocks,
    Comparison,
    Billard,
}

impl std::str::FromStr for Recipe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown recipe `{s}`")))
    }
}

/// A recipe, parameter overrides, and where to write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub recipe: Recipe,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseParams {
    pub density: String,
    pub c_grid: Vec<f64>,
    pub exact_grid: String,
    pub exact_max: u64,
    pub mc_grid: String,
    pub mc_max: u64,
    pub fit_lo: u64,
    pub fit_hi: u64,
    pub trials: u64,
}

impl Default for PhaseParams {
    fn default() -> Self {
        Self {
            density: "uniform".into(),
            c_grid: vec![0.3, 0.5, 0.8],
            exact_grid: "log:8".into(),
            exact_max: 100_000,
            mc_grid: "log:4".into(),
            mc_max: 10_000,
            fit_lo: 1_000,
            fit_hi: 100_000,
            trials: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriteriaParams {
    pub density: String,
    pub seq: String,
    pub a_list: Vec<f64>,
}

impl Default for CriteriaParams {
    fn default() -> Self {
        Self {
            density: "step:0.5:1.5:0.5".into(),
            seq: "harmonic:2.5".into(),
            a_list: vec![0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct C1C2Params {
    /// Both demos when absent.
    pub demo: Option<C1C2Demo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlocksParams {
    pub k_max: usize,
    pub c: f64,
}

impl Default for BlocksParams {
    fn default() -> Self {
        Self { k_max: 12, c: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonParams {
    pub mu: String,
    pub nu: String,
    pub u: [f64; 2],
    pub k: [f64; 2],
    pub seq: String,
    pub checkpoints: String,
    pub n_max: u64,
    pub trials: u64,
}

impl Default for ComparisonParams {
    fn default() -> Self {
        Self {
            mu: "uniform".into(),
            nu: "step:1.5:0.5:0.5".into(),
            u: [0.1, 0.4],
            k: [0.2, 0.3],
            seq: "harmonic:0.5".into(),
            checkpoints: "100,1000".into(),
            n_max: 10_000,
            trials: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BillardParams {
    pub density: String,
    pub seq: String,
    pub sigma: String,
    pub n: u64,
    pub trials: u64,
}

impl Default for BillardParams {
    fn default() -> Self {
        Self {
            density: "uniform".into(),
            seq: "harmonic:0.5".into(),
            sigma: "lebesgue".into(),
            n: 1_000,
            trials: 2_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", content = "report", rename_all = "snake_case")]
pub enum RecipeOutput {
    PhaseTransition(SweepResult),
    CriteriaReport(CriteriaReport),
    Section5C1c2(Vec<C1C2Report>),
    Section6Blocks(BlocksReport),
    Comparison(ComparisonReport),
    Billard(BillardMoments),
}

impl RecipeOutput {
    /// Whether the output falls short of a definite answer: a verdict the
    /// criteria refuse or cannot reach, or a claim the computation did not
    /// bear out.
    pub fn inconclusive(&self) -> bool {
        match self {
            Self::PhaseTransition(_) => false,
            Self::CriteriaReport(r) => matches!(r.verdict, Verdict::Inconclusive | Verdict::HypothesesUnmet),
            Self::Section5C1c2(rs) => !rs.iter().all(|r| all_passed(&r.checks)),
            Self::Section6Blocks(r) => !all_passed(&r.checks),
            Self::Comparison(r) => !r.all_ordered(2.0),
            Self::Billard(m) => !m.mean_within(3.0),
        }
    }
}

fn params<T: serde::de::DeserializeOwned>(map: &Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(map.clone())).map_err(|e| Error::Parse(format!("recipe parameters: {e}")))
}

/// A recipe with its parameters parsed and validated.
#[derive(Debug, Clone)]
pub enum Prepared {
    PhaseTransition { density: crate::PiecewisePolyDensity, config: SweepConfig },
    CriteriaReport { density: crate::PiecewisePolyDensity, seq: crate::LengthSequence, a_list: Vec<f64> },
    Section5C1c2(Vec<C1C2Demo>),
    Section6Blocks(BlocksParams),
    Comparison { setup: ComparisonSetup, trials: u64, seed: u64 },
    Billard { density: crate::PiecewisePolyDensity, seq: crate::LengthSequence, sigma: SupportMeasure, n: u64, trials: u64, seed: u64 },
}

impl ExperimentSpec {
    /// Parse and validate every parameter before any computation.
    pub fn prepare(&self) -> Result<Prepared> {
        let p = &self.params;
        Ok(match self.recipe {
            Recipe::PhaseTransition => {
                let q: PhaseParams = params(p)?;
                let config = SweepConfig {
                    c_grid: q.c_grid,
                    exact_grid: parse_checkpoints(&q.exact_grid, q.exact_max)?,
                    mc_grid: if q.mc_max == 0 { Vec::new() } else { parse_checkpoints(&q.mc_grid, q.mc_max)? },
                    fit_range: (q.fit_lo, q.fit_hi),
                    trials: q.trials,
                    seed: self.seed,
                };
                config.validate()?;
                Prepared::PhaseTransition {
                    density: parse_density(&q.density)?,
                    config,
                }
            }
            Recipe::CriteriaReport => {
                let q: CriteriaParams = params(p)?;
                Prepared::CriteriaReport {
                    density: parse_density(&q.density)?,
                    seq: parse_sequence(&q.seq)?,
                    a_list: q.a_list,
                }
            }
            Recipe::Section5C1c2 => {
                let q: C1C2Params = params(p)?;
                Prepared::Section5C1c2(match q.demo {
                    Some(d) => vec![d],
                    None => vec![C1C2Demo::TentC2NotC1, C1C2Demo::LogharmonicC1NotC2],
                })
            }
            Recipe::Section6Blocks => {
                let q: BlocksParams = params(p)?;
                if q.k_max == 0 || q.k_max > 12 || !(q.c > 1.0) {
                    return Err(Error::Domain("section6_blocks needs 1 <= k_max <= 12 and c > 1".into()));
                }
                Prepared::Section6Blocks(q)
            }
            Recipe::Comparison => {
                let q: ComparisonParams = params(p)?;
                let cps = parse_checkpoints(&q.checkpoints, q.n_max)?;
                let k = if q.k[0] == q.k[1] {
                    ArcSet::from_points([q.k[0]])
                } else {
                    ArcSet::from_arc(Arc::from_endpoints(q.k[0], q.k[1])?)
                };
                Prepared::Comparison {
                    setup: ComparisonSetup {
                        mu: parse_density(&q.mu)?,
                        nu: parse_density(&q.nu)?,
                        u: Arc::from_endpoints(q.u[0], q.u[1])?,
                        k,
                        lengths: parse_sequence(&q.seq)?,
                        checkpoints: cps,
                    },
                    trials: q.trials,
                    seed: self.seed,
                }
            }
            Recipe::Billard => {
                let q: BillardParams = params(p)?;
                Prepared::Billard {
                    density: parse_density(&q.density)?,
                    seq: parse_sequence(&q.seq)?,
                    sigma: SupportMeasure::parse(&q.sigma)?,
                    n: q.n,
                    trials: q.trials,
                    seed: self.seed,
                }
            }
        })
    }
}

pub fn run_prepared(p: &Prepared) -> Result<RecipeOutput> {
    Ok(match p {
        Prepared::PhaseTransition { density, config } => {
            RecipeOutput::PhaseTransition(phase_transition_sweep(density, config)?)
        }
        Prepared::CriteriaReport { density, seq, a_list } => {
            RecipeOutput::CriteriaReport(criteria_report(density, seq, a_list)?)
        }
        Prepared::Section5C1c2(demos) => {
            RecipeOutput::Section5C1c2(demos.iter().map(|&d| section5_c1c2(d)).collect::<Result<_>>()?)
        }
        Prepared::Section6Blocks(q) => RecipeOutput::Section6Blocks(section6_blocks(q.k_max, q.c)?),
        Prepared::Comparison { setup, trials, seed } => {
            RecipeOutput::Comparison(comparison_experiment(setup, *trials, *seed)?)
        }
        Prepared::Billard {
            density,
            seq,
            sigma,
            n,
            trials,
            seed,
        } => RecipeOutput::Billard(billard_moments(density, seq, sigma, *n, *trials, *seed)?),
    })
}

pub fn run_recipe(spec: &ExperimentSpec) -> Result<RecipeOutput> {
    run_prepared(&spec.prepare()?)
}

/// Parse a spec file: JSON when the name ends in `.json`, TOML otherwise.
pub fn load_spec(path: &std::path::Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text)?)
    } else {
        toml::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
    }
}
