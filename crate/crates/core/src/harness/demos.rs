//! Worked examples: two conditions that do not imply each other, and the
//! block sequences around condition (s2).

use serde::{Deserialize, Serialize};

use crate::arcset::ArcSet;
use crate::circle::Arc;
use crate::density::{compute_kf, step, tent, PiecewisePolyDensity};
use crate::error::{domain, Result};
use crate::sequences::{
    block_sequence_a, block_sequence_b, shepp_classify, shepp_partials, shepp_tail_bound, sum_classify,
    BlockKind, LengthSequence, SeriesClass,
};
use crate::summation::CompensatedSum;

/// A named claim and whether the computation bears it out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C1C2Demo {
    /// Tent density with `l_n = 3/(4n)`: (C2) without (C1).
    TentC2NotC1,
    /// Step density with log-harmonic lengths: (C1) without (C2).
    LogharmonicC1NotC2,
}

impl std::str::FromStr for C1C2Demo {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tent_c2_not_c1" | "tent" => Ok(Self::TentC2NotC1),
            "logharmonic_c1_not_c2" | "logharmonic" => Ok(Self::LogharmonicC1NotC2),
            _ => Err(crate::Error::Parse(format!("unknown demo `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1C2Report {
    pub demo: C1C2Demo,
    pub density: String,
    pub lengths: String,
    pub m_f: f64,
    pub k_f: ArcSet,
    pub checkpoints: Vec<u64>,
    /// `S_N` at each checkpoint.
    pub sum_partials: Vec<f64>,
    /// `(a, ln Shepp partials, class)`.
    pub shepp: Vec<(f64, Vec<f64>, SeriesClass)>,
    pub checks: Vec<Check>,
}

const C1C2_CHECKPOINTS: [u64; 3] = [1_000, 10_000, 100_000];

fn sum_partials(seq: &LengthSequence, cps: &[u64]) -> Result<Vec<f64>> {
    let mut s = CompensatedSum::new();
    let mut out = Vec::new();
    let mut n = 0;
    for &cp in cps {
        while n < cp {
            n += 1;
            s.add(seq.length(n)?);
        }
        out.push(s.value());
    }
    Ok(out)
}

fn shepp_rows(seq: &LengthSequence, a_list: &[f64], cps: &[u64]) -> Result<Vec<(f64, Vec<f64>, SeriesClass)>> {
    a_list
        .iter()
        .map(|&a| {
            let logs = shepp_partials(seq, a, cps)?.into_iter().map(|v| v.log).collect();
            Ok((a, logs, shepp_classify(seq, a)))
        })
        .collect()
}

fn strictly_growing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

pub fn section5_c1c2(demo: C1C2Demo) -> Result<C1C2Report> {
    let cps = C1C2_CHECKPOINTS.to_vec();
    let (f, seq, a_list, kf_expected): (PiecewisePolyDensity, LengthSequence, Vec<f64>, ArcSet) = match demo {
        C1C2Demo::TentC2NotC1 => (
            tent(),
            LengthSequence::harmonic(0.75)?,
            vec![1.0, 4.0 / 3.0],
            ArcSet::from_points([0.0]),
        ),
        C1C2Demo::LogharmonicC1NotC2 => (
            step(0.5, 1.5, 0.5)?,
            LengthSequence::log_harmonic(),
            vec![0.5, 0.6],
            ArcSet::from_arc(Arc::from_endpoints(0.0, 0.5)?),
        ),
    };
    let m = f.ess_inf();
    let k_f = compute_kf(&f);
    let sums = sum_partials(&seq, &cps)?;
    let shepp = shepp_rows(&seq, &a_list, &cps)?;
    let n_last = *cps.last().expect("nonempty");
    let mut checks = vec![Check::new(
        "k_f",
        k_f == kf_expected,
        format!("K_f = {:?}", k_f.spans()),
    )];
    match demo {
        C1C2Demo::TentC2NotC1 => {
            checks.push(Check::new(
                "c2_sum_diverges",
                sum_classify(&seq) == SeriesClass::Diverges && strictly_growing(&sums),
                format!("sum l_n {} with partials {sums:?}", sum_classify(&seq)),
            ));
            let (a1, logs, class) = &shepp[0];
            let tail = shepp_tail_bound(&seq, *a1, n_last);
            checks.push(Check::new(
                "c1_fails_at_a1",
                *class == SeriesClass::Converges && tail.is_some_and(|t| t.is_finite()),
                format!("Shepp(a = 1) {class}, ln partial {:.6}, tail <= {tail:?}", logs[logs.len() - 1]),
            ));
            // (C1) asks for divergence at every a > m_f = 3/4; 4/3 is the edge
            let below = shepp_classify(&seq, 4.0 / 3.0 - 1e-9);
            checks.push(Check::new(
                "c1_threshold",
                below == SeriesClass::Converges && shepp[1].2 == SeriesClass::Diverges,
                format!("a < 4/3 {below}, a = 4/3 {}", shepp[1].2),
            ));
        }
        C1C2Demo::LogharmonicC1NotC2 => {
            let (_, logs06, class06) = &shepp[1];
            checks.push(Check::new(
                "c1_holds",
                *class06 == SeriesClass::Diverges && strictly_growing(logs06),
                format!("Shepp(a = 0.6) {class06}, ln partials {logs06:?}"),
            ));
            let (_, logs05, class05) = &shepp[0];
            let tail = shepp_tail_bound(&seq, 0.5, n_last);
            checks.push(Check::new(
                "c2_fails",
                *class05 == SeriesClass::Converges && tail.is_some_and(|t| t.is_finite()),
                format!("Shepp(a = m_f = 1/2) {class05}, ln partial {:.6}, tail <= {tail:?}", logs05[logs05.len() - 1]),
            ));
        }
    }
    Ok(C1C2Report {
        demo,
        density: f.origin().unwrap_or("piecewise").to_string(),
        lengths: seq.to_string(),
        m_f: m,
        k_f,
        checkpoints: cps,
        sum_partials: sums,
        shepp,
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub k: usize,
    pub constant: bool,
    /// `log10` of the block end index.
    pub log10_end: f64,
    /// Lower bound on `n l_n / S_n` at the block end.
    pub s2_end: Option<f64>,
    pub sq_sum_end: f64,
    pub shepp_lower_end: Option<f64>,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlocksReport {
    pub k_max: usize,
    pub c: f64,
    pub a_blocks: Vec<BlockRow>,
    pub b_blocks: Vec<BlockRow>,
    /// `sum l_n^2` over the evaluable prefix of `A`, and its index.
    pub a_sq_prefix: (u64, f64),
    /// Closed form `sum_k ln^2 n_k / n_k`.
    pub a_sq_closed_form: f64,
    pub checks: Vec<Check>,
}

/// Indices summed directly when checking a block prefix.
const PREFIX_LIMIT: u64 = 2_000_000;
/// Blocks from this index on must reach the s2 boundary ratio.
const S2_FROM_BLOCK: usize = 2;
const S2_BOUNDARY: f64 = 0.9;

fn rows(seq: &LengthSequence) -> Vec<BlockRow> {
    let (LengthSequence::BlockA { schedule } | LengthSequence::BlockB { schedule }) = seq else {
        return Vec::new();
    };
    schedule
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| BlockRow {
            k: i + 1,
            constant: matches!(b.kind, BlockKind::Constant { .. }),
            log10_end: b.end.ln_f64() / std::f64::consts::LN_10,
            s2_end: b.s2_end,
            sq_sum_end: b.sq_sum_end,
            shepp_lower_end: b.shepp_lower_end,
            clamped: b.clamped,
        })
        .collect()
}

pub fn section6_blocks(k_max: usize, c: f64) -> Result<BlocksReport> {
    if k_max > 12 {
        return Err(domain("k_max must be at most 12"));
    }
    let a = LengthSequence::BlockA {
        schedule: block_sequence_a(k_max)?,
    };
    let b = LengthSequence::BlockB {
        schedule: block_sequence_b(k_max, c)?,
    };
    let a_rows = rows(&a);
    let b_rows = rows(&b);
    let closed = a_rows.last().map_or(0.0, |r| r.sq_sum_end);
    let limit = a.last_index().unwrap_or(PREFIX_LIMIT).min(PREFIX_LIMIT);
    let mut sq = CompensatedSum::new();
    for n in 1..=limit {
        let l = a.length(n)?;
        sq.add(l * l);
    }
    let mut checks = Vec::new();
    let s2_low: Vec<(usize, f64)> = a_rows
        .iter()
        .filter(|r| r.k >= S2_FROM_BLOCK)
        .filter_map(|r| r.s2_end.map(|s| (r.k, s)))
        .collect();
    checks.push(Check::new(
        "a_s2_boundary",
        s2_low.iter().all(|&(_, s)| s >= S2_BOUNDARY),
        format!("boundary ratios {s2_low:?}"),
    ));
    checks.push(Check::new(
        "a_sq_bounded",
        sq.value() <= closed * (1.0 + 1e-12),
        format!("prefix sum l_n^2 through {limit} = {} <= {closed}", sq.value()),
    ));
    let b_low: Vec<(usize, f64)> = b_rows.iter().filter_map(|r| r.shepp_lower_end.map(|s| (r.k, s))).collect();
    checks.push(Check::new(
        "b_shepp_exceeds_k",
        b_low.len() == b_rows.len() && b_low.iter().all(|&(k, s)| s > k as f64),
        format!("Shepp lower bounds at a = 1/c: {b_low:?}"),
    ));
    // the first block is summed exactly, so the bound must match the direct partial
    if let Some(end) = b.last_index().map(|l| l.min(PREFIX_LIMIT)) {
        let first_end = match &b {
            LengthSequence::BlockB { schedule } => schedule.blocks[0].end.to_f64() as u64,
            _ => unreachable!(),
        };
        let n = first_end.min(end);
        let direct = shepp_partials(&b, 1.0 / c, &[n])?[0].log.exp();
        let lower = b_rows[0].shepp_lower_end.unwrap_or(f64::INFINITY);
        checks.push(Check::new(
            "b_first_block_direct",
            direct >= lower * (1.0 - 1e-9),
            format!("direct Shepp partial through {n} = {direct} vs bound {lower}"),
        ));
    }
    Ok(BlocksReport {
        k_max,
        c,
        a_blocks: a_rows,
        b_blocks: b_rows,
        a_sq_prefix: (limit, sq.value()),
        a_sq_closed_form: closed,
        checks,
    })
}
