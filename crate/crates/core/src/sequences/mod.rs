//! Decreasing length sequences `l_n` and the series criteria built on them.

pub mod blocks;
pub mod series;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{construction, domain, Result};

pub use blocks::{block_sequence_a, block_sequence_b, Block, BlockKind, BlockSchedule, BlockVariant};
pub use series::{
    diagnostics, ell2_classify, harmonic_number, lemma34_check, s2_limsup_estimate, s2_ratio,
    shepp_classify, shepp_partial, shepp_partials, shepp_tail_bound, sum_classify,
    Lemma34Witness, S2Class, S2Report, SeriesDiagnostics,
};

/// Cap applied to parametric formulas whose early terms reach 1.
pub const MAX_LENGTH: f64 = 0.99;

/// First index where `2/n - 4/(n ln n)` is used; the formula decreases from
/// `n = e^(1 + sqrt 3) ~ 15.4` on.
pub const LOG_HARMONIC_START: u64 = 16;

/// Convergence verdict for a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesClass {
    Converges,
    Diverges,
    Unknown,
}

impl fmt::Display for SeriesClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesClass::Converges => "converges",
            SeriesClass::Diverges => "diverges",
            SeriesClass::Unknown => "unknown",
        })
    }
}

/// The lengths `l_1 >= l_2 >= ...` of the covering intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LengthSequence {
    /// `min(c/n, 0.99)`.
    Harmonic { c: f64 },
    /// `min(a/n^t, 0.99)`.
    Power { a: f64, t: f64 },
    Constant { l: f64 },
    /// `2/n - 4/(n ln n)` from `n = 16`, preceded by a geometric ramp from 0.99.
    LogHarmonic,
    BlockA { schedule: BlockSchedule },
    BlockB { schedule: BlockSchedule },
    /// A finite table, optionally continued by `tail` at the same indices.
    Explicit {
        table: Vec<f64>,
        tail: Option<Box<LengthSequence>>,
    },
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(construction(format!("{name} must be positive and finite, got {x}")))
    }
}

impl LengthSequence {
    pub fn harmonic(c: f64) -> Result<Self> {
        positive("c", c)?;
        Ok(Self::Harmonic { c })
    }

    pub fn power(a: f64, t: f64) -> Result<Self> {
        positive("a", a)?;
        positive("t", t)?;
        if t == 1.0 {
            return Ok(Self::Harmonic { c: a });
        }
        Ok(Self::Power { a, t })
    }

    pub fn constant(l: f64) -> Result<Self> {
        positive("l", l)?;
        if l >= 1.0 {
            return Err(construction(format!("constant length {l} must be < 1")));
        }
        Ok(Self::Constant { l })
    }

    pub fn log_harmonic() -> Self {
        Self::LogHarmonic
    }

    pub fn block_a(k_max: usize) -> Result<Self> {
        Ok(Self::BlockA {
            schedule: block_sequence_a(k_max)?,
        })
    }

    pub fn block_b(k_max: usize, c: f64) -> Result<Self> {
        Ok(Self::BlockB {
            schedule: block_sequence_b(k_max, c)?,
        })
    }

    pub fn explicit(table: Vec<f64>, tail: Option<LengthSequence>) -> Result<Self> {
        if table.is_empty() && tail.is_none() {
            return Err(construction("explicit sequence is empty"));
        }
        for (i, &l) in table.iter().enumerate() {
            if !(l > 0.0 && l < 1.0) {
                return Err(construction(format!("l_{} = {l} outside (0, 1)", i + 1)));
            }
            if i > 0 && l > table[i - 1] {
                return Err(construction(format!("l_{} = {l} exceeds l_{}", i + 1, i)));
            }
        }
        if let (Some(t), Some(&last)) = (&tail, table.last()) {
            let next = t.length(table.len() as u64 + 1)?;
            if next > last {
                return Err(construction("tail continues above the last table entry"));
            }
        }
        Ok(Self::Explicit {
            table,
            tail: tail.map(Box::new),
        })
    }

    /// `l_n` for `n >= 1`.
    pub fn length(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(domain("lengths are indexed from 1"));
        }
        let x = n as f64;
        Ok(match self {
            Self::Harmonic { c } => (c / x).min(MAX_LENGTH),
            Self::Power { a, t } => (a * x.powf(-t)).min(MAX_LENGTH),
            Self::Constant { l } => *l,
            Self::LogHarmonic => log_harmonic_length(n),
            Self::BlockA { schedule } | Self::BlockB { schedule } => schedule.length(n)?,
            Self::Explicit { table, tail } => match table.get(n as usize - 1) {
                Some(&l) => l,
                None => match tail {
                    Some(t) => t.length(n)?,
                    None => {
                        return Err(domain(format!(
                            "index {n} beyond explicit table of {}",
                            table.len()
                        )))
                    }
                },
            },
        })
    }

    /// `[l_1, ..., l_n]`, checked to lie in `(0, 1)` and be nonincreasing.
    pub fn prefix(&self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        let mut prev = f64::INFINITY;
        for i in 1..=n as u64 {
            let l = self.length(i)?;
            if !(l > 0.0 && l < 1.0) {
                return Err(construction(format!("l_{i} = {l} outside (0, 1)")));
            }
            if l > prev {
                return Err(construction(format!("l_{i} = {l} exceeds l_{}", i - 1)));
            }
            prev = l;
            out.push(l);
        }
        Ok(out)
    }

    /// Largest evaluable index, when finite.
    pub fn last_index(&self) -> Option<u64> {
        match self {
            Self::BlockA { schedule } | Self::BlockB { schedule } => schedule.last_index(),
            Self::Explicit { table, tail: None } => Some(table.len() as u64),
            Self::Explicit { tail: Some(t), .. } => t.last_index(),
            _ => None,
        }
    }

    /// The family that decides convergence questions: explicit tables
    /// defer to their tail.
    pub(crate) fn asymptotic(&self) -> Option<&LengthSequence> {
        match self {
            Self::Explicit { tail: Some(t), .. } => t.asymptotic(),
            Self::Explicit { tail: None, .. } => None,
            other => Some(other),
        }
    }
}

fn num(s: &str, what: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| crate::Error::Parse(format!("bad {what} `{s}`")))
}

/// Parse `harmonic:c`, `power:a:t`, `const:l`, `logharmonic`, `blockA:k`,
/// `blockB:k:c` or `file:<path>` (one length per line, ascending `n`).
pub fn parse_sequence(spec: &str) -> Result<LengthSequence> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["harmonic", c] => LengthSequence::harmonic(num(c, "c")?),
        ["power", a, t] => LengthSequence::power(num(a, "a")?, num(t, "t")?),
        ["const", l] => LengthSequence::constant(num(l, "length")?),
        ["logharmonic"] => Ok(LengthSequence::log_harmonic()),
        ["blockA", k] => LengthSequence::block_a(num(k, "k")? as usize),
        ["blockB", k, c] => LengthSequence::block_b(num(k, "k")? as usize, num(c, "c")?),
        ["file", path] => {
            let text = std::fs::read_to_string(path)?;
            let table = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| num(l, "length"))
                .collect::<Result<Vec<f64>>>()?;
            LengthSequence::explicit(table, None)
        }
        _ => Err(crate::Error::Parse(format!("unknown sequence `{spec}`"))),
    }
}

fn log_harmonic_formula(x: f64) -> f64 {
    2.0 / x - 4.0 / (x * x.ln())
}

fn log_harmonic_length(n: u64) -> f64 {
    if n >= LOG_HARMONIC_START {
        log_harmonic_formula(n as f64)
    } else {
        let end = log_harmonic_formula(LOG_HARMONIC_START as f64);
        let steps = (LOG_HARMONIC_START - 1) as f64;
        MAX_LENGTH * (end / MAX_LENGTH).powf((n - 1) as f64 / steps)
    }
}

impl fmt::Display for LengthSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Harmonic { c } => write!(f, "harmonic:{c}"),
            Self::Power { a, t } => write!(f, "power:{a}:{t}"),
            Self::Constant { l } => write!(f, "const:{l}"),
            Self::LogHarmonic => write!(f, "logharmonic"),
            Self::BlockA { schedule } => write!(f, "blockA:{}", schedule.blocks.len()),
            Self::BlockB { schedule } => write!(
                f,
                "blockB:{}:{}",
                schedule.blocks.len(),
                schedule.c().unwrap_or(f64::NAN)
            ),
            Self::Explicit { table, tail } => {
                write!(f, "explicit[{}]", table.len())?;
                if let Some(t) = tail {
                    write!(f, "+{t}")?;
                }
                Ok(())
            }
        }
    }
}
