//! Density specifications: named builders and TOML/JSON piece files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{fat_cantor_density, step, tent, uniform, PieceSpec, PiecewisePolyDensity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub pieces: Vec<PieceSpec>,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(format!("bad {what} `{s}`")))
}

/// Parse `uniform`, `tent`, `step:lo:hi:split`, `fatcantor:d`, or a path to
/// a `.toml` / `.json` piece file.
pub fn parse_density(spec: &str) -> Result<PiecewisePolyDensity> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["uniform"] => Ok(uniform()),
        ["tent"] => Ok(tent()),
        ["step", lo, hi, split] => step(num(lo, "lo")?, num(hi, "hi")?, num(split, "split")?),
        ["fatcantor", d] => fat_cantor_density(num(d, "depth")?),
        ["file", path] => load_density(Path::new(path)),
        _ if spec.ends_with(".toml") || spec.ends_with(".json") => load_density(Path::new(spec)),
        _ => Err(parse_err(format!("unknown density `{spec}`"))),
    }
}

pub fn parse_density_text(text: &str, json: bool) -> Result<PiecewisePolyDensity> {
    let file: DensityFile = if json {
        serde_json::from_str(text)?
    } else {
        toml::from_str(text).map_err(|e| parse_err(e.to_string()))?
    };
    PiecewisePolyDensity::from_specs(&file.pieces)
}

pub fn load_density(path: &Path) -> Result<PiecewisePolyDensity> {
    let text = std::fs::read_to_string(path)?;
    let json = path.extension().is_some_and(|e| e == "json");
    parse_density_text(&text, json)
}

pub fn density_to_toml(f: &PiecewisePolyDensity) -> String {
    toml::to_string(&DensityFile { pieces: f.specs() }).expect("pieces serialize")
}
