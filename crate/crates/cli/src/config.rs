//! Config files: top-level keys are global flags, tables named after a
//! subcommand hold that subcommand's flags. Flags given on the command line
//! win.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{Map, Value};

pub const SUBCOMMANDS: [&str; 7] = ["density", "seq", "capacity", "sim", "sweep", "criteria", "repro"];

fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).context("parsing JSON config")?
    } else {
        let table: toml::Table = toml::from_str(&text).context("parsing TOML config")?;
        serde_json::to_value(table)?
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => bail!("config must be a table"),
    }
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Array(xs) => xs.iter().map(|x| scalar(key, x)).collect::<Result<Vec<_>>>()?.join(","),
        _ => bail!("config key `{key}` must be a string, number or list"),
    })
}

fn flags(table: &Map<String, Value>, argv: &[String], skip_tables: bool) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (key, v) in table {
        if key == "config" {
            bail!("config files cannot name another config");
        }
        if v.is_object() {
            if skip_tables {
                continue;
            }
            bail!("nested table `{key}` in a subcommand section");
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let given = argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match v {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) => {}
            _ => {
                out.push(flag);
                out.push(scalar(key, v)?);
            }
        }
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// `argv` with the flags of the named config file spliced in.
pub fn expand_args(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let table = load(Path::new(&path))?;
    for key in table.keys() {
        if table[key].is_object() && !SUBCOMMANDS.contains(&key.as_str()) {
            bail!("unknown config section `{key}`");
        }
    }
    let Some(pos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let globals = flags(&table, &argv, true)?;
    let local = match table.get(&argv[pos]) {
        Some(Value::Object(t)) => flags(t, &argv, false)?,
        _ => Vec::new(),
    };
    let mut out = argv[..pos].to_vec();
    out.extend(globals);
    out.push(argv[pos].clone());
    out.extend(local);
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn command_line_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "seed = 5\n[sim]\ntrials = 8\nn = 100\ncheckpoints = [10, 100]\n").unwrap();
        let argv = args(&["dvoretzky", "--config", p.to_str().unwrap(), "sim", "--trials", "3"]);
        let out = expand_args(argv).unwrap();
        let joined = out.join(" ");
        assert!(joined.contains("--seed 5 sim"), "{joined}");
        assert!(joined.contains("--n 100"));
        assert!(joined.contains("--checkpoints 10,100"));
        assert!(!joined.contains("--trials 8"));
    }

    #[test]
    fn unknown_section_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"simulate": {"n": 3}}"#).unwrap();
        assert!(expand_args(args(&["dvoretzky", "--config", p.to_str().unwrap(), "sim"])).is_err());
    }
}
