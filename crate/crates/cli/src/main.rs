mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use dvoretzky::capacity::{classify_ladder, energy, KernelPhi, SupportMeasure};
use dvoretzky::coversim::{parse_checkpoints, run_trials, Target, TrialConfig};
use dvoretzky::density::{local_ess_inf, local_ess_sup, parse_density};
use dvoretzky::harness::{
    capacity_rows, criteria_report, emit_sweep, load_spec, run_prepared, write_csv, write_json, write_jsonl,
    ExperimentSpec, Format, Recipe, RecipeOutput, SweepConfig, Verdict, CAPACITY_HEADER,
};
use dvoretzky::sequences::diagnostics;
use dvoretzky::{parse_sequence, ArcSet, DensityAnalysis};

/// Random covering of the circle by intervals with non-uniform centers.
#[derive(Parser, Debug)]
#[command(name = "dvoretzky", version)]
struct Cli {
    /// Base seed; trial i uses a seed derived from (seed, i).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo trials. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv, jsonl or json.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// TOML or JSON file mirroring the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Essential infimum, K_f and the dom_1 check of a density.
    Density(DensityArgs),
    /// Partial sums and classification of the series criteria.
    Seq(SeqArgs),
    /// Energy truncation ladder of a measure.
    Capacity(CapacityArgs),
    /// Monte Carlo covering trials, one JSONL record per trial.
    Sim(SimArgs),
    /// Uncovered-measure decay for l_n = c/n over a grid of c.
    Sweep(SweepArgs),
    /// Covering verdict with every sub-verdict.
    Criteria(CriteriaArgs),
    /// Run a named experiment recipe.
    Repro(ReproArgs),
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// uniform, tent, step:lo:hi:split, fatcantor:depth, or a TOML/JSON file.
    #[arg(long)]
    density: String,
    /// Points where the one-sided essential bounds are reported.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
}

#[derive(Args, Debug)]
struct SeqArgs {
    /// harmonic:c, power:a:t, const:l, logharmonic, blockA:k, blockB:k:c, file:path.
    #[arg(long)]
    seq: String,
    /// Shepp intensities.
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    #[arg(long, default_value = "100000", value_parser = count)]
    n_max: u64,
    #[arg(long, default_value = "log:8")]
    checkpoints: String,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    #[arg(long)]
    seq: String,
    #[arg(long)]
    a: f64,
    /// Support set for `lebesgue` and `grid:level` measures, e.g. arc:0:0.5.
    #[arg(long)]
    set: Option<String>,
    /// lebesgue, grid:level, atom:x, atoms:x1,x2, lebesgue:a:b, grid:a:b:level.
    #[arg(long, default_value = "lebesgue")]
    measure: String,
    #[arg(long, value_delimiter = ',', value_parser = count, default_value = "1e3,1e4,1e5")]
    truncations: Vec<u64>,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    density: String,
    #[arg(long)]
    seq: String,
    #[arg(long, value_parser = count)]
    n: u64,
    #[arg(long, default_value = "64", value_parser = count)]
    trials: u64,
    /// full, grid:n, points:x1,..., arc:a:b, or a `+`-joined union.
    #[arg(long, default_value = "full")]
    target: String,
    #[arg(long, default_value = "log:8")]
    checkpoints: String,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value = "uniform")]
    density: String,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.8")]
    c_grid: Vec<f64>,
    /// Exact evaluation steps, up to --n-max.
    #[arg(long, default_value = "log:8")]
    exact_grid: String,
    #[arg(long, default_value = "100000", value_parser = count)]
    n_max: u64,
    /// Monte Carlo steps, up to --mc-max; `none` skips trials.
    #[arg(long, default_value = "log:4")]
    mc_grid: String,
    #[arg(long, default_value = "10000", value_parser = count)]
    mc_max: u64,
    /// Fit range `lo,hi` for the log-log slope.
    #[arg(long, value_delimiter = ',', value_parser = count, default_value = "1e3,1e5")]
    fit: Vec<u64>,
    #[arg(long, default_value = "256", value_parser = count)]
    trials: u64,
}

#[derive(Args, Debug)]
struct CriteriaArgs {
    #[arg(long)]
    density: String,
    #[arg(long)]
    seq: String,
    /// Extra Shepp intensities to report.
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
}

#[derive(Args, Debug)]
struct ReproArgs {
    /// phase_transition, criteria_report, section5_c1c2, section6_blocks,
    /// comparison or billard. Omit when --spec names one.
    recipe: Option<Recipe>,
    /// Experiment spec file (TOML or JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Parameter override `key=value`; values are read as JSON, else as strings.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

/// Accepts `1000`, `1e6` and `1_000`.
fn count(s: &str) -> Result<u64, String> {
    let t = s.replace('_', "");
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    match t.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

struct Output {
    format: Option<Format>,
    path: Option<PathBuf>,
}

impl Output {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn write(&self, body: impl FnOnce(&mut dyn Write) -> dvoretzky::Result<()>) -> Result<()> {
        let mut w: Box<dyn Write> = match &self.path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        };
        body(&mut *w)?;
        w.flush()?;
        Ok(())
    }

    /// A single report as JSON, or one JSONL line.
    fn report<T: Serialize>(&self, value: &T) -> Result<()> {
        match self.format(Format::Json) {
            Format::Json => self.write(|w| write_json(value, w)),
            Format::Jsonl => self.write(|w| write_jsonl(std::slice::from_ref(value), w)),
            Format::Csv => bail!("this output is not tabular; use --format json or jsonl"),
        }
    }
}

#[derive(Serialize)]
struct DensityOut {
    density: String,
    breakpoints: Vec<f64>,
    analysis: DensityAnalysis,
    /// `(x, E_f(x), E^bar_f(x))`.
    local: Vec<(f64, f64, f64)>,
}

fn density_cmd(a: &DensityArgs, out: &Output) -> Result<bool> {
    let f = parse_density(&a.density)?;
    let report = DensityOut {
        density: f.origin().unwrap_or("piecewise").to_string(),
        breakpoints: f.breakpoints(),
        analysis: DensityAnalysis::new(&f),
        local: a.x.iter().map(|&x| (x, local_ess_inf(&f, x), local_ess_sup(&f, x))).collect(),
    };
    out.report(&report)?;
    Ok(false)
}

fn seq_cmd(a: &SeqArgs, out: &Output) -> Result<bool> {
    let seq = parse_sequence(&a.seq)?;
    let cps = parse_checkpoints(&a.checkpoints, a.n_max)?;
    let d = diagnostics(&seq, &a.a, &cps)?;
    if out.format(Format::Json) != Format::Csv {
        out.report(&d)?;
        return Ok(false);
    }
    let mut header = vec!["n".to_string(), "sum".into(), "sum_sq".into(), "s2".into()];
    header.extend(a.a.iter().map(|x| format!("shepp_log_a{x}")));
    let rows: Vec<Vec<String>> = (0..d.checkpoints.len())
        .map(|i| {
            let mut r = vec![d.checkpoints[i].to_string()];
            r.extend([d.sum[i], d.sum_sq[i], d.s2[i]].map(|v| v.to_string()));
            r.extend(d.shepp.iter().map(|(_, logs, _)| logs[i].to_string()));
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write(|w| write_csv(&h, &rows, w))?;
    Ok(false)
}

fn capacity_cmd(a: &CapacityArgs, out: &Output) -> Result<bool> {
    let seq = parse_sequence(&a.seq)?;
    let set = a.set.as_deref().map(ArcSet::parse).transpose()?;
    let sigma = match (a.measure.as_str(), &set) {
        ("lebesgue", Some(s)) => SupportMeasure::lebesgue(s.clone())?,
        (m, Some(s)) if m.starts_with("grid:") && m.matches(':').count() == 1 => {
            SupportMeasure::dyadic_grid(s, count(&m[5..]).map_err(anyhow::Error::msg)? as u32)?
        }
        (m, _) => SupportMeasure::parse(m)?,
    };
    let mut ts = a.truncations.clone();
    ts.sort_unstable();
    ts.dedup();
    let ladder = ts
        .iter()
        .map(|&n| energy(&KernelPhi::new(&seq, a.a, n)?, &sigma))
        .collect::<dvoretzky::Result<Vec<_>>>()?;
    let logs: Vec<f64> = ladder.iter().map(|e| e.log_value).collect();
    let growth = classify_ladder(&logs);
    let rows = capacity_rows(&ladder, growth);
    match out.format(Format::Csv) {
        Format::Csv => out.write(|w| write_csv(&CAPACITY_HEADER, &rows, w))?,
        Format::Jsonl => out.write(|w| write_jsonl(&rows, w))?,
        Format::Json => out.write(|w| write_json(&rows, w))?,
    }
    Ok(growth == dvoretzky::capacity::Growth::Inconclusive)
}

fn sim_cmd(a: &SimArgs, seed: u64, out: &Output) -> Result<bool> {
    let config = TrialConfig {
        density: parse_density(&a.density)?,
        lengths: parse_sequence(&a.seq)?,
        n_max: a.n,
        target: Target::parse(&a.target)?,
        seed,
        checkpoints: parse_checkpoints(&a.checkpoints, a.n)?,
    };
    config.validate()?;
    let results = run_trials(&config, a.trials)?;
    match out.format(Format::Jsonl) {
        Format::Jsonl => out.write(|w| write_jsonl(&results, w))?,
        Format::Json => out.write(|w| write_json(&results, w))?,
        Format::Csv => bail!("trial records are nested; use --format jsonl or json"),
    }
    Ok(false)
}

fn sweep_cmd(a: &SweepArgs, seed: u64, out: &Output) -> Result<bool> {
    let [lo, hi] = a.fit[..] else {
        bail!("--fit takes two values lo,hi");
    };
    let config = SweepConfig {
        c_grid: a.c_grid.clone(),
        exact_grid: parse_checkpoints(&a.exact_grid, a.n_max)?,
        mc_grid: if a.mc_grid == "none" || a.mc_max == 0 {
            Vec::new()
        } else {
            parse_checkpoints(&a.mc_grid, a.mc_max)?
        },
        fit_range: (lo, hi),
        trials: a.trials,
        seed,
    };
    config.validate()?;
    let f = parse_density(&a.density)?;
    let result = dvoretzky::harness::phase_transition_sweep(&f, &config)?;
    let format = out.format(Format::Csv);
    out.write(|w| emit_sweep(&result, format, w))?;
    Ok(false)
}

fn criteria_cmd(a: &CriteriaArgs, out: &Output) -> Result<bool> {
    let f = parse_density(&a.density)?;
    let seq = parse_sequence(&a.seq)?;
    let r = criteria_report(&f, &seq, &a.a)?;
    out.report(&r)?;
    eprintln!("verdict: {}", r.verdict);
    Ok(matches!(r.verdict, Verdict::Inconclusive | Verdict::HypothesesUnmet))
}

fn repro_cmd(a: &ReproArgs, seed: Option<u64>, out: &Output) -> Result<bool> {
    let mut spec = match (&a.spec, a.recipe) {
        (Some(p), r) => {
            let s = load_spec(p)?;
            if r.is_some_and(|r| r != s.recipe) {
                bail!("recipe argument disagrees with the spec file");
            }
            s
        }
        (None, Some(recipe)) => ExperimentSpec {
            recipe,
            params: Map::new(),
            seed: 0,
            out: None,
        },
        (None, None) => bail!("name a recipe or pass --spec"),
    };
    for kv in &a.params {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--param expects key=value, got `{kv}`");
        };
        let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        spec.params.insert(k.to_string(), v);
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let out = Output {
        format: out.format,
        path: out.path.clone().or_else(|| spec.out.clone()),
    };
    let prepared = spec.prepare()?;
    let result = run_prepared(&prepared)?;
    match (&result, out.format(Format::Json)) {
        (RecipeOutput::PhaseTransition(r), Format::Csv) => out.write(|w| emit_sweep(r, Format::Csv, w))?,
        _ => out.report(&result)?,
    }
    Ok(result.inconclusive())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = Output {
        format: cli.format,
        path: cli.out.clone(),
    };
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Density(a) => density_cmd(a, &out),
        Command::Seq(a) => seq_cmd(a, &out),
        Command::Capacity(a) => capacity_cmd(a, &out),
        Command::Sim(a) => sim_cmd(a, seed, &out),
        Command::Sweep(a) => sweep_cmd(a, seed, &out),
        Command::Criteria(a) => criteria_cmd(a, &out),
        Command::Repro(a) => repro_cmd(a, cli.seed, &out),
    }
}

fn main() -> ExitCode {
    let argv = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    // clap exits with 2 on usage errors
    let cli = Cli::parse_from(argv);
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
