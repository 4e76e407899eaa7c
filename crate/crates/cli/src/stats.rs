//! `gain`, `gh`, `correlate` and `bootstrap`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::Args;
use hubalign::analysis::{
    correlate, expected_gain, gh_distance, hub_distance_correlation, load_distances, read_result_matrix,
    CorrelationMethod, DEFAULT_GH_SAMPLE,
};
use hubalign::embedio::NormStep;
use hubalign::retrieval::paired_bootstrap;
use hubalign::Error;

use crate::align::{run_path, NormList};
use crate::settings::{config_err, CliError, CliResult, Settings};
use crate::table::{fmt_f, write_file, Table};

fn write_outputs(s: &Settings, command: &str, random_seed: u64, out: Option<&Path>, table: &Table) -> CliResult<()> {
    if let Some(p) = out {
        table.write_csv(p)?;
        write_file(&run_path(p), &s.run_record(command, random_seed))?;
    }
    print!("{}", table.aligned());
    Ok(())
}

fn optional_out(s: &mut Settings, flag: Option<PathBuf>) -> CliResult<Option<PathBuf>> {
    match flag {
        Some(p) => Ok(Some(s.output_path(Some(p), "out")?)),
        None => Ok(None),
    }
}

#[derive(Debug, Clone, Args)]
pub struct GainArgs {
    /// P@1 table: pair label column, then one column per hub.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_gain(args: GainArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let table_path = s.input_path(args.table, "table")?;
    let out = optional_out(s, args.out)?;
    let rm = read_result_matrix(&table_path)?;
    let g = expected_gain(&rm)?;

    let mut t = Table::new(["hub", "overall", "when_best", "best_count", "mu", "gap_to_best"]);
    for (l, hub) in g.hubs.iter().enumerate() {
        t.push(vec![
            hub.clone(),
            fmt_f(g.overall[l], 4),
            g.when_best[l].map_or("-".into(), |v| fmt_f(v, 4)),
            g.best_counts[l].to_string(),
            fmt_f(g.mu[l], 4),
            fmt_f(g.mu_best - g.mu[l], 4),
        ]);
    }
    write_outputs(s, "gain", random_seed, out.as_deref(), &t)?;
    println!("mu_best {}", fmt_f(g.mu_best, 4));
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct GhArgs {
    /// First embedding file.
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Second embedding file.
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Most frequent words taken from each space.
    #[arg(long)]
    pub sample_n: Option<usize>,
    #[arg(long)]
    pub normalize: Option<NormList>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_gh(args: GhArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let a_path = s.input_path(args.a, "a")?;
    let b_path = s.input_path(args.b, "b")?;
    let sample_n = s.value(args.sample_n, "sample_n", DEFAULT_GH_SAMPLE)?;
    if sample_n < 2 {
        return Err(config_err("sample_n must be at least 2"));
    }
    let normalize = s.value(args.normalize, "normalize", NormList(NormStep::default_pipeline()))?.0;
    let out = optional_out(s, args.out)?;

    let load = |p: &Path, lang: &str| -> CliResult<_> {
        Ok(hubalign::load_embeddings(p, lang, Some(sample_n))?.normalized(&normalize))
    };
    let a = load(&a_path, "a")?;
    let b = load(&b_path, "b")?;
    let gh = gh_distance(&a, &b, sample_n, random_seed)?;

    let mut t = Table::new(["a", "b", "sample_n", "random_seed", "gh"]);
    t.push(vec![
        a_path.display().to_string(),
        b_path.display().to_string(),
        sample_n.to_string(),
        random_seed.to_string(),
        fmt_f(gh, 6),
    ]);
    write_outputs(s, "gh", random_seed, out.as_deref(), &t)
}

/// `pearson`, `spearman` or `both`.
fn methods(raw: &str) -> CliResult<Vec<CorrelationMethod>> {
    match raw {
        "both" => Ok(vec![CorrelationMethod::Pearson, CorrelationMethod::Spearman]),
        m => Ok(vec![m.parse().map_err(config_err)?]),
    }
}

fn method_name(m: CorrelationMethod) -> &'static str {
    match m {
        CorrelationMethod::Pearson => "pearson",
        CorrelationMethod::Spearman => "spearman",
    }
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    /// CSV with a header row; correlates columns `--x` and `--y`.
    #[arg(long, conflicts_with_all = ["table", "distances"])]
    pub input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    pub x: Option<String>,
    #[arg(long, requires = "input")]
    pub y: Option<String>,
    /// P@1 table; correlates, per pair, P@1 with d(src, hub) + d(trg, hub).
    #[arg(long, requires = "distances")]
    pub table: Option<PathBuf>,
    /// Language distances, `src,trg,value` rows.
    #[arg(long, requires = "table")]
    pub distances: Option<PathBuf>,
    /// pearson, spearman or both.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_columns(path: &Path, x: &str, y: &str) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let data_err = |line: usize, msg: String| {
        CliError::Data(Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        })
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| data_err(1, e.to_string()))?;
    let headers = reader.headers().map_err(|e| data_err(1, e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| config_err(format!("{} has no column `{name}`", path.display())))
    };
    let (cx, cy) = (col(x)?, col(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| data_err(i + 2, e.to_string()))?;
        let num = |c: usize| {
            let raw = rec.get(c).unwrap_or("").trim();
            raw.parse::<f64>().map_err(|_| data_err(i + 2, format!("bad number `{raw}`")))
        };
        xs.push(num(cx)?);
        ys.push(num(cy)?);
    }
    Ok((xs, ys))
}

pub fn cmd_correlate(args: CorrelateArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let methods = methods(&s.value(args.method, "method", "pearson".to_string())?)?;
    let out = optional_out(s, args.out)?;
    let mut t = Table::new(["method", "n", "coefficient"]);

    if let Some(input) = args.input {
        let input = s.input_path(Some(input), "input")?;
        let x: String = s.required(args.x, "x")?;
        let y: String = s.required(args.y, "y")?;
        let (xs, ys) = read_columns(&input, &x, &y)?;
        for m in methods {
            let r = correlate(&xs, &ys, m)?;
            t.push(vec![method_name(m).into(), xs.len().to_string(), fmt_f(r, 6)]);
        }
    } else {
        let table = s.input_path(args.table, "table")?;
        let distances = s.input_path(args.distances, "distances")?;
        let rm = read_result_matrix(&table)?;
        let d = load_distances(&distances)?;
        for m in methods {
            let (r, used) = hub_distance_correlation(&rm, m, |src, trg, hub| Some(d.get(src, hub)? + d.get(trg, hub)?))?;
            t.push(vec![method_name(m).into(), used.to_string(), fmt_f(r, 6)]);
        }
    }
    write_outputs(s, "correlate", random_seed, out.as_deref(), &t)
}

#[derive(Debug, Clone, Args)]
pub struct BootstrapArgs {
    /// Per-query hits of system A, as written by `evaluate --hits-out`.
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Which `hit@k` column to compare.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_hits(path: &Path, k: usize) -> CliResult<Vec<(String, bool)>> {
    let data_err = |line: usize, msg: String| {
        CliError::Data(Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        })
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| data_err(1, e.to_string()))?;
    let headers = reader.headers().map_err(|e| data_err(1, e.to_string()))?.clone();
    let name = format!("hit@{k}");
    let col = headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| data_err(1, format!("no `{name}` column")))?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| data_err(i + 2, e.to_string()))?;
        let hit = match rec.get(col) {
            Some("1") => true,
            Some("0") => false,
            other => return Err(data_err(i + 2, format!("expected 0 or 1, got {other:?}"))),
        };
        out.push((rec.get(0).unwrap_or("").to_string(), hit));
    }
    Ok(out)
}

pub fn cmd_bootstrap(args: BootstrapArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let a_path = s.input_path(args.a, "a")?;
    let b_path = s.input_path(args.b, "b")?;
    let k = s.value(args.k, "k", 1usize)?;
    let iterations = s.value(args.iterations, "iterations", 10_000usize)?;
    if iterations == 0 {
        return Err(config_err("iterations must be positive"));
    }
    let out = optional_out(s, args.out)?;

    let a = read_hits(&a_path, k)?;
    let b: HashMap<String, bool> = read_hits(&b_path, k)?.into_iter().collect();
    if a.len() != b.len() {
        return Err(CliError::Data(Error::Invalid(format!(
            "hit files cover different queries ({} vs {})",
            a.len(),
            b.len()
        ))));
    }
    let mut ha = Vec::with_capacity(a.len());
    let mut hb = Vec::with_capacity(a.len());
    for (q, hit) in &a {
        let other = b
            .get(q)
            .ok_or_else(|| CliError::Data(Error::Invalid(format!("query `{q}` missing from {}", b_path.display()))))?;
        ha.push(*hit);
        hb.push(*other);
    }
    let p = paired_bootstrap(&ha, &hb, iterations, random_seed)?;
    let acc = |h: &[bool]| 100.0 * h.iter().filter(|&&x| x).count() as f64 / h.len() as f64;

    let mut t = Table::new(["n", "k", "acc_a", "acc_b", "iterations", "random_seed", "p_value"]);
    t.push(vec![
        ha.len().to_string(),
        k.to_string(),
        fmt_f(acc(&ha), 2),
        fmt_f(acc(&hb), 2),
        iterations.to_string(),
        random_seed.to_string(),
        fmt_f(p, 4),
    ]);
    write_outputs(s, "bootstrap", random_seed, out.as_deref(), &t)
}
