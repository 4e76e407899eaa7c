//! `align`, `multi-align` and `evaluate`.

use std::path::{Path, PathBuf};

use clap::Args;
use hubalign::embedio::{load_embeddings, EmbeddingSpace, NormStep, DEFAULT_MAX_VOCAB};
use hubalign::kvfile::{self, KeyValues};
use hubalign::lexicon::{read_lexicon, write_lexicon, Lexicon};
use hubalign::mapping::{load_map, save_map, self_learn, RefinementConfig, SeedStrategy, StopReason, DEFAULT_SIMILARITY_VOCAB};
use hubalign::multialign::{align_to_hub, load_multispace, save_multispace, Manifest};
use hubalign::retrieval::{precision_at_k, retrieve, EvalResult, RetrievalConfig, RetrievalRun, DEFAULT_CSLS_K};

use crate::settings::{config_err, CliResult, List, Settings, VocabCap};
use crate::table::{fmt_f, write_file, Table};

/// Normalization pipeline as written in configs: `unit,center,unit` or `none`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormList(pub Vec<NormStep>);

impl std::str::FromStr for NormList {
    type Err = hubalign::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NormStep::parse_list(s).map(NormList)
    }
}

impl std::fmt::Display for NormList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return f.write_str("none");
        }
        let steps: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&steps.join(","))
    }
}

#[derive(Debug, Clone, Args)]
pub struct EmbeddingArgs {
    /// Preprocessing steps, e.g. `unit,center,unit` or `none`.
    #[arg(long)]
    pub normalize: Option<NormList>,
    /// Words to read per embedding file (`unlimited` for all).
    #[arg(long)]
    pub max_vocab: Option<VocabCap>,
}

pub struct EmbeddingSettings {
    normalize: Vec<NormStep>,
    max_vocab: Option<usize>,
}

impl EmbeddingArgs {
    pub fn resolve(self, s: &mut Settings) -> CliResult<EmbeddingSettings> {
        let normalize = s.value(self.normalize, "normalize", NormList(NormStep::default_pipeline()))?.0;
        let max_vocab = s.value(self.max_vocab, "max_vocab", VocabCap(Some(DEFAULT_MAX_VOCAB)))?.0;
        Ok(EmbeddingSettings { normalize, max_vocab })
    }
}

impl EmbeddingSettings {
    pub fn load(&self, path: &Path, lang: &str) -> CliResult<EmbeddingSpace> {
        Ok(load_embeddings(path, lang, self.max_vocab)?.normalized(&self.normalize))
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainingArgs {
    /// Seed dictionary: identical, numerals, similarity or similarity:N.
    #[arg(long)]
    pub seed: Option<SeedStrategy>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Words per language considered when inducing dictionaries.
    #[arg(long)]
    pub induction_vocab: Option<usize>,
    /// CSLS neighbourhood size.
    #[arg(long)]
    pub csls_k: Option<usize>,
    /// Stop once the dictionary size changes by less than this fraction.
    #[arg(long)]
    pub stop_delta: Option<f64>,
}

impl TrainingArgs {
    fn resolve(self, s: &mut Settings) -> CliResult<(SeedStrategy, RefinementConfig)> {
        let d = RefinementConfig::default();
        let seed = s.value(self.seed, "seed", SeedStrategy::default())?;
        let cfg = RefinementConfig {
            max_iters: s.value(self.max_iters, "max_iters", d.max_iters)?,
            induction_vocab: s.value(self.induction_vocab, "induction_vocab", d.induction_vocab)?,
            csls_k: s.value(self.csls_k, "csls_k", d.csls_k)?,
            stop_delta: s.value(self.stop_delta, "stop_delta", d.stop_delta)?,
        };
        cfg.validate().map_err(config_err)?;
        Ok((seed, cfg))
    }
}

fn resolve_ks(s: &mut Settings, flag: Option<List<usize>>) -> CliResult<Vec<usize>> {
    let mut ks = s.value(flag, "ks", List(vec![1, 5, 10]))?.0;
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() || ks.contains(&0) {
        return Err(config_err("ks must be a non-empty list of positive integers"));
    }
    Ok(ks)
}

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| hubalign::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

pub fn stop_code(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Unchanged => "unchanged",
        StopReason::SmallChange => "small-change",
        StopReason::MaxIters => "max-iters",
    }
}

/// Retrieves the gold sources and scores them.
fn evaluate_run(src: &EmbeddingSpace, trg: &EmbeddingSpace, gold: &Lexicon, ks: &[usize], csls_k: usize) -> CliResult<(RetrievalRun, EvalResult)> {
    let k_max = *ks.iter().max().expect("ks is non-empty");
    if k_max > trg.len() {
        return Err(config_err(format!("k = {k_max} exceeds the {} target words", trg.len())));
    }
    let queries = gold.sources();
    let run = retrieve(src, trg, &queries, RetrievalConfig { csls_k, k_max })?;
    let eval = precision_at_k(&run, gold, ks)?;
    Ok((run, eval))
}

fn eval_header(ks: &[usize]) -> Vec<String> {
    let mut h = vec!["pair".to_string(), "hub".to_string()];
    h.extend(ks.iter().map(|k| format!("P@{k}")));
    h.extend(["n_evaluated".to_string(), "n_skipped_oov".to_string()]);
    h
}

fn eval_row(pair: &str, hub: &str, eval: &EvalResult) -> Vec<String> {
    let mut row = vec![pair.to_string(), hub.to_string()];
    row.extend(eval.p_at.values().map(|p| fmt_f(100.0 * p, 2)));
    row.extend([eval.n_evaluated.to_string(), eval.n_skipped_oov.to_string()]);
    row
}

fn hits_table(eval: &EvalResult) -> Table {
    let mut header = vec!["query".to_string()];
    header.extend(eval.per_query_hits.keys().map(|k| format!("hit@{k}")));
    let mut t = Table::new(header);
    for (i, q) in eval.queries.iter().enumerate() {
        let mut row = vec![q.clone()];
        row.extend(eval.per_query_hits.values().map(|h| if h[i] { "1" } else { "0" }.to_string()));
        t.push(row);
    }
    t
}

#[derive(Debug, Clone, Args)]
pub struct AlignArgs {
    /// Source language code.
    #[arg(long)]
    pub src: Option<String>,
    /// Target language code.
    #[arg(long)]
    pub trg: Option<String>,
    /// Source embeddings (default: `lang.<src>` from the config).
    #[arg(long)]
    pub src_emb: Option<PathBuf>,
    #[arg(long)]
    pub trg_emb: Option<PathBuf>,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
    /// Gold dictionary to evaluate the learned map on.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Precision cutoffs, e.g. `1,5,10`.
    #[arg(long)]
    pub ks: Option<List<usize>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_align(args: AlignArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let src_lang: String = s.required(args.src, "src")?;
    let trg_lang: String = s.required(args.trg, "trg")?;
    let src_path = s.embedding_path(args.src_emb, &src_lang)?;
    let trg_path = s.embedding_path(args.trg_emb, &trg_lang)?;
    let (strategy, cfg) = args.training.resolve(s)?;
    let emb = args.embeddings.resolve(s)?;
    let gold_path = s.optional_input(args.gold, "gold")?;
    let ks = resolve_ks(s, args.ks)?;
    let out = s.output_path(args.out, "out")?;

    let src = emb.load(&src_path, &src_lang)?;
    let trg = emb.load(&trg_path, &trg_lang)?;
    let gold = gold_path.map(|p| read_lexicon(p, &src_lang, &trg_lang)).transpose()?;

    let mut used = strategy;
    let mut seed = strategy.build(&src, &trg)?;
    if seed.is_empty() && matches!(strategy, SeedStrategy::Identical { .. }) {
        log::warn!("no identical strings in the two vocabularies; using the similarity seed");
        used = SeedStrategy::Similarity {
            vocab_cap: DEFAULT_SIMILARITY_VOCAB,
        };
        seed = used.build(&src, &trg)?;
    }
    log::info!("seed dictionary ({used}): {} pairs", seed.len());
    let outcome = self_learn(&src, &trg, &seed, &cfg)?;
    let evaluation = match &gold {
        Some(g) => Some(evaluate_run(&outcome.map.apply_space(&src)?, &trg, g, &ks, cfg.csls_k)?.1),
        None => None,
    };

    let mut iterations = Table::new(["iteration", "train_size", "objective", "induced_size"]);
    for (i, it) in outcome.iterations.iter().enumerate() {
        iterations.push(vec![
            (i + 1).to_string(),
            it.train_size.to_string(),
            format!("{:.6e}", it.objective),
            it.induced_size.to_string(),
        ]);
    }
    let mut header: Vec<String> = ["src", "trg", "seed", "seed_size", "iterations", "dictionary_size", "stop"]
        .map(String::from)
        .to_vec();
    let mut row = vec![
        src_lang.clone(),
        trg_lang.clone(),
        used.to_string(),
        seed.len().to_string(),
        outcome.iterations.len().to_string(),
        outcome.dictionary.len().to_string(),
        stop_code(outcome.stop).to_string(),
    ];
    if let Some(eval) = &evaluation {
        for (k, p) in &eval.p_at {
            header.push(format!("P@{k}"));
            row.push(fmt_f(100.0 * p, 2));
        }
        header.extend(["n_evaluated".to_string(), "n_skipped_oov".to_string()]);
        row.extend([eval.n_evaluated.to_string(), eval.n_skipped_oov.to_string()]);
    }
    let mut report = Table::new(header);
    report.push(row);

    create_dir(&out)?;
    save_map(&outcome.map, out.join(format!("{src_lang}-{trg_lang}.map")))?;
    write_lexicon(&outcome.dictionary, out.join("dictionary.txt"))?;
    iterations.write_csv(&out.join("iterations.csv"))?;
    report.write_csv(&out.join("report.csv"))?;
    write_file(&out.join("run.txt"), &s.run_record("align", random_seed))?;

    print!("{}\n{}", iterations.aligned(), report.aligned());
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct MultiAlignArgs {
    /// Manifest with `hub`, `lang.<code>` and training keys; the global
    /// config is used when omitted.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Hub language code.
    #[arg(long)]
    pub hub: Option<String>,
    /// Extra language as `code=path`; repeatable.
    #[arg(long = "lang", value_name = "CODE=PATH")]
    pub langs: Vec<String>,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_multi_align(args: MultiAlignArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let (mut kv, base) = match &args.manifest {
        Some(p) => {
            if !p.is_file() {
                return Err(config_err(format!("manifest {} does not exist", p.display())));
            }
            (kvfile::read_kv(p).map_err(config_err)?, p.parent().unwrap_or(Path::new(".")).to_path_buf())
        }
        None => (s.file_entries().clone(), s.base().to_path_buf()),
    };
    let mut set = |key: &str, v: Option<String>| {
        if let Some(v) = v {
            kv.insert(key.to_string(), v);
        }
    };
    let t = args.training;
    set("hub", args.hub);
    set("seed", t.seed.map(|v| v.to_string()));
    set("max_iters", t.max_iters.map(|v| v.to_string()));
    set("induction_vocab", t.induction_vocab.map(|v| v.to_string()));
    set("csls_k", t.csls_k.map(|v| v.to_string()));
    set("stop_delta", t.stop_delta.map(|v| v.to_string()));
    set("normalize", args.embeddings.normalize.map(|v| v.to_string()));
    set("max_vocab", args.embeddings.max_vocab.map(|v| v.to_string()));
    for spec in &args.langs {
        let (code, path) = spec
            .split_once('=')
            .ok_or_else(|| config_err(format!("--lang expects CODE=PATH, got `{spec}`")))?;
        let abs = std::path::absolute(path).map_err(|e| config_err(format!("{path}: {e}")))?;
        kv.insert(format!("lang.{code}"), abs.display().to_string());
    }
    let manifest = Manifest::from_kv(&kv, &base).map_err(config_err)?;
    for (lang, p) in &manifest.languages {
        if !p.is_file() {
            return Err(config_err(format!("lang.{lang}: {} does not exist", p.display())));
        }
    }
    let out = s.output_path(args.out, "out")?;

    let spaces = manifest.load_spaces()?;
    let ms = align_to_hub(spaces, &manifest.hub, manifest.seed, &manifest.refinement)?;

    let mut report = Table::new(["lang", "hub", "seed", "seed_size", "iterations", "dictionary_size", "stop"]);
    for lang in ms.languages() {
        match ms.report(lang) {
            Some(r) => report.push(vec![
                lang.to_string(),
                ms.hub().to_string(),
                r.seed.to_string(),
                r.seed_size.to_string(),
                r.iterations.to_string(),
                r.dictionary_size.to_string(),
                stop_code(r.stop).to_string(),
            ]),
            None => report.push(vec![lang.to_string(), ms.hub().to_string(), "-".into(), "0".into(), "0".into(), "0".into(), "hub".into()]),
        }
    }

    create_dir(&out)?;
    save_multispace(&ms, &manifest, &out)?;
    report.write_csv(&out.join("report.csv"))?;
    let mut record = KeyValues::new();
    record.insert("command".into(), "multi-align".into());
    record.insert("random_seed".into(), random_seed.to_string());
    record.extend(manifest.to_kv());
    write_file(&out.join("run.txt"), &kvfile::format_kv(&record))?;

    print!("{}", report.aligned());
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Multi-space directory (or its manifest.txt) written by multi-align.
    #[arg(long, conflicts_with = "map")]
    pub model: Option<PathBuf>,
    /// Bilingual map written by align.
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub src: Option<String>,
    #[arg(long)]
    pub trg: Option<String>,
    #[arg(long)]
    pub src_emb: Option<PathBuf>,
    #[arg(long)]
    pub trg_emb: Option<PathBuf>,
    #[command(flatten)]
    pub embeddings: EmbeddingArgs,
    /// Gold dictionary, `source target` per line.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub ks: Option<List<usize>>,
    #[arg(long)]
    pub csls_k: Option<usize>,
    /// CSV file for the evaluation table.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV file with per-query hits, the input of `bootstrap`.
    #[arg(long)]
    pub hits_out: Option<PathBuf>,
}

pub fn cmd_evaluate(args: EvaluateArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let src_lang: String = s.required(args.src, "src")?;
    let trg_lang: String = s.required(args.trg, "trg")?;
    let gold_path = s.input_path(args.gold, "gold")?;
    let ks = resolve_ks(s, args.ks)?;
    let csls_k = s.value(args.csls_k, "csls_k", DEFAULT_CSLS_K)?;
    if csls_k == 0 {
        return Err(config_err("csls_k must be positive"));
    }
    let out = match args.out {
        Some(p) => Some(s.output_path(Some(p), "out")?),
        None => None,
    };
    let hits_out = match args.hits_out {
        Some(p) => Some(s.output_path(Some(p), "hits_out")?),
        None => None,
    };

    let model = s.optional_input(args.model, "model")?;
    let (mapped_src, trg, hub) = match model {
        Some(model) => {
            let manifest = if model.is_dir() { model.join("manifest.txt") } else { model };
            if !manifest.is_file() {
                return Err(config_err(format!("{} does not exist", manifest.display())));
            }
            let (ms, _) = load_multispace(&manifest)?;
            let src = ms.hub_space(&src_lang)?;
            let trg = ms.hub_space(&trg_lang)?;
            (src, trg, ms.hub().to_string())
        }
        None => {
            let map_path = s.input_path(args.map, "map")?;
            let src_path = s.embedding_path(args.src_emb, &src_lang)?;
            let trg_path = s.embedding_path(args.trg_emb, &trg_lang)?;
            let emb = args.embeddings.resolve(s)?;
            let map = load_map(&map_path)?;
            if map.src_lang() != src_lang || map.trg_lang() != trg_lang {
                return Err(config_err(format!(
                    "map {} is {}->{}, not {src_lang}->{trg_lang}",
                    map_path.display(),
                    map.src_lang(),
                    map.trg_lang()
                )));
            }
            let src = map.apply_space(&emb.load(&src_path, &src_lang)?)?;
            (src, emb.load(&trg_path, &trg_lang)?, trg_lang.clone())
        }
    };
    let gold = read_lexicon(&gold_path, &src_lang, &trg_lang)?;
    let (_, eval) = evaluate_run(&mapped_src, &trg, &gold, &ks, csls_k)?;

    let mut table = Table::new(eval_header(&ks));
    table.push(eval_row(&format!("{src_lang}-{trg_lang}"), &hub, &eval));
    if let Some(p) = &out {
        table.write_csv(p)?;
        write_file(&run_path(p), &s.run_record("evaluate", random_seed))?;
    }
    if let Some(p) = &hits_out {
        hits_table(&eval).write_csv(p)?;
    }
    print!("{}", table.aligned());
    Ok(())
}

/// `<file>.run` next to an output file.
pub fn run_path(p: &Path) -> PathBuf {
    let mut name = p.file_name().unwrap_or_default().to_os_string();
    name.push(".run");
    p.with_file_name(name)
}
