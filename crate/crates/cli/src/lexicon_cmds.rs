//! `triangulate`, `filter-morph` and `extract`.

use std::collections::HashSet;
use std::path::PathBuf;

use clap::Args;
use hubalign::extraction::{
    count_pairs, eval_band, extract_scored, read_bitext, BitextFiles, CountBasis, ExtractConfig,
};
use hubalign::lexicon::{read_lexicon, triangulate, write_lexicon, Lexicon};
use hubalign::morph::{morph_filter, read_morph_table};

use crate::align::run_path;
use crate::settings::{config_err, CliResult, Settings};
use crate::table::{fmt_f, write_file, Table};

#[derive(Debug, Clone, Args)]
pub struct TagArgs {
    /// Source-side analyses: form, lemma, UPOS, features (tab-separated).
    #[arg(long)]
    pub src_tags: Option<PathBuf>,
    #[arg(long)]
    pub trg_tags: Option<PathBuf>,
    /// Features left out of the comparison; `none` compares everything.
    #[arg(long)]
    pub ignore: Option<String>,
}

fn ignored_features(s: &mut Settings, flag: Option<String>) -> CliResult<HashSet<String>> {
    let raw = s.value(flag, "ignore", "Gender,VerbForm".to_string())?;
    if raw.trim() == "none" {
        return Ok(HashSet::new());
    }
    Ok(raw.split(',').map(str::trim).filter(|f| !f.is_empty()).map(String::from).collect())
}

fn lexicon_summary(rows: &[(&str, &Lexicon)]) -> Table {
    let mut t = Table::new(["stage", "sources", "entries"]);
    for (stage, lex) in rows {
        t.push(vec![stage.to_string(), lex.sources().len().to_string(), lex.len().to_string()]);
    }
    t
}

#[derive(Debug, Clone, Args)]
pub struct TriangulateArgs {
    #[arg(long)]
    pub src: Option<String>,
    #[arg(long)]
    pub pivot: Option<String>,
    #[arg(long)]
    pub trg: Option<String>,
    /// Source-to-pivot dictionary.
    #[arg(long)]
    pub src_pivot: Option<PathBuf>,
    /// Pivot-to-target dictionary.
    #[arg(long)]
    pub pivot_trg: Option<PathBuf>,
    #[command(flatten)]
    pub tags: TagArgs,
    /// Output dictionary.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_triangulate(args: TriangulateArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let src: String = s.required(args.src, "src")?;
    let pivot: String = s.required(args.pivot, "pivot")?;
    let trg: String = s.required(args.trg, "trg")?;
    let sp_path = s.input_path(args.src_pivot, "src_pivot")?;
    let pt_path = s.input_path(args.pivot_trg, "pivot_trg")?;
    let src_tags = s.optional_input(args.tags.src_tags, "src_tags")?;
    let trg_tags = s.optional_input(args.tags.trg_tags, "trg_tags")?;
    if src_tags.is_some() != trg_tags.is_some() {
        return Err(config_err("morphological filtering needs both --src-tags and --trg-tags"));
    }
    let ignored = ignored_features(s, args.tags.ignore)?;
    let out = s.output_path(args.out, "out")?;

    let sp = read_lexicon(&sp_path, &src, &pivot)?;
    let pt = read_lexicon(&pt_path, &pivot, &trg)?;
    let raw = triangulate(&sp, &pt)?;
    let result = match (src_tags, trg_tags) {
        (Some(a), Some(b)) => {
            let a = read_morph_table(a, &src)?;
            let b = read_morph_table(b, &trg)?;
            Some(morph_filter(&raw, &a, &b, &ignored))
        }
        _ => None,
    };

    let mut stages = vec![("triangulated", &raw)];
    if let Some(f) = &result {
        stages.push(("filtered", f));
    }
    let summary = lexicon_summary(&stages);
    write_lexicon(result.as_ref().unwrap_or(&raw), &out)?;
    write_file(&run_path(&out), &s.run_record("triangulate", random_seed))?;
    print!("{}", summary.aligned());
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct FilterMorphArgs {
    /// Dictionary to filter.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub src: Option<String>,
    #[arg(long)]
    pub trg: Option<String>,
    #[command(flatten)]
    pub tags: TagArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_filter_morph(args: FilterMorphArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let src: String = s.required(args.src, "src")?;
    let trg: String = s.required(args.trg, "trg")?;
    let lex_path = s.input_path(args.lexicon, "lexicon")?;
    let src_tags = s.input_path(args.tags.src_tags, "src_tags")?;
    let trg_tags = s.input_path(args.tags.trg_tags, "trg_tags")?;
    let ignored = ignored_features(s, args.tags.ignore)?;
    let out = s.output_path(args.out, "out")?;

    let lex = read_lexicon(&lex_path, &src, &trg)?;
    let a = read_morph_table(&src_tags, &src)?;
    let b = read_morph_table(&trg_tags, &trg)?;
    let kept = morph_filter(&lex, &a, &b, &ignored);

    write_lexicon(&kept, &out)?;
    write_file(&run_path(&out), &s.run_record("filter-morph", random_seed))?;
    print!("{}", lexicon_summary(&[("input", &lex), ("filtered", &kept)]).aligned());
    Ok(())
}

/// Count basis as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis(pub CountBasis);

impl std::str::FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cooc" => Ok(Basis(CountBasis::Cooccurrence)),
            "src-freq" => Ok(Basis(CountBasis::SourceFrequency)),
            other => Err(format!("unknown count basis `{other}` (cooc or src-freq)")),
        }
    }
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self.0 {
            CountBasis::Cooccurrence => "cooc",
            CountBasis::SourceFrequency => "src-freq",
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub src: Option<String>,
    #[arg(long)]
    pub trg: Option<String>,
    /// Tokenized source sentences, one per line.
    #[arg(long)]
    pub src_tokens: Option<PathBuf>,
    #[arg(long)]
    pub trg_tokens: Option<PathBuf>,
    /// Source-to-target alignments, `i-j` pairs per line.
    #[arg(long)]
    pub forward: Option<PathBuf>,
    #[arg(long)]
    pub reverse: Option<PathBuf>,
    /// Counts must exceed this.
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Both translation probabilities must exceed this.
    #[arg(long)]
    pub min_prob: Option<f64>,
    /// What the count threshold applies to: cooc or src-freq.
    #[arg(long)]
    pub count_basis: Option<Basis>,
    /// Keep only source words ranked `lo:hi` (0-based, end exclusive).
    #[arg(long)]
    pub band: Option<crate::settings::Band>,
    /// Output dictionary.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV with counts and probabilities of every extracted pair.
    #[arg(long)]
    pub scored_out: Option<PathBuf>,
}

pub fn cmd_extract(args: ExtractArgs, s: &mut Settings, random_seed: u64) -> CliResult<()> {
    let src: String = s.required(args.src, "src")?;
    let trg: String = s.required(args.trg, "trg")?;
    let src_tokens = s.input_path(args.src_tokens, "src_tokens")?;
    let trg_tokens = s.input_path(args.trg_tokens, "trg_tokens")?;
    let forward = s.input_path(args.forward, "forward")?;
    let reverse = s.input_path(args.reverse, "reverse")?;
    let d = ExtractConfig::default();
    let cfg = ExtractConfig {
        min_count: s.value(args.min_count, "min_count", d.min_count)?,
        min_prob: s.value(args.min_prob, "min_prob", d.min_prob)?,
        basis: s.value(args.count_basis, "count_basis", Basis(d.basis))?.0,
    };
    if !(0.0..1.0).contains(&cfg.min_prob) {
        return Err(config_err(format!("min_prob must lie in [0, 1), got {}", cfg.min_prob)));
    }
    let band = s.optional(args.band, "band")?;
    let out = s.output_path(args.out, "out")?;
    let scored_out = match args.scored_out {
        Some(p) => Some(s.output_path(Some(p), "scored_out")?),
        None => None,
    };

    let files = BitextFiles {
        src_tokens: &src_tokens,
        trg_tokens: &trg_tokens,
        forward: &forward,
        reverse: &reverse,
    };
    let bitext = read_bitext(files, &src, &trg)?;
    let stats = count_pairs(&bitext, &bitext.symmetrized())?;
    let scored = extract_scored(&stats, &cfg);
    let lex = Lexicon::from_pairs(&src, &trg, scored.iter().map(|p| (p.src.as_str(), p.trg.as_str())));
    let kept = match band {
        Some(b) => eval_band(&lex, b.0, b.1),
        None => lex.clone(),
    };

    let mut summary = Table::new(["sentences", "aligned_pairs", "extracted", "sources", "written"]);
    summary.push(vec![
        bitext.len().to_string(),
        stats.cooc.len().to_string(),
        lex.len().to_string(),
        lex.sources().len().to_string(),
        kept.len().to_string(),
    ]);

    write_lexicon(&kept, &out)?;
    if let Some(p) = &scored_out {
        let keep: HashSet<(&str, &str)> = kept.entries().iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let mut t = Table::new(["src", "trg", "count", "src_freq", "p_trg_given_src", "p_src_given_trg"]);
        for p in scored.iter().filter(|p| keep.contains(&(p.src.as_str(), p.trg.as_str()))) {
            t.push(vec![
                p.src.clone(),
                p.trg.clone(),
                p.count.to_string(),
                stats.src_freq.get(&p.src).copied().unwrap_or(0).to_string(),
                fmt_f(p.p_trg_given_src, 6),
                fmt_f(p.p_src_given_trg, 6),
            ]);
        }
        t.write_csv(p)?;
    }
    write_file(&run_path(&out), &s.run_record("extract", random_seed))?;
    print!("{}", summary.aligned());
    Ok(())
}
