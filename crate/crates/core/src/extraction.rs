//! Word-pair dictionaries from word-aligned parallel text.
//!
//! Directional alignments come in Pharaoh format (`i-j` per link, one
//! sentence per line, `i` indexing the source side). They are symmetrized
//! with grow-diag-final-and, counted, and thresholded.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

/// Links `(source index, target index)`, kept sorted in row-major order.
pub type Alignment = BTreeSet<(usize, usize)>;

/// Neighbour offsets for the grow step. Diagonal neighbours are visited
/// before horizontal and vertical ones.
pub const NEIGHBORS: [(isize, isize); 8] = [(-1, -1), (-1, 1), (1, -1), (1, 1), (-1, 0), (0, -1), (1, 0), (0, 1)];

fn check_range(links: &Alignment, src_len: usize, trg_len: usize) -> Result<()> {
    match links.iter().find(|&&(i, j)| i >= src_len || j >= trg_len) {
        Some(&(i, j)) => Err(Error::Invalid(format!("alignment link {i}-{j} outside a {src_len}x{trg_len} sentence pair"))),
        None => Ok(()),
    }
}

/// grow-diag-final-and symmetrization.
///
/// Starts from the intersection. The grow step scans accepted links in
/// row-major order, visiting each one's neighbours in [`NEIGHBORS`] order, and
/// adds a union link when its source or its target word is still unaligned;
/// scans repeat until nothing changes. The final-and step then adds forward
/// links, then reverse links, in row-major order, whose source and target
/// words are both unaligned.
pub fn symmetrize_gdfa(forward: &Alignment, reverse: &Alignment, src_len: usize, trg_len: usize) -> Result<Alignment> {
    check_range(forward, src_len, trg_len)?;
    check_range(reverse, src_len, trg_len)?;

    let mut grid = Grid::new(src_len, trg_len);
    for &(i, j) in forward.intersection(reverse) {
        grid.accept(i, j);
    }

    let union: Alignment = forward.union(reverse).copied().collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..src_len {
            for j in 0..trg_len {
                if !grid.is_accepted(i, j) {
                    continue;
                }
                for (di, dj) in NEIGHBORS {
                    let (Some(ni), Some(nj)) = (i.checked_add_signed(di), j.checked_add_signed(dj)) else {
                        continue;
                    };
                    if ni >= src_len || nj >= trg_len || grid.is_accepted(ni, nj) || !union.contains(&(ni, nj)) {
                        continue;
                    }
                    if grid.src_aligned[ni] == 0 || grid.trg_aligned[nj] == 0 {
                        grid.accept(ni, nj);
                        changed = true;
                    }
                }
            }
        }
    }

    for links in [forward, reverse] {
        for &(i, j) in links {
            if grid.src_aligned[i] == 0 && grid.trg_aligned[j] == 0 {
                grid.accept(i, j);
            }
        }
    }

    Ok(grid.links())
}

struct Grid {
    trg_len: usize,
    accepted: Vec<bool>,
    src_aligned: Vec<usize>,
    trg_aligned: Vec<usize>,
}

impl Grid {
    fn new(src_len: usize, trg_len: usize) -> Self {
        Grid {
            trg_len,
            accepted: vec![false; src_len * trg_len],
            src_aligned: vec![0; src_len],
            trg_aligned: vec![0; trg_len],
        }
    }

    fn is_accepted(&self, i: usize, j: usize) -> bool {
        self.accepted[i * self.trg_len + j]
    }

    fn accept(&mut self, i: usize, j: usize) {
        self.accepted[i * self.trg_len + j] = true;
        self.src_aligned[i] += 1;
        self.trg_aligned[j] += 1;
    }

    fn links(&self) -> Alignment {
        self.accepted
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(k, _)| (k / self.trg_len, k % self.trg_len))
            .collect()
    }
}

/// Parses one Pharaoh line such as `0-0 1-2 2-1`.
pub fn parse_pharaoh(line: &str) -> std::result::Result<Alignment, String> {
    line.split_whitespace()
        .map(|link| {
            let (i, j) = link.split_once('-').ok_or_else(|| format!("malformed link `{link}`"))?;
            let i = i.parse().map_err(|_| format!("malformed link `{link}`"))?;
            let j = j.parse().map_err(|_| format!("malformed link `{link}`"))?;
            Ok((i, j))
        })
        .collect()
}

pub fn format_pharaoh(links: &Alignment) -> String {
    links.iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub src: Vec<String>,
    pub trg: Vec<String>,
    pub forward: Alignment,
    pub reverse: Alignment,
}

/// A tokenized parallel corpus with both directional alignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedBitext {
    pub src_lang: String,
    pub trg_lang: String,
    pub sentences: Vec<SentencePair>,
}

impl AlignedBitext {
    pub fn new(src_lang: &str, trg_lang: &str) -> Self {
        AlignedBitext {
            src_lang: src_lang.into(),
            trg_lang: trg_lang.into(),
            sentences: Vec::new(),
        }
    }

    /// Adds a sentence pair after checking both alignments index into it.
    pub fn push(&mut self, pair: SentencePair) -> Result<()> {
        check_range(&pair.forward, pair.src.len(), pair.trg.len())?;
        check_range(&pair.reverse, pair.src.len(), pair.trg.len())?;
        self.sentences.push(pair);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Symmetrizes every sentence.
    pub fn symmetrized(&self) -> Vec<Alignment> {
        self.sentences
            .par_iter()
            .map(|s| symmetrize_gdfa(&s.forward, &s.reverse, s.src.len(), s.trg.len()).expect("ranges checked on push"))
            .collect()
    }
}

/// Bitext file paths: two token files and two Pharaoh alignment files, all
/// line-parallel.
#[derive(Debug, Clone, Copy)]
pub struct BitextFiles<'a> {
    pub src_tokens: &'a Path,
    pub trg_tokens: &'a Path,
    pub forward: &'a Path,
    pub reverse: &'a Path,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))
}

pub fn read_bitext(files: BitextFiles<'_>, src_lang: &str, trg_lang: &str) -> Result<AlignedBitext> {
    let src = read_lines(files.src_tokens)?;
    let trg = read_lines(files.trg_tokens)?;
    let fwd = read_lines(files.forward)?;
    let rev = read_lines(files.reverse)?;
    for (path, lines) in [(files.trg_tokens, &trg), (files.forward, &fwd), (files.reverse, &rev)] {
        if lines.len() != src.len() {
            return Err(Error::parse(
                path,
                lines.len().min(src.len()) + 1,
                format!("expected {} lines to match {}", src.len(), files.src_tokens.display()),
            ));
        }
    }

    let mut bitext = AlignedBitext::new(src_lang, trg_lang);
    for (n, (((s, t), f), r)) in src.iter().zip(&trg).zip(&fwd).zip(&rev).enumerate() {
        let forward = parse_pharaoh(f).map_err(|m| Error::parse(files.forward, n + 1, m))?;
        let reverse = parse_pharaoh(r).map_err(|m| Error::parse(files.reverse, n + 1, m))?;
        let src_toks: Vec<String> = s.split_whitespace().map(String::from).collect();
        let trg_toks: Vec<String> = t.split_whitespace().map(String::from).collect();
        check_range(&forward, src_toks.len(), trg_toks.len()).map_err(|e| Error::parse(files.forward, n + 1, e.to_string()))?;
        check_range(&reverse, src_toks.len(), trg_toks.len()).map_err(|e| Error::parse(files.reverse, n + 1, e.to_string()))?;
        bitext.push(SentencePair {
            src: src_toks,
            trg: trg_toks,
            forward,
            reverse,
        })?;
    }
    Ok(bitext)
}

/// Co-occurrence counts over symmetrized links.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairStats {
    pub src_lang: String,
    pub trg_lang: String,
    pub cooc: HashMap<(String, String), u64>,
    pub src_marginal: HashMap<String, u64>,
    pub trg_marginal: HashMap<String, u64>,
    /// Every source token occurrence, aligned or not.
    pub src_freq: HashMap<String, u64>,
}

impl PairStats {
    fn new(src_lang: &str, trg_lang: &str) -> Self {
        PairStats {
            src_lang: src_lang.into(),
            trg_lang: trg_lang.into(),
            ..Default::default()
        }
    }

    fn add_sentence(&mut self, pair: &SentencePair, links: &Alignment) {
        for tok in &pair.src {
            *self.src_freq.entry(tok.clone()).or_default() += 1;
        }
        for &(i, j) in links {
            let (s, t) = (&pair.src[i], &pair.trg[j]);
            *self.cooc.entry((s.clone(), t.clone())).or_default() += 1;
            *self.src_marginal.entry(s.clone()).or_default() += 1;
            *self.trg_marginal.entry(t.clone()).or_default() += 1;
        }
    }

    /// Adds another shard's counts. Pure addition, so shard order is irrelevant.
    pub fn merge(mut self, other: PairStats) -> PairStats {
        fn add<K: std::hash::Hash + Eq>(into: &mut HashMap<K, u64>, from: HashMap<K, u64>) {
            for (k, v) in from {
                *into.entry(k).or_default() += v;
            }
        }
        add(&mut self.cooc, other.cooc);
        add(&mut self.src_marginal, other.src_marginal);
        add(&mut self.trg_marginal, other.trg_marginal);
        add(&mut self.src_freq, other.src_freq);
        self
    }
}

/// Counts aligned pairs; `symmetrized[k]` holds the links of sentence `k`.
pub fn count_pairs(bitext: &AlignedBitext, symmetrized: &[Alignment]) -> Result<PairStats> {
    if symmetrized.len() != bitext.len() {
        return Err(Error::DimensionMismatch {
            expected: bitext.len(),
            found: symmetrized.len(),
        });
    }
    for (pair, links) in bitext.sentences.iter().zip(symmetrized) {
        check_range(links, pair.src.len(), pair.trg.len())?;
    }
    let (sl, tl) = (bitext.src_lang.as_str(), bitext.trg_lang.as_str());
    Ok(bitext
        .sentences
        .par_iter()
        .zip(symmetrized.par_iter())
        .fold(
            || PairStats::new(sl, tl),
            |mut acc, (pair, links)| {
                acc.add_sentence(pair, links);
                acc
            },
        )
        .reduce(|| PairStats::new(sl, tl), PairStats::merge))
}

/// Which count the minimum-count threshold is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountBasis {
    /// The pair's co-occurrence count.
    #[default]
    Cooccurrence,
    /// The source word's corpus frequency.
    SourceFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractConfig {
    /// Counts must be strictly greater than this.
    pub min_count: u64,
    /// Both conditional probabilities must be strictly greater than this.
    pub min_prob: f64,
    pub basis: CountBasis,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            min_count: 5,
            min_prob: 0.30,
            basis: CountBasis::Cooccurrence,
        }
    }
}

/// One extracted pair with its statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub src: String,
    pub trg: String,
    pub count: u64,
    pub p_trg_given_src: f64,
    pub p_src_given_trg: f64,
}

/// Pairs passing both thresholds, sorted by source frequency (descending,
/// ties by source word), then by co-occurrence (descending, ties by target).
pub fn extract_scored(stats: &PairStats, cfg: &ExtractConfig) -> Vec<ScoredPair> {
    let mut out: Vec<ScoredPair> = stats
        .cooc
        .iter()
        .filter_map(|((s, t), &c)| {
            let basis = match cfg.basis {
                CountBasis::Cooccurrence => c,
                CountBasis::SourceFrequency => stats.src_freq.get(s).copied().unwrap_or(0),
            };
            if basis <= cfg.min_count {
                return None;
            }
            let fwd = c as f64 / stats.src_marginal[s] as f64;
            let rev = c as f64 / stats.trg_marginal[t] as f64;
            (fwd > cfg.min_prob && rev > cfg.min_prob).then(|| ScoredPair {
                src: s.clone(),
                trg: t.clone(),
                count: c,
                p_trg_given_src: fwd,
                p_src_given_trg: rev,
            })
        })
        .collect();
    let freq = |w: &str| stats.src_freq.get(w).copied().unwrap_or(0);
    out.sort_by(|a, b| {
        freq(&b.src)
            .cmp(&freq(&a.src))
            .then_with(|| a.src.cmp(&b.src))
            .then_with(|| b.count.cmp(&a.count))
            .then_with(|| a.trg.cmp(&b.trg))
    });
    out
}

pub fn extract_pairs(stats: &PairStats, cfg: &ExtractConfig) -> Lexicon {
    Lexicon::from_pairs(
        &stats.src_lang,
        &stats.trg_lang,
        extract_scored(stats, cfg).into_iter().map(|p| (p.src, p.trg)),
    )
}

/// Keeps the entries of source words whose rank `r` (0-based, over distinct
/// source words in lexicon order) satisfies `lo <= r < hi`.
pub fn eval_band(lex: &Lexicon, lo: usize, hi: usize) -> Lexicon {
    let ranks: HashMap<&str, usize> = lex.sources().into_iter().zip(0..).collect();
    lex.filtered(|s, _| (lo..hi).contains(&ranks[s]))
}

pub const DEFAULT_BAND: (usize, usize) = (5000, 6500);
