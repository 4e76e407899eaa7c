//! Orthogonal bilingual mappings.
//!
//! A word vector `x` (a row) is carried into the target space as `x·W` with
//! `W` orthogonal. Given paired rows `X`, `Y`, the minimizer of `‖XW − Y‖_F`
//! over orthogonal `W` is `U·Vᵀ`, where `XᵀY = U·Σ·Vᵀ`.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::embedio::{unit_rows, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::retrieval::CslsScorer;

/// Tolerance on `‖W·Wᵀ − I‖_∞` for a matrix to count as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

/// A square orthogonal transform from `src_lang` coordinates into `trg_lang`'s.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMap {
    src_lang: String,
    trg_lang: String,
    w: DMatrix<f64>,
}

impl OrthogonalMap {
    pub fn new(src_lang: impl Into<String>, trg_lang: impl Into<String>, w: DMatrix<f64>) -> Result<Self> {
        if !w.is_square() || w.nrows() == 0 {
            return Err(Error::Invalid(format!("map must be square, got {}x{}", w.nrows(), w.ncols())));
        }
        let err = orthogonality_error(&w);
        if err.is_nan() || err > ORTHOGONALITY_TOL {
            return Err(Error::Invalid(format!("matrix is not orthogonal (max deviation {err:e})")));
        }
        Ok(OrthogonalMap {
            src_lang: src_lang.into(),
            trg_lang: trg_lang.into(),
            w,
        })
    }

    pub fn identity(lang: &str, dim: usize) -> Self {
        OrthogonalMap {
            src_lang: lang.into(),
            trg_lang: lang.into(),
            w: DMatrix::identity(dim, dim),
        }
    }

    pub fn src_lang(&self) -> &str {
        &self.src_lang
    }

    pub fn trg_lang(&self) -> &str {
        &self.trg_lang
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// Maps row vectors: `rows·W`.
    pub fn apply(&self, rows: &DMatrix<f64>) -> DMatrix<f64> {
        rows * &self.w
    }

    /// Maps every vector of `space` into the target coordinates.
    pub fn apply_space(&self, space: &EmbeddingSpace) -> Result<EmbeddingSpace> {
        if space.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: space.dim(),
            });
        }
        space.with_vectors(self.apply(space.vectors()))
    }

    /// The inverse map, `Wᵀ`.
    pub fn inverse(&self) -> OrthogonalMap {
        OrthogonalMap {
            src_lang: self.trg_lang.clone(),
            trg_lang: self.src_lang.clone(),
            w: self.w.transpose(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &OrthogonalMap) -> Result<OrthogonalMap> {
        if self.trg_lang != next.src_lang {
            return Err(Error::LanguageMismatch {
                left: self.trg_lang.clone(),
                right: next.src_lang.clone(),
            });
        }
        OrthogonalMap::new(self.src_lang.clone(), next.trg_lang.clone(), &self.w * &next.w)
    }
}

/// `‖W·Wᵀ − I‖_∞` as the largest absolute entry.
pub fn orthogonality_error(w: &DMatrix<f64>) -> f64 {
    let g = w * w.transpose();
    let n = g.nrows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Orthogonal Procrustes: the orthogonal `W` minimizing `‖X·W − Y‖_F`, where
/// row `i` of `x` and `y` hold a translation pair.
pub fn procrustes(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows() * x.ncols(),
            found: y.nrows() * y.ncols(),
        });
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Invalid("procrustes needs at least one pair".into()));
    }
    let m = x.transpose() * y;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::SvdFailure);
    }
    let svd = m.try_svd(true, true, f64::EPSILON, 0).ok_or(Error::SvdFailure)?;
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(Error::SvdFailure),
    }
}

/// Stacks the vectors of dictionary pairs present in both vocabularies.
fn paired_rows(src: &EmbeddingSpace, trg: &EmbeddingSpace, dict: &Lexicon) -> (DMatrix<f64>, DMatrix<f64>) {
    let (si, ti): (Vec<usize>, Vec<usize>) = dict
        .entries()
        .iter()
        .filter_map(|(s, t)| Some((src.index_of(s)?, trg.index_of(t)?)))
        .unzip();
    (src.vectors().select_rows(si.iter()), trg.vectors().select_rows(ti.iter()))
}

/// Solves Procrustes on the in-vocabulary pairs of `dict`.
pub fn fit_dictionary(src: &EmbeddingSpace, trg: &EmbeddingSpace, dict: &Lexicon) -> Result<OrthogonalMap> {
    if src.dim() != trg.dim() {
        return Err(Error::DimensionMismatch {
            expected: src.dim(),
            found: trg.dim(),
        });
    }
    let (x, y) = paired_rows(src, trg, dict);
    if x.nrows() == 0 {
        return Err(Error::EmptySeed);
    }
    OrthogonalMap::new(src.language(), trg.language(), procrustes(&x, &y)?)
}

/// Mean squared residual `‖x·W − y‖²` over the in-vocabulary pairs of `dict`.
pub fn mean_residual(src: &EmbeddingSpace, trg: &EmbeddingSpace, dict: &Lexicon, map: &OrthogonalMap) -> Option<f64> {
    let (x, y) = paired_rows(src, trg, dict);
    if x.nrows() == 0 {
        return None;
    }
    Some((map.apply(&x) - y).norm_squared() / x.nrows() as f64)
}

/// Pairs every word spelled identically in both vocabularies, in source
/// vocabulary order. Matching is case-sensitive. With `numerals_only`, only
/// tokens made of ASCII digits are kept.
pub fn seed_identical(a: &EmbeddingSpace, b: &EmbeddingSpace, numerals_only: bool) -> Lexicon {
    let is_numeral = |w: &str| !w.is_empty() && w.bytes().all(|c| c.is_ascii_digit());
    Lexicon::from_pairs(
        a.language(),
        b.language(),
        a.words()
            .iter()
            .filter(|w| b.index_of(w).is_some())
            .filter(|w| !numerals_only || is_numeral(w))
            .map(|w| (w.as_str(), w.as_str())),
    )
}

pub const DEFAULT_SIMILARITY_VOCAB: usize = 2000;

/// Unsupervised seed from monolingual similarity distributions.
///
/// For the first `vocab_cap` words of each space, each word's signature is
/// its row of the monolingual cosine matrix, square-rooted (negatives clamped
/// to 0) and sorted descending. Because signatures do not depend on the
/// coordinate system, words can be matched across unaligned spaces: each
/// source word is paired with the target word whose signature is nearest in
/// Euclidean distance.
pub fn seed_monolingual_similarity(a: &EmbeddingSpace, b: &EmbeddingSpace, vocab_cap: usize) -> Result<Lexicon> {
    if vocab_cap == 0 {
        return Err(Error::Invalid("similarity seed needs a positive vocabulary size".into()));
    }
    let n = vocab_cap.min(a.len()).min(b.len());
    if n < vocab_cap {
        log::warn!("similarity seed vocabulary clamped from {vocab_cap} to {n}");
    }
    let sa = similarity_signatures(a, n);
    let sb = similarity_signatures(b, n);
    let cross = &sa * sb.transpose();
    let norms_b: Vec<f64> = sb.row_iter().map(|r| r.norm_squared()).collect();

    let mut lex = Lexicon::new(a.language(), b.language());
    for i in 0..n {
        // ‖sa_i − sb_j‖² up to the constant ‖sa_i‖²
        let best = (0..n)
            .map(|j| (j, norms_b[j] - 2.0 * cross[(i, j)]))
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
            .map(|(j, _)| j)
            .expect("n >= 1");
        lex.insert(a.words()[i].as_str(), b.words()[best].as_str());
    }
    Ok(lex)
}

fn similarity_signatures(space: &EmbeddingSpace, n: usize) -> DMatrix<f64> {
    let mut x = space.vectors().rows(0, n).into_owned();
    unit_rows(&mut x);
    let sims = &x * x.transpose();
    let mut sig = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut row: Vec<f64> = sims.row(i).iter().map(|s| s.max(0.0).sqrt()).collect();
        row.sort_unstable_by(|p, q| q.total_cmp(p));
        for (j, v) in row.into_iter().enumerate() {
            sig[(i, j)] = v;
        }
    }
    sig
}

/// Parameters of the self-learning loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementConfig {
    pub max_iters: usize,
    /// Dictionary induction considers the first `induction_vocab` words of each space.
    pub induction_vocab: usize,
    pub csls_k: usize,
    /// Stop once the induced dictionary's relative size change drops below this.
    pub stop_delta: f64,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        RefinementConfig {
            max_iters: 10,
            induction_vocab: 10_000,
            csls_k: 10,
            stop_delta: 0.01,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.induction_vocab == 0 || self.csls_k == 0 {
            return Err(Error::Invalid("max_iters, induction_vocab and csls_k must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.stop_delta) {
            return Err(Error::Invalid(format!("stop_delta must lie in [0, 1), got {}", self.stop_delta)));
        }
        Ok(())
    }
}

/// Why the self-learning loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Unchanged,
    SmallChange,
    MaxIters,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Unchanged => "dictionary unchanged",
            StopReason::SmallChange => "dictionary size change below threshold",
            StopReason::MaxIters => "iteration limit reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    /// Pairs the map was fitted on.
    pub train_size: usize,
    /// Mean squared residual of the fitted map on those pairs.
    pub objective: f64,
    /// Pairs induced with the fitted map.
    pub induced_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfLearnOutcome {
    pub map: OrthogonalMap,
    pub dictionary: Lexicon,
    pub iterations: Vec<IterationStats>,
    pub stop: StopReason,
}

fn pair_set(lex: &Lexicon) -> HashSet<&(String, String)> {
    lex.entries().iter().collect()
}

/// Mutual CSLS nearest neighbours between the first `cfg.induction_vocab`
/// words of `src` (mapped by `map`) and of `trg`.
pub fn induce_dictionary(src: &EmbeddingSpace, trg: &EmbeddingSpace, map: &OrthogonalMap, cfg: &RefinementConfig) -> Result<Lexicon> {
    let ns = cfg.induction_vocab.min(src.len());
    let nt = cfg.induction_vocab.min(trg.len());
    let queries = map.apply(&src.vectors().rows(0, ns).into_owned());
    let candidates = trg.vectors().rows(0, nt).into_owned();
    let scorer = CslsScorer::new(&queries, &candidates, cfg.csls_k)?;
    Ok(Lexicon::from_pairs(
        src.language(),
        trg.language(),
        scorer
            .mutual_nearest()
            .into_iter()
            .map(|(i, j)| (src.words()[i].as_str(), trg.words()[j].as_str())),
    ))
}

/// Iterative refinement: fit on the current dictionary, re-induce a
/// dictionary of mutual CSLS nearest neighbours, repeat.
///
/// Stops when the induced dictionary equals the one just used, when its size
/// changes by less than `stop_delta` relative to it, or after `max_iters`
/// rounds. Returns the last fitted map and the last induced dictionary.
pub fn self_learn(src: &EmbeddingSpace, trg: &EmbeddingSpace, seed: &Lexicon, cfg: &RefinementConfig) -> Result<SelfLearnOutcome> {
    cfg.validate()?;
    if seed.is_empty() {
        return Err(Error::EmptySeed);
    }
    let mut dict = seed.clone();
    let mut iterations = Vec::new();
    loop {
        let iteration = iterations.len() + 1;
        let map = fit_dictionary(src, trg, &dict)?;
        let train_size = paired_rows(src, trg, &dict).0.nrows();
        let objective = mean_residual(src, trg, &dict, &map).unwrap_or(0.0);
        let induced = induce_dictionary(src, trg, &map, cfg)?;
        if induced.is_empty() {
            return Err(Error::EmptyInducedDictionary { iteration });
        }
        iterations.push(IterationStats {
            train_size,
            objective,
            induced_size: induced.len(),
        });
        log::debug!("iteration {iteration}: fitted on {train_size} pairs, induced {}", induced.len());

        let stop = if pair_set(&induced) == pair_set(&dict) {
            Some(StopReason::Unchanged)
        } else if (induced.len() as f64 - dict.len() as f64).abs() / (dict.len() as f64) < cfg.stop_delta {
            Some(StopReason::SmallChange)
        } else if iteration >= cfg.max_iters {
            Some(StopReason::MaxIters)
        } else {
            None
        };
        match stop {
            Some(stop) => {
                return Ok(SelfLearnOutcome {
                    map,
                    dictionary: induced,
                    iterations,
                    stop,
                })
            }
            None => dict = induced,
        }
    }
}

/// Which seed dictionary to start self-learning from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStrategy {
    Identical { numerals_only: bool },
    Similarity { vocab_cap: usize },
}

impl Default for SeedStrategy {
    fn default() -> Self {
        SeedStrategy::Identical { numerals_only: false }
    }
}

impl SeedStrategy {
    pub fn build(&self, a: &EmbeddingSpace, b: &EmbeddingSpace) -> Result<Lexicon> {
        match *self {
            SeedStrategy::Identical { numerals_only } => Ok(seed_identical(a, b, numerals_only)),
            SeedStrategy::Similarity { vocab_cap } => seed_monolingual_similarity(a, b, vocab_cap),
        }
    }
}

impl FromStr for SeedStrategy {
    type Err = Error;

    /// `identical`, `numerals`, `similarity` or `similarity:N`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identical" => Ok(SeedStrategy::Identical { numerals_only: false }),
            "numerals" => Ok(SeedStrategy::Identical { numerals_only: true }),
            "similarity" => Ok(SeedStrategy::Similarity {
                vocab_cap: DEFAULT_SIMILARITY_VOCAB,
            }),
            other => match other.strip_prefix("similarity:").map(str::parse) {
                Some(Ok(n)) if n > 0 => Ok(SeedStrategy::Similarity { vocab_cap: n }),
                _ => Err(Error::Invalid(format!("unknown seed strategy `{other}`"))),
            },
        }
    }
}

impl fmt::Display for SeedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedStrategy::Identical { numerals_only: false } => f.write_str("identical"),
            SeedStrategy::Identical { numerals_only: true } => f.write_str("numerals"),
            SeedStrategy::Similarity { vocab_cap } => write!(f, "similarity:{vocab_cap}"),
        }
    }
}

/// Writes a map as `d src trg` followed by `d` rows of `d` decimals.
pub fn save_map(map: &OrthogonalMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "{} {} {}", map.dim(), map.src_lang, map.trg_lang)?;
        for row in map.w.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(" "))?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

pub fn load_map(path: impl AsRef<Path>) -> Result<OrthogonalMap> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (d, src, trg) = match fields.as_slice() {
        [d, s, t] => (
            d.parse::<usize>().ok().filter(|&d| d > 0).ok_or_else(|| Error::parse(path, 1, "bad dimension"))?,
            s.to_string(),
            t.to_string(),
        ),
        _ => return Err(Error::parse(path, 1, "expected `d src_lang trg_lang`")),
    };
    let mut values = Vec::with_capacity(d * d);
    for r in 0..d {
        let line = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .ok_or_else(|| Error::parse(path, r + 2, "missing row"))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse(path, r + 2, format!("bad value `{v}`"))))
            .collect::<Result<_>>()?;
        if row.len() != d {
            return Err(Error::parse(path, r + 2, format!("expected {d} values, found {}", row.len())));
        }
        values.extend(row);
    }
    let w = DMatrix::from_row_slice(d, d, &values);
    OrthogonalMap::new(src, trg, w).map_err(|e| Error::parse(path, 1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(lang: &str, words: &[&str], rows: &[Vec<f64>]) -> EmbeddingSpace {
        EmbeddingSpace::from_rows(lang, words.iter().map(|w| w.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn identity_alignment() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.3, 0.0, 1.0]);
        let w = procrustes(&x, &x).unwrap();
        assert!((w - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-9);
    }

    #[test]
    fn quarter_turn() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        // (1,0) -> (0,1), (0,1) -> (-1,0)
        let y = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let w = procrustes(&x, &y).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((w - expected).abs().max() < 1e-12);
    }

    #[test]
    fn procrustes_errors() {
        let x = DMatrix::<f64>::zeros(3, 2);
        let y = DMatrix::<f64>::zeros(2, 2);
        assert!(procrustes(&x, &y).is_err());
        let bad = DMatrix::from_row_slice(1, 2, &[f64::NAN, 0.0]);
        assert!(matches!(procrustes(&bad, &bad), Err(Error::SvdFailure)));
    }

    #[test]
    fn rank_deficient_input_still_orthogonal() {
        let x = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let w = procrustes(&x, &x).unwrap();
        assert!(orthogonality_error(&w) < 1e-12);
    }

    #[test]
    fn map_construction_checks_orthogonality() {
        assert!(OrthogonalMap::new("a", "b", DMatrix::from_element(2, 2, 1.0)).is_err());
        assert!(OrthogonalMap::new("a", "b", DMatrix::zeros(2, 3)).is_err());
        let m = OrthogonalMap::identity("a", 3);
        assert_eq!(m.inverse().src_lang(), "a");
    }

    #[test]
    fn identical_seeds() {
        let a = space("a", &["a", "b", "1990"], &[vec![1.0], vec![1.0], vec![1.0]]);
        let b = space("b", &["b", "c", "1990"], &[vec![1.0], vec![1.0], vec![1.0]]);
        let lex = seed_identical(&a, &b, false);
        assert_eq!(lex.entries(), [("b".into(), "b".into()), ("1990".into(), "1990".into())]);
        let lex = seed_identical(&a, &b, true);
        assert_eq!(lex.entries(), [("1990".into(), "1990".into())]);
        let c = space("c", &["x"], &[vec![1.0]]);
        assert!(seed_identical(&a, &c, false).is_empty());
    }

    #[test]
    fn identical_seed_is_case_sensitive() {
        let a = space("a", &["Paris"], &[vec![1.0]]);
        let b = space("b", &["paris"], &[vec![1.0]]);
        assert!(seed_identical(&a, &b, false).is_empty());
    }

    #[test]
    fn similarity_seed_single_word() {
        let a = space("a", &["x", "y"], &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let b = space("b", &["p", "q"], &[vec![0.6, 0.8], vec![1.0, 0.0]]);
        let lex = seed_monolingual_similarity(&a, &b, 1).unwrap();
        assert_eq!(lex.entries(), [("x".into(), "p".into())]);
        assert!(seed_monolingual_similarity(&a, &b, 0).is_err());
        assert_eq!(seed_monolingual_similarity(&a, &b, 10).unwrap().len(), 2);
    }

    #[test]
    fn seed_strategy_parsing() {
        assert_eq!("identical".parse::<SeedStrategy>().unwrap(), SeedStrategy::Identical { numerals_only: false });
        assert_eq!("numerals".parse::<SeedStrategy>().unwrap(), SeedStrategy::Identical { numerals_only: true });
        assert_eq!("similarity:300".parse::<SeedStrategy>().unwrap(), SeedStrategy::Similarity { vocab_cap: 300 });
        for s in ["identical", "numerals", "similarity:12"] {
            assert_eq!(s.parse::<SeedStrategy>().unwrap().to_string(), s);
        }
        assert!("similarity:0".parse::<SeedStrategy>().is_err());
        assert!("random".parse::<SeedStrategy>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RefinementConfig::default().validate().is_ok());
        let bad = RefinementConfig {
            stop_delta: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RefinementConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn self_learn_rejects_empty_seed() {
        let a = space("a", &["x"], &[vec![1.0, 0.0]]);
        let seed = Lexicon::new("a", "a");
        assert!(matches!(self_learn(&a, &a, &seed, &RefinementConfig::default()), Err(Error::EmptySeed)));
        let oov = Lexicon::from_pairs("a", "a", [("nope", "nope")]);
        assert!(matches!(self_learn(&a, &a, &oov, &RefinementConfig::default()), Err(Error::EmptySeed)));
    }

    #[test]
    fn map_file_round_trip() {
        let theta = 0.3f64;
        let w = DMatrix::from_row_slice(2, 2, &[theta.cos(), theta.sin(), -theta.sin(), theta.cos()]);
        let map = OrthogonalMap::new("en", "es", w).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("en-es.map");
        save_map(&map, &p).unwrap();
        let back = load_map(&p).unwrap();
        assert_eq!(back, map);

        std::fs::write(&p, "2 en es\n1 0\n0\n").unwrap();
        assert!(matches!(load_map(&p), Err(Error::Parse { line: 3, .. })));
        std::fs::write(&p, "2 en es\n1 1\n1 1\n").unwrap();
        assert!(load_map(&p).is_err());
    }
}
