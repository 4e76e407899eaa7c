//! Translation retrieval with cross-domain similarity local scaling (CSLS),
//! precision-at-k evaluation and paired bootstrap significance.
//!
//! For a query `x` and a candidate `y`, both unit-normalized,
//!
//! ```text
//! csls(x, y) = 2 cos(x, y) - r_T(x) - r_S(y)
//! ```
//!
//! where `r_T(x)` is the mean cosine of `x` to its `k` nearest candidates and
//! `r_S(y)` the mean cosine of `y` to its `k` nearest queries. Hubs, candidates
//! close to many queries, are pushed down. Ranking ties go to the lower
//! candidate index, so results do not depend on thread scheduling.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::embedio::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

pub const DEFAULT_CSLS_K: usize = 10;
pub const DEFAULT_KS: [usize; 3] = [1, 5, 10];

/// Row-major copy with every nonzero row scaled to unit length.
fn unit_rows_flat(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.ncols();
    let mut out = Vec::with_capacity(m.nrows() * d);
    for row in m.row_iter() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        out.extend(row.iter().map(|v| v * scale));
    }
    out
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean of the `k` largest values; `values` is reordered.
fn top_mean(values: &mut [f64], k: usize) -> f64 {
    let k = k.min(values.len());
    if k == 0 {
        return 0.0;
    }
    if k < values.len() {
        values.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    }
    let head = &mut values[..k];
    head.sort_unstable_by(|a, b| b.total_cmp(a));
    head.iter().sum::<f64>() / k as f64
}

/// Higher score first, then lower index.
#[inline]
fn rank_order(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Precomputed CSLS state for one query set against one candidate set.
pub struct CslsScorer {
    dim: usize,
    queries: Vec<f64>,
    candidates: Vec<f64>,
    r_query: Vec<f64>,
    r_candidate: Vec<f64>,
    k_neighborhood: usize,
}

impl CslsScorer {
    /// `k_neighborhood` is clamped to the number of candidates (for `r_T`)
    /// and of queries (for `r_S`); clamping is logged as a warning.
    pub fn new(queries: &DMatrix<f64>, candidates: &DMatrix<f64>, k_neighborhood: usize) -> Result<Self> {
        if queries.ncols() != candidates.ncols() {
            return Err(Error::DimensionMismatch {
                expected: queries.ncols(),
                found: candidates.ncols(),
            });
        }
        if queries.nrows() == 0 || candidates.nrows() == 0 {
            return Err(Error::Invalid("retrieval needs at least one query and one candidate".into()));
        }
        if k_neighborhood == 0 {
            return Err(Error::Invalid("CSLS neighbourhood size must be at least 1".into()));
        }
        let (m, v) = (queries.nrows(), candidates.nrows());
        if k_neighborhood > m || k_neighborhood > v {
            log::warn!("CSLS neighbourhood {k_neighborhood} clamped to {} queries / {} candidates", m, v);
        }
        let dim = queries.ncols();
        let q = unit_rows_flat(queries);
        let c = unit_rows_flat(candidates);
        let r_query = mean_top_similarity(&q, &c, dim, k_neighborhood);
        let r_candidate = mean_top_similarity(&c, &q, dim, k_neighborhood);
        Ok(CslsScorer {
            dim,
            queries: q,
            candidates: c,
            r_query,
            r_candidate,
            k_neighborhood,
        })
    }

    pub fn num_queries(&self) -> usize {
        self.r_query.len()
    }

    pub fn num_candidates(&self) -> usize {
        self.r_candidate.len()
    }

    pub fn k_neighborhood(&self) -> usize {
        self.k_neighborhood
    }

    /// `r_T` for every query.
    pub fn query_density(&self) -> &[f64] {
        &self.r_query
    }

    /// `r_S` for every candidate.
    pub fn candidate_density(&self) -> &[f64] {
        &self.r_candidate
    }

    fn query(&self, i: usize) -> &[f64] {
        &self.queries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        let cos = dot(self.query(i), &self.candidates[j * self.dim..(j + 1) * self.dim]);
        2.0 * cos - self.r_query[i] - self.r_candidate[j]
    }

    fn row_scores(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let q = self.query(i);
        let rq = self.r_query[i];
        self.candidates
            .chunks_exact(self.dim)
            .zip(&self.r_candidate)
            .enumerate()
            .map(move |(j, (c, rc))| (j, 2.0 * dot(q, c) - rq - rc))
    }

    /// The `k_max` best candidates for query `i`.
    pub fn topk_row(&self, i: usize, k_max: usize) -> Vec<(usize, f64)> {
        let k_max = k_max.min(self.num_candidates());
        if k_max == 1 {
            return self.row_scores(i).min_by(rank_order).into_iter().collect();
        }
        let mut all: Vec<(usize, f64)> = self.row_scores(i).collect();
        if k_max < all.len() {
            all.select_nth_unstable_by(k_max, rank_order);
            all.truncate(k_max);
        }
        all.sort_unstable_by(rank_order);
        all
    }

    pub fn topk(&self, k_max: usize) -> Vec<Vec<(usize, f64)>> {
        (0..self.num_queries()).into_par_iter().map(|i| self.topk_row(i, k_max)).collect()
    }

    /// Pairs `(query, candidate)` that are each other's best match.
    pub fn mutual_nearest(&self) -> Vec<(usize, usize)> {
        let v = self.num_candidates();
        let none = (usize::MAX, f64::NEG_INFINITY);
        let better = |a: (usize, f64), b: (usize, f64)| if rank_order(&a, &b) == Ordering::Greater { b } else { a };

        let (row_best, col_best) = (0..self.num_queries())
            .into_par_iter()
            .fold(
                || (Vec::new(), vec![none; v]),
                |(mut rows, mut cols), i| {
                    let mut best = none;
                    for (j, s) in self.row_scores(i) {
                        best = better(best, (j, s));
                        cols[j] = better(cols[j], (i, s));
                    }
                    rows.push((i, best.0));
                    (rows, cols)
                },
            )
            .reduce(
                || (Vec::new(), vec![none; v]),
                |(mut ra, ca), (rb, cb)| {
                    ra.extend(rb);
                    let cols = ca.into_iter().zip(cb).map(|(a, b)| better(a, b)).collect();
                    (ra, cols)
                },
            );
        let mut pairs: Vec<(usize, usize)> = row_best
            .into_iter()
            .filter(|&(i, j)| j != usize::MAX && col_best[j].0 == i)
            .collect();
        pairs.sort_unstable();
        pairs
    }
}

/// For each row of `from`, the mean of its `k` largest cosines to rows of `to`.
fn mean_top_similarity(from: &[f64], to: &[f64], dim: usize, k: usize) -> Vec<f64> {
    from.par_chunks_exact(dim)
        .map(|x| {
            let mut sims: Vec<f64> = to.chunks_exact(dim).map(|y| dot(x, y)).collect();
            top_mean(&mut sims, k)
        })
        .collect()
}

/// Top-`k_max` CSLS neighbours (candidate index, score) for each query row.
pub fn csls_topk(
    queries: &DMatrix<f64>,
    candidates: &DMatrix<f64>,
    k_neighborhood: usize,
    k_max: usize,
) -> Result<Vec<Vec<(usize, f64)>>> {
    if k_max == 0 || k_max > candidates.nrows() {
        return Err(Error::Invalid(format!(
            "k_max must be in 1..={}, got {k_max}",
            candidates.nrows()
        )));
    }
    Ok(CslsScorer::new(queries, candidates, k_neighborhood)?.topk(k_max))
}

/// Retrieved translations for a list of source words.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalRun {
    pub queries: Vec<String>,
    /// Per query, `(target word, score)` best first.
    pub topk: Vec<Vec<(String, f64)>>,
    pub k_max: usize,
}

/// Retrieval parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetrievalConfig {
    pub csls_k: usize,
    pub k_max: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            csls_k: DEFAULT_CSLS_K,
            k_max: 10,
        }
    }
}

/// Retrieves translations of `words` (those present in `src`) among all of
/// `trg`'s vocabulary. Both spaces must already share coordinates.
pub fn retrieve(src: &EmbeddingSpace, trg: &EmbeddingSpace, words: &[&str], cfg: RetrievalConfig) -> Result<RetrievalRun> {
    let rows: Vec<usize> = words.iter().filter_map(|w| src.index_of(w)).collect();
    if rows.is_empty() {
        return Err(Error::Invalid("no query word is in the source vocabulary".into()));
    }
    let queries = src.vectors().select_rows(rows.iter());
    let k_max = cfg.k_max.min(trg.len());
    let hits = csls_topk(&queries, trg.vectors(), cfg.csls_k, k_max)?;
    Ok(RetrievalRun {
        queries: rows.iter().map(|&i| src.words()[i].clone()).collect(),
        topk: hits
            .into_iter()
            .map(|row| row.into_iter().map(|(j, s)| (trg.words()[j].clone(), s)).collect())
            .collect(),
        k_max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub p_at: BTreeMap<usize, f64>,
    pub n_evaluated: usize,
    pub n_skipped_oov: usize,
    /// Evaluated queries, in run order.
    pub queries: Vec<String>,
    pub per_query_hits: BTreeMap<usize, Vec<bool>>,
}

/// Precision at each `k`: a query counts as correct when any of its gold
/// translations is among its first `k` results.
///
/// Run queries without gold translations, and gold sources missing from the
/// run, are counted in `n_skipped_oov` and left out of the denominator.
pub fn precision_at_k(run: &RetrievalRun, gold: &Lexicon, ks: &[usize]) -> Result<EvalResult> {
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > run.k_max) {
        return Err(Error::Invalid(format!("k = {k} outside 1..={}", run.k_max)));
    }
    let ks: BTreeSet<usize> = ks.iter().copied().collect();
    let gold_map = gold.grouped();
    let run_set: BTreeSet<&str> = run.queries.iter().map(String::as_str).collect();
    let missing = gold_map.keys().filter(|s| !run_set.contains(**s)).count();

    let mut skipped = missing;
    let mut queries = Vec::new();
    let mut per_query_hits: BTreeMap<usize, Vec<bool>> = ks.iter().map(|&k| (k, Vec::new())).collect();
    for (q, retrieved) in run.queries.iter().zip(&run.topk) {
        let Some(golds) = gold_map.get(q.as_str()) else {
            skipped += 1;
            continue;
        };
        let first_hit = retrieved.iter().position(|(t, _)| golds.contains(&t.as_str()));
        queries.push(q.clone());
        for (&k, hits) in per_query_hits.iter_mut() {
            hits.push(first_hit.is_some_and(|r| r < k));
        }
    }
    if queries.is_empty() {
        return Err(Error::Invalid("no query could be evaluated against the gold dictionary".into()));
    }
    let n = queries.len();
    let p_at = per_query_hits
        .iter()
        .map(|(&k, hits)| (k, hits.iter().filter(|&&h| h).count() as f64 / n as f64))
        .collect();
    Ok(EvalResult {
        p_at,
        n_evaluated: n,
        n_skipped_oov: skipped,
        queries,
        per_query_hits,
    })
}

/// Paired bootstrap over per-query outcomes of two systems.
///
/// Query indices are resampled with replacement `iterations` times from a
/// ChaCha8 stream seeded with `seed`. The p-value is the fraction of
/// resamples whose accuracy difference does not have the sign of the
/// observed difference (zero included). Identical inputs give 1.0.
pub fn paired_bootstrap(hits_a: &[bool], hits_b: &[bool], iterations: usize, seed: u64) -> Result<f64> {
    if hits_a.len() != hits_b.len() {
        return Err(Error::DimensionMismatch {
            expected: hits_a.len(),
            found: hits_b.len(),
        });
    }
    if hits_a.is_empty() {
        return Err(Error::Invalid("bootstrap needs at least one query".into()));
    }
    if iterations == 0 {
        return Err(Error::Invalid("bootstrap needs at least one iteration".into()));
    }
    // per-query difference in {-1, 0, 1}
    let diffs: Vec<i64> = hits_a.iter().zip(hits_b).map(|(&a, &b)| a as i64 - b as i64).collect();
    let observed: i64 = diffs.iter().sum();
    if observed == 0 {
        return Ok(1.0);
    }
    let n = diffs.len() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut contrary = 0usize;
    for _ in 0..iterations {
        let total: i64 = (0..n).map(|_| diffs[rng.random_range(0..n) as usize]).sum();
        if total.signum() != observed.signum() {
            contrary += 1;
        }
    }
    Ok(contrary as f64 / iterations as f64)
}

/// Looks up evaluation outcomes by query word, e.g. to pair two systems'
/// results before bootstrapping.
pub fn hits_by_query(result: &EvalResult, k: usize) -> Option<HashMap<&str, bool>> {
    let hits = result.per_query_hits.get(&k)?;
    Some(result.queries.iter().map(String::as_str).zip(hits.iter().copied()).collect())
}
