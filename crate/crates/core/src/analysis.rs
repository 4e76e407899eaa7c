//! Hub-choice analytics over lexicon-induction results.
//!
//! A [`ResultMatrix`] holds P@1 (in percent) for every evaluation pair `m`
//! under every hub `l`. The expected accuracy of a uniformly random hub is the
//! row mean, so the gain of hub `l` on pair `m` is `p[m][l] − mean_l p[m]`
//! and the expected gain `G_l` is that gain averaged over pairs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedio::EmbeddingSpace;
use crate::error::{Error, Result};

/// P@1 percentages, pairs × hubs. Excluded cells (`None`) drop out of every
/// aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultMatrix {
    pub pairs: Vec<String>,
    pub hubs: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl ResultMatrix {
    pub fn new(pairs: Vec<String>, hubs: Vec<String>, values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if values.len() != pairs.len() {
            return Err(Error::DimensionMismatch {
                expected: pairs.len(),
                found: values.len(),
            });
        }
        for (label, row) in pairs.iter().zip(&values) {
            if row.len() != hubs.len() {
                return Err(Error::Invalid(format!("row `{label}` has {} cells for {} hubs", row.len(), hubs.len())));
            }
            if let Some(v) = row.iter().flatten().find(|v| !(0.0..=100.0).contains(*v)) {
                return Err(Error::Invalid(format!("row `{label}`: value {v} outside [0, 100]")));
            }
        }
        Ok(ResultMatrix { pairs, hubs, values })
    }

    pub fn hub_index(&self, hub: &str) -> Option<usize> {
        self.hubs.iter().position(|h| h.eq_ignore_ascii_case(hub))
    }

    /// Index of the row maximum, lowest index on ties.
    pub fn best_hub(&self, row: usize) -> Option<usize> {
        self.values[row]
            .iter()
            .enumerate()
            .filter_map(|(l, v)| v.map(|v| (l, v)))
            .fold(None, |best: Option<(usize, f64)>, (l, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((l, v)),
            })
            .map(|(l, _)| l)
    }
}

/// Reads the wide layout: a header of hub codes after a leading
/// label column, then one row per evaluation pair. Cells may be separated by
/// commas or tabs; `-` or an empty cell marks an excluded value. A column
/// headed `mu` (or `μ`) is ignored.
pub fn read_result_matrix(path: impl AsRef<Path>) -> Result<ResultMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_result_matrix(&text, path)
}

pub fn parse_result_matrix(text: &str, origin: &Path) -> Result<ResultMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(origin, 1, "empty result table"))?;
    let delim = if header.contains('\t') { '\t' } else { ',' };
    let head: Vec<&str> = header.split(delim).map(str::trim).collect();
    if head.len() < 2 {
        return Err(Error::parse(origin, 1, "header needs a label column and at least one hub"));
    }
    let keep: Vec<usize> = (1..head.len()).filter(|&c| !matches!(head[c], "mu" | "μ" | "MU")).collect();
    let hubs: Vec<String> = keep.iter().map(|&c| head[c].to_string()).collect();

    let mut pairs = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let cells: Vec<&str> = line.split(delim).map(str::trim).collect();
        if cells.len() != head.len() {
            return Err(Error::parse(origin, i + 1, format!("expected {} cells, found {}", head.len(), cells.len())));
        }
        let row = keep
            .iter()
            .map(|&c| match cells[c] {
                "" | "-" => Ok(None),
                v => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::parse(origin, i + 1, format!("bad value `{v}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        pairs.push(cells[0].to_string());
        values.push(row);
    }
    if pairs.is_empty() {
        return Err(Error::parse(origin, 2, "no evaluation pairs"));
    }
    ResultMatrix::new(pairs, hubs, values)
}

/// Expected gains and best-hub statistics, indexed like `hubs`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub hubs: Vec<String>,
    /// `G_l`: mean gain over all pairs.
    pub overall: Vec<f64>,
    /// Mean gain over the pairs where the hub is best; `None` if it never is.
    pub when_best: Vec<Option<f64>>,
    pub best_counts: Vec<usize>,
    /// Column means.
    pub mu: Vec<f64>,
    /// Mean over pairs of the row maximum.
    pub mu_best: f64,
}

impl GainReport {
    fn index(&self, hub: &str) -> Option<usize> {
        self.hubs.iter().position(|h| h.eq_ignore_ascii_case(hub))
    }

    pub fn overall_of(&self, hub: &str) -> Option<f64> {
        self.index(hub).map(|i| self.overall[i])
    }

    pub fn best_count_of(&self, hub: &str) -> Option<usize> {
        self.index(hub).map(|i| self.best_counts[i])
    }

    /// How far always using `hub` falls behind the per-pair best, in points.
    pub fn gap_to_best(&self, hub: &str) -> Option<f64> {
        self.index(hub).map(|i| self.mu_best - self.mu[i])
    }
}

pub fn expected_gain(rm: &ResultMatrix) -> Result<GainReport> {
    let n = rm.hubs.len();
    let mut gain_sum = vec![0.0; n];
    let mut gain_cnt = vec![0usize; n];
    let mut best_sum = vec![0.0; n];
    let mut best_counts = vec![0usize; n];
    let mut col_sum = vec![0.0; n];
    let mut col_cnt = vec![0usize; n];
    let mut max_sum = 0.0;
    let mut rows = 0usize;

    for (m, row) in rm.values.iter().enumerate() {
        let valid: Vec<(usize, f64)> = row.iter().enumerate().filter_map(|(l, v)| v.map(|v| (l, v))).collect();
        if valid.is_empty() {
            continue;
        }
        let mean = valid.iter().map(|(_, v)| v).sum::<f64>() / valid.len() as f64;
        for &(l, v) in &valid {
            gain_sum[l] += v - mean;
            gain_cnt[l] += 1;
            col_sum[l] += v;
            col_cnt[l] += 1;
        }
        let best = rm.best_hub(m).expect("row has a value");
        let best_value = row[best].expect("best cell is valid");
        best_counts[best] += 1;
        best_sum[best] += best_value - mean;
        max_sum += best_value;
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Invalid("result matrix has no values".into()));
    }
    let ratio = |s: f64, c: usize| if c == 0 { f64::NAN } else { s / c as f64 };
    Ok(GainReport {
        hubs: rm.hubs.clone(),
        overall: (0..n).map(|l| ratio(gain_sum[l], gain_cnt[l])).collect(),
        when_best: (0..n).map(|l| (best_counts[l] > 0).then(|| best_sum[l] / best_counts[l] as f64)).collect(),
        best_counts,
        mu: (0..n).map(|l| ratio(col_sum[l], col_cnt[l])).collect(),
        mu_best: max_sum / rows as f64,
    })
}

/// Index pairs sampled when a space has more than this many word pairs.
pub const GH_MAX_PAIRS: usize = 1 << 21;
pub const DEFAULT_GH_SAMPLE: usize = 5000;

/// A Gromov–Hausdorff proxy between two embedding spaces.
///
/// Takes the first `sample_n` words of each space, collects their pairwise
/// Euclidean distances, and returns half the bottleneck distance between the
/// two sorted distance lists; for equal-size multisets on the line that is
/// the largest gap between equally ranked values. This is a lower-bound style
/// estimate, not the exact Gromov–Hausdorff distance. When there are more
/// than [`GH_MAX_PAIRS`] word pairs, the same seeded random subset of rank
/// pairs is used for both spaces.
pub fn gh_distance(a: &EmbeddingSpace, b: &EmbeddingSpace, sample_n: usize, seed: u64) -> Result<f64> {
    if sample_n < 2 {
        return Err(Error::Invalid("GH estimate needs at least 2 words per space".into()));
    }
    if sample_n > a.len() || sample_n > b.len() {
        return Err(Error::Invalid(format!(
            "sample of {sample_n} words exceeds a vocabulary ({} / {})",
            a.len(),
            b.len()
        )));
    }
    let total = sample_n * (sample_n - 1) / 2;
    let index_pairs: Vec<(usize, usize)> = if total <= GH_MAX_PAIRS {
        (0..sample_n).flat_map(|i| (i + 1..sample_n).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..GH_MAX_PAIRS)
            .map(|_| loop {
                let i = rng.random_range(0..sample_n as u64) as usize;
                let j = rng.random_range(0..sample_n as u64) as usize;
                if i != j {
                    break (i.min(j), i.max(j));
                }
            })
            .collect()
    };
    let da = sorted_distances(a, &index_pairs);
    let db = sorted_distances(b, &index_pairs);
    let bottleneck = da.iter().zip(&db).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(bottleneck / 2.0)
}

fn sorted_distances(space: &EmbeddingSpace, pairs: &[(usize, usize)]) -> Vec<f64> {
    let v = space.vectors();
    let mut d: Vec<f64> = pairs.iter().map(|&(i, j)| (v.row(i) - v.row(j)).norm()).collect();
    d.sort_unstable_by(f64::total_cmp);
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

impl std::str::FromStr for CorrelationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            other => Err(Error::Invalid(format!("unknown correlation method `{other}`"))),
        }
    }
}

/// Pearson or Spearman (average ranks for ties) correlation.
pub fn correlate(xs: &[f64], ys: &[f64], method: CorrelationMethod) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::Invalid("correlation needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("correlation inputs must be finite".into()));
    }
    match method {
        CorrelationMethod::Pearson => pearson(xs, ys),
        CorrelationMethod::Spearman => pearson(&average_ranks(xs), &average_ranks(ys)),
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant series".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Symmetric language-distance table with zero self-distances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistanceTable {
    entries: BTreeMap<(String, String), f64>,
}

impl DistanceTable {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        if a == b {
            return self.languages().iter().any(|l| l == a).then_some(0.0);
        }
        self.entries.get(&(a.to_string(), b.to_string())).copied()
    }

    pub fn languages(&self) -> Vec<String> {
        let mut langs: Vec<String> = self.entries.keys().map(|(a, _)| a.clone()).collect();
        langs.dedup();
        langs
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const SYMMETRY_TOL: f64 = 1e-9;

/// Reads `src,trg,value` rows (a `src,trg,value` header line is allowed).
/// The symmetric closure is taken; self-distances must be 0.
pub fn load_distances(path: impl AsRef<Path>) -> Result<DistanceTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_distances(&text, path)
}

pub fn parse_distances(text: &str, origin: &Path) -> Result<DistanceTable> {
    let mut table = DistanceTable::default();
    let mut seen_data = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split([',', '\t']).map(str::trim).collect();
        if cells.len() != 3 {
            return Err(Error::parse(origin, i + 1, "expected `src,trg,value`"));
        }
        let value: f64 = match cells[2].parse() {
            Ok(v) => v,
            Err(_) if !seen_data => continue, // header
            Err(_) => return Err(Error::parse(origin, i + 1, format!("bad value `{}`", cells[2]))),
        };
        seen_data = true;
        let (a, b) = (cells[0], cells[1]);
        if !value.is_finite() || value < 0.0 {
            return Err(Error::parse(origin, i + 1, format!("distance must be finite and non-negative, got {value}")));
        }
        if a == b {
            if value != 0.0 {
                return Err(Error::parse(origin, i + 1, format!("self-distance of `{a}` must be 0")));
            }
            table.entries.entry((a.to_string(), a.to_string())).or_insert(0.0);
            continue;
        }
        for key in [(a.to_string(), b.to_string()), (b.to_string(), a.to_string())] {
            if let Some(&old) = table.entries.get(&key) {
                if (old - value).abs() > SYMMETRY_TOL {
                    return Err(Error::parse(origin, i + 1, format!("conflicting distances {old} and {value} for {a}-{b}")));
                }
            }
            table.entries.insert(key, value);
        }
    }
    // self entries for every language seen, so languages() covers them
    let langs: Vec<String> = table.entries.keys().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    for l in langs {
        table.entries.entry((l.clone(), l)).or_insert(0.0);
    }
    Ok(table)
}

/// Splits a pair label such as `az-be` into its languages.
pub fn split_pair_label(label: &str) -> Option<(&str, &str)> {
    let (a, b) = label.split_once(['-', '–'])?;
    let b = b.trim_start_matches(['-', '–']);
    (!a.is_empty() && !b.is_empty()).then_some((a.trim(), b.trim()))
}

/// Per evaluation pair, correlates P@1 across hubs with a hub-dependent
/// distance (e.g. `d(src, hub) + d(trg, hub)`), then averages over pairs.
/// Returns the mean coefficient and the number of pairs where it was defined.
pub fn hub_distance_correlation<F>(rm: &ResultMatrix, method: CorrelationMethod, mut distance: F) -> Result<(f64, usize)>
where
    F: FnMut(&str, &str, &str) -> Option<f64>,
{
    let mut sum = 0.0;
    let mut used = 0;
    for (label, row) in rm.pairs.iter().zip(&rm.values) {
        let Some((src, trg)) = split_pair_label(label) else {
            return Err(Error::Invalid(format!("pair label `{label}` is not `src-trg`")));
        };
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (hub, v) in rm.hubs.iter().zip(row) {
            if let (Some(v), Some(d)) = (v, distance(src, trg, hub)) {
                xs.push(*v);
                ys.push(d);
            }
        }
        match correlate(&xs, &ys, method) {
            Ok(r) => {
                sum += r;
                used += 1;
            }
            Err(Error::Undefined(_)) | Err(Error::Invalid(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(Error::Undefined("no evaluation pair has a defined correlation".into()));
    }
    Ok((sum / used as f64, used))
}
