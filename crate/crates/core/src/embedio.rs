//! Monolingual word-embedding spaces in the fastText/word2vec text format.
//!
//! The format is a header line `V d` followed by one row per word: the token,
//! then `d` decimal values, separated by single spaces.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_VOCAB: usize = 200_000;

/// A language's vocabulary together with one embedding row per word.
///
/// Rows follow vocabulary order, which for the embeddings we load is
/// frequency order; several operations rely on "top n" meaning "first n rows".
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    language: String,
    words: Vec<String>,
    vectors: DMatrix<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingSpace {
    /// Builds a space, checking word uniqueness, row count and finiteness.
    pub fn new(language: impl Into<String>, words: Vec<String>, vectors: DMatrix<f64>) -> Result<Self> {
        if words.len() != vectors.nrows() {
            return Err(Error::DimensionMismatch {
                expected: words.len(),
                found: vectors.nrows(),
            });
        }
        if vectors.ncols() == 0 {
            return Err(Error::Invalid("embedding dimension must be positive".into()));
        }
        if let Some(bad) = vectors.iter().position(|v| !v.is_finite()) {
            let row = bad % vectors.nrows();
            return Err(Error::Invalid(format!("non-finite value in row of `{}`", words[row])));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate word `{w}`")));
            }
        }
        Ok(EmbeddingSpace {
            language: language.into(),
            words,
            vectors,
            index,
        })
    }

    /// Builds a space from row vectors.
    pub fn from_rows(language: impl Into<String>, words: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.len(),
            });
        }
        let vectors = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        Self::new(language, words, vectors)
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, word: &str) -> Option<Vec<f64>> {
        self.index_of(word)
            .map(|i| self.vectors.row(i).iter().copied().collect())
    }

    /// Replaces the vectors, keeping vocabulary and language.
    pub fn with_vectors(&self, vectors: DMatrix<f64>) -> Result<Self> {
        Self::new(self.language.clone(), self.words.clone(), vectors)
    }

    /// Keeps the first `n` rows.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let words = self.words[..n].to_vec();
        let index = words.iter().cloned().zip(0..).collect();
        EmbeddingSpace {
            language: self.language.clone(),
            words,
            vectors: self.vectors.rows(0, n).into_owned(),
            index,
        }
    }

    /// Applies normalization steps left to right.
    pub fn normalized(&self, steps: &[NormStep]) -> Self {
        let mut vectors = self.vectors.clone();
        for step in steps {
            match step {
                NormStep::Unit => unit_rows(&mut vectors),
                NormStep::Center => center_columns(&mut vectors),
            }
        }
        EmbeddingSpace {
            vectors,
            ..self.clone()
        }
    }
}

/// A single preprocessing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormStep {
    /// Scale each row to Euclidean norm 1; zero rows are left unchanged.
    Unit,
    /// Subtract the column mean from every row.
    Center,
}

impl NormStep {
    pub fn default_pipeline() -> Vec<NormStep> {
        vec![NormStep::Unit, NormStep::Center, NormStep::Unit]
    }

    /// Parses a comma-separated list such as `unit,center,unit`.
    /// An empty string or `none` yields the identity pipeline.
    pub fn parse_list(s: &str) -> Result<Vec<NormStep>> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(Vec::new());
        }
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl FromStr for NormStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(NormStep::Unit),
            "center" => Ok(NormStep::Center),
            other => Err(Error::Invalid(format!("unknown normalization step `{other}`"))),
        }
    }
}

impl fmt::Display for NormStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormStep::Unit => "unit",
            NormStep::Center => "center",
        })
    }
}

pub(crate) fn unit_rows(m: &mut DMatrix<f64>) {
    for mut row in m.row_iter_mut() {
        let norm = row.norm();
        if norm > 0.0 {
            row /= norm;
        }
    }
}

fn center_columns(m: &mut DMatrix<f64>) {
    if m.nrows() == 0 {
        return;
    }
    let n = m.nrows() as f64;
    for mut col in m.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
}

/// Loads an embedding file, keeping at most `max_vocab` distinct words
/// (`None` for no limit). Later duplicates of a token are skipped and do not
/// count towards the limit.
pub fn load_embeddings(path: impl AsRef<Path>, language: &str, max_vocab: Option<usize>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), path, language, max_vocab)
}

/// Reads the text format from any buffered reader; `origin` labels errors.
pub fn read_embeddings<R: BufRead>(
    reader: R,
    origin: &Path,
    language: &str,
    max_vocab: Option<usize>,
) -> Result<EmbeddingSpace> {
    let limit = max_vocab.unwrap_or(usize::MAX);
    let mut lines = reader.lines();

    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(origin, e))?,
        None => return Err(Error::parse(origin, 1, "missing header")),
    };
    let (declared, dim) = parse_header(&header).ok_or_else(|| Error::parse(origin, 1, "malformed header, expected `V d`"))?;

    let mut words = Vec::with_capacity(declared.min(limit).min(1 << 20));
    let mut values: Vec<f64> = Vec::with_capacity(words.capacity() * dim);
    let mut seen = HashMap::new();

    for (lineno, line) in lines.enumerate() {
        if words.len() >= limit {
            break;
        }
        let lineno = lineno + 2;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line has a field");
        let start = values.len();
        for field in fields {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("non-numeric value `{field}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(origin, lineno, format!("non-finite value `{field}`")));
            }
            values.push(v);
        }
        let count = values.len() - start;
        if count != dim {
            return Err(Error::parse(origin, lineno, format!("expected {dim} values, found {count}")));
        }
        if seen.contains_key(token) {
            values.truncate(start);
            continue;
        }
        seen.insert(token.to_string(), words.len());
        words.push(token.to_string());
    }

    if words.is_empty() {
        return Err(Error::parse(origin, 1, "empty vocabulary"));
    }
    let vectors = DMatrix::from_row_slice(words.len(), dim, &values);
    EmbeddingSpace::new(language, words, vectors)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let v = it.next()?.parse().ok()?;
    let d: usize = it.next()?.parse().ok()?;
    if it.next().is_some() || d == 0 {
        return None;
    }
    Some((v, d))
}

/// Writes a space in the text format, shortest round-trip decimals.
pub fn write_embeddings(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(out, "{} {}", space.len(), space.dim())?;
        for (i, w) in space.words().iter().enumerate() {
            out.write_all(w.as_bytes())?;
            for v in space.vectors().row(i).iter() {
                write!(out, " {v}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}
