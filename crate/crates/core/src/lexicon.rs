//! Translation dictionaries: file I/O, pivot triangulation and train/test splits.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, Result};

/// An ordered source→target multimap without duplicate pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    src_lang: String,
    trg_lang: String,
    entries: Vec<(String, String)>,
    seen: HashSet<(String, String)>,
}

impl Lexicon {
    pub fn new(src_lang: impl Into<String>, trg_lang: impl Into<String>) -> Self {
        Lexicon {
            src_lang: src_lang.into(),
            trg_lang: trg_lang.into(),
            ..Default::default()
        }
    }

    pub fn from_pairs<I, S, T>(src_lang: &str, trg_lang: &str, pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut lex = Lexicon::new(src_lang, trg_lang);
        for (s, t) in pairs {
            lex.insert(s, t);
        }
        lex
    }

    /// Appends a pair unless already present. Returns whether it was added.
    pub fn insert(&mut self, src: impl Into<String>, trg: impl Into<String>) -> bool {
        let pair = (src.into(), trg.into());
        if self.seen.contains(&pair) {
            return false;
        }
        self.seen.insert(pair.clone());
        self.entries.push(pair);
        true
    }

    pub fn src_lang(&self) -> &str {
        &self.src_lang
    }

    pub fn trg_lang(&self) -> &str {
        &self.trg_lang
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, src: &str, trg: &str) -> bool {
        self.seen.contains(&(src.to_string(), trg.to_string()))
    }

    /// Distinct source words in first-appearance order.
    pub fn sources(&self) -> Vec<&str> {
        let set: IndexSet<&str> = self.entries.iter().map(|(s, _)| s.as_str()).collect();
        set.into_iter().collect()
    }

    /// Source word → targets, both in first-appearance order.
    pub fn grouped(&self) -> IndexMap<&str, Vec<&str>> {
        let mut map: IndexMap<&str, Vec<&str>> = IndexMap::new();
        for (s, t) in &self.entries {
            map.entry(s.as_str()).or_default().push(t.as_str());
        }
        map
    }

    pub fn targets_of(&self, src: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(s, _)| s == src)
            .map(|(_, t)| t.as_str())
            .collect()
    }

    /// Keeps the entries for which `keep` holds, preserving order.
    pub fn filtered(&self, mut keep: impl FnMut(&str, &str) -> bool) -> Lexicon {
        Lexicon::from_pairs(
            &self.src_lang,
            &self.trg_lang,
            self.entries
                .iter()
                .filter(|(s, t)| keep(s, t))
                .map(|(s, t)| (s.as_str(), t.as_str())),
        )
    }
}

/// Reads a dictionary: one whitespace-separated `source target` pair per line.
/// Blank lines are ignored, repeated pairs keep their first occurrence.
pub fn read_lexicon(path: impl AsRef<Path>, src_lang: &str, trg_lang: &str) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(BufReader::new(file), path, src_lang, trg_lang)
}

pub fn parse_lexicon<R: BufRead>(reader: R, origin: &Path, src_lang: &str, trg_lang: &str) -> Result<Lexicon> {
    let mut lex = Lexicon::new(src_lang, trg_lang);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match (fields.next(), fields.next()) {
            (Some(s), Some(t)) => {
                lex.insert(s, t);
            }
            _ => return Err(Error::parse(origin, i + 1, "expected `source target`")),
        }
    }
    Ok(lex)
}

/// Writes one tab-separated pair per line.
pub fn write_lexicon(lex: &Lexicon, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        for (s, t) in lex.entries() {
            writeln!(out, "{s}\t{t}")?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// Composes `src→pivot` with `pivot→trg`.
///
/// Sources keep their order in `src_pivot`; each source's targets appear in
/// the order they are first derived (pivots in `src_pivot` order, then
/// targets in `pivot_trg` order).
pub fn triangulate(src_pivot: &Lexicon, pivot_trg: &Lexicon) -> Result<Lexicon> {
    if src_pivot.trg_lang() != pivot_trg.src_lang() {
        return Err(Error::LanguageMismatch {
            left: src_pivot.trg_lang().to_string(),
            right: pivot_trg.src_lang().to_string(),
        });
    }
    let bridge = pivot_trg.grouped();
    let mut out = Lexicon::new(src_pivot.src_lang(), pivot_trg.trg_lang());
    for (src, pivots) in src_pivot.grouped() {
        for pivot in pivots {
            for trg in bridge.get(pivot).into_iter().flatten() {
                out.insert(src, *trg);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

/// Partitions by source word. Unassigned sources go to train.
pub fn split_lexicon(lex: &Lexicon, assignment: &HashMap<String, Split>) -> (Lexicon, Lexicon) {
    let mut train = Lexicon::new(lex.src_lang(), lex.trg_lang());
    let mut test = Lexicon::new(lex.src_lang(), lex.trg_lang());
    for (s, t) in lex.entries() {
        match assignment.get(s) {
            Some(Split::Test) => test.insert(s.as_str(), t.as_str()),
            _ => train.insert(s.as_str(), t.as_str()),
        };
    }
    (train, test)
}

/// Derives a split assignment from existing train/test dictionaries, so that
/// new dictionaries with the same source language reuse the same source types.
pub fn assignment_from(train: &Lexicon, test: &Lexicon) -> HashMap<String, Split> {
    let mut map = HashMap::new();
    for s in train.sources() {
        map.insert(s.to_string(), Split::Train);
    }
    for s in test.sources() {
        map.insert(s.to_string(), Split::Test);
    }
    map
}
