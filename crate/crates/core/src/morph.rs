//! Morphological analyses (Universal Dependencies features) and the tag-based
//! filter for triangulated dictionaries.
//!
//! Table format, one analysis per line:
//!
//! ```text
//! form<TAB>lemma<TAB>upos<TAB>Feature=Value|Feature=Value
//! ```
//!
//! with `_` in the last column when a form carries no features, and `_` as
//! UPOS when the tag is unknown.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

/// Name under which the part-of-speech tag takes part in feature comparison.
pub const UPOS_FEATURE: &str = "UPOS";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphAnalysis {
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub feats: BTreeMap<String, String>,
}

impl MorphAnalysis {
    pub fn new(form: &str, lemma: &str, upos: &str, feats: &[(&str, &str)]) -> Self {
        MorphAnalysis {
            form: form.into(),
            lemma: lemma.into(),
            upos: upos.into(),
            feats: feats.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    /// Features used for comparison: the UD features plus UPOS when known.
    fn comparable(&self) -> impl Iterator<Item = (&str, &str)> {
        let upos = (!self.upos.is_empty() && self.upos != "_").then_some((UPOS_FEATURE, self.upos.as_str()));
        self.feats.iter().map(|(k, v)| (k.as_str(), v.as_str())).chain(upos)
    }
}

/// Parses a `Feature=Value|Feature=Value` column; `_` means no features.
pub fn parse_feats(column: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let column = column.trim();
    if column == "_" || column.is_empty() {
        return Ok(BTreeMap::new());
    }
    column
        .split('|')
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
            _ => Err(format!("malformed feature `{kv}`")),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MorphTable {
    pub language: String,
    analyses: HashMap<String, Vec<MorphAnalysis>>,
}

impl MorphTable {
    pub fn new(language: impl Into<String>) -> Self {
        MorphTable {
            language: language.into(),
            analyses: HashMap::new(),
        }
    }

    /// Adds an analysis for its form; an identical analysis is stored once.
    pub fn add(&mut self, analysis: MorphAnalysis) {
        let list = self.analyses.entry(analysis.form.clone()).or_default();
        if !list.contains(&analysis) {
            list.push(analysis);
        }
    }

    pub fn get(&self, form: &str) -> &[MorphAnalysis] {
        self.analyses.get(form).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.analyses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.analyses.is_empty()
    }
}

pub fn read_morph_table(path: impl AsRef<Path>, language: &str) -> Result<MorphTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_morph_table(BufReader::new(file), path, language)
}

pub fn parse_morph_table<R: BufRead>(reader: R, origin: &Path, language: &str) -> Result<MorphTable> {
    let mut table = MorphTable::new(language);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 || cols[0].is_empty() {
            return Err(Error::parse(origin, i + 1, "expected form, lemma, upos and features separated by tabs"));
        }
        let feats = parse_feats(cols[3]).map_err(|m| Error::parse(origin, i + 1, m))?;
        table.add(MorphAnalysis {
            form: cols[0].to_string(),
            lemma: cols[1].to_string(),
            upos: cols[2].to_string(),
            feats,
        });
    }
    Ok(table)
}

/// Feature names ignored by default: gender and verb form do not transfer
/// across languages.
pub fn default_ignored() -> HashSet<String> {
    ["Gender", "VerbForm"].iter().map(|s| s.to_string()).collect()
}

/// Comparison of one source analysis with one target analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PairMatch {
    shared: usize,
    conflicts: usize,
}

fn compare(src: &MorphAnalysis, trg: &MorphAnalysis, ignored: &HashSet<String>) -> PairMatch {
    let trg_feats: HashMap<&str, &str> = trg.comparable().collect();
    let mut m = PairMatch { shared: 0, conflicts: 0 };
    for (name, value) in src.comparable() {
        if ignored.contains(name) {
            continue;
        }
        if let Some(&other) = trg_feats.get(name) {
            m.shared += 1;
            if other != value {
                m.conflicts += 1;
            }
        }
    }
    m
}

/// How a candidate translation relates to its source word's analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    /// Some analysis pair shares at least one feature and agrees on all of them.
    Exact,
    /// Neither exact nor disagreeing (e.g. no shared features).
    Partial,
    /// Every analysis pair conflicts on at least one shared feature.
    Disagrees,
    /// Source or target has no analysis.
    Unknown,
}

pub fn agreement(src: &[MorphAnalysis], trg: &[MorphAnalysis], ignored: &HashSet<String>) -> Agreement {
    if src.is_empty() || trg.is_empty() {
        return Agreement::Unknown;
    }
    let pairs: Vec<PairMatch> = src
        .iter()
        .flat_map(|a| trg.iter().map(move |b| (a, b)))
        .map(|(a, b)| compare(a, b, ignored))
        .collect();
    if pairs.iter().any(|p| p.shared > 0 && p.conflicts == 0) {
        Agreement::Exact
    } else if pairs.iter().all(|p| p.conflicts > 0) {
        Agreement::Disagrees
    } else {
        Agreement::Partial
    }
}

/// Removes triangulated translations whose tags disagree with the source word.
///
/// Candidates of one source word that share a target lemma form a group.
/// When a group holds an exact match, members that disagree are removed;
/// when it holds none, only disagreeing members are removed and partial
/// matches stay. Words without analyses pass through untouched. Entry order
/// is preserved.
pub fn morph_filter(lex: &Lexicon, src_tags: &MorphTable, trg_tags: &MorphTable, ignored: &HashSet<String>) -> Lexicon {
    let mut dropped: HashSet<(&str, &str)> = HashSet::new();
    for (src, targets) in lex.grouped() {
        let src_analyses = src_tags.get(src);
        if src_analyses.is_empty() {
            continue;
        }
        // An exact match inside a lemma group licenses removing the group's
        // disagreeing members, and without one only disagreeing members go
        // as well, so the decision reduces to a per-candidate test.
        for trg in targets {
            let trg_analyses = trg_tags.get(trg);
            if agreement(src_analyses, trg_analyses, ignored) == Agreement::Disagrees {
                dropped.insert((src, trg));
            }
        }
    }
    lex.filtered(|s, t| !dropped.contains(&(s, t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ignored() -> HashSet<String> {
        default_ignored()
    }

    #[test]
    fn parses_feature_columns() {
        let f = parse_feats("Case=Nom|Number=Sing").unwrap();
        assert_eq!(f["Case"], "Nom");
        assert!(parse_feats("_").unwrap().is_empty());
        assert!(parse_feats("Case").is_err());
        assert!(parse_feats("=Nom").is_err());
    }

    #[test]
    fn parses_tables() {
        let text = "# comment\nγάτα\tγάτα\tNOUN\tCase=Nom|Gender=Fem|Number=Sing\nκαι\tκαι\tCCONJ\t_\n";
        let t = parse_morph_table(text.as_bytes(), Path::new("mem"), "el").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get("γάτα")[0].feats.len(), 3);
        assert!(t.get("και")[0].feats.is_empty());
        assert!(t.get("σκύλος").is_empty());

        let bad = "γάτα\tγάτα\tNOUN\n";
        assert!(matches!(parse_morph_table(bad.as_bytes(), Path::new("mem"), "el"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn agreement_classes() {
        let nom_sg = MorphAnalysis::new("a", "a", "ADJ", &[("Case", "Nom"), ("Number", "Sing"), ("Gender", "Masc")]);
        let sg_f = MorphAnalysis::new("b", "b", "ADJ", &[("Number", "Sing"), ("Gender", "Fem")]);
        let pl = MorphAnalysis::new("c", "b", "ADJ", &[("Number", "Plur")]);
        let bare = MorphAnalysis::new("d", "d", "_", &[]);
        let noun = MorphAnalysis::new("e", "e", "NOUN", &[("Number", "Sing")]);
        let i = ignored();
        assert_eq!(agreement(std::slice::from_ref(&nom_sg), std::slice::from_ref(&sg_f), &i), Agreement::Exact);
        assert_eq!(agreement(std::slice::from_ref(&nom_sg), std::slice::from_ref(&pl), &i), Agreement::Disagrees);
        assert_eq!(agreement(std::slice::from_ref(&nom_sg), &[bare], &i), Agreement::Partial);
        assert_eq!(agreement(std::slice::from_ref(&nom_sg), &[noun], &i), Agreement::Disagrees);
        assert_eq!(agreement(&[], std::slice::from_ref(&pl), &i), Agreement::Unknown);
        // any qualifying analysis pair is enough
        assert_eq!(agreement(&[nom_sg], &[pl, sg_f], &i), Agreement::Exact);
    }

    #[test]
    fn unanalysed_source_passes_through() {
        let lex = Lexicon::from_pairs("el", "it", [("λέξη", "parola"), ("λέξη", "parole")]);
        let mut it = MorphTable::new("it");
        it.add(MorphAnalysis::new("parola", "parola", "NOUN", &[("Number", "Sing")]));
        it.add(MorphAnalysis::new("parole", "parola", "NOUN", &[("Number", "Plur")]));
        let out = morph_filter(&lex, &MorphTable::new("el"), &it, &ignored());
        assert_eq!(out, lex);
    }

    #[test]
    fn unanalysed_targets_are_kept() {
        let lex = Lexicon::from_pairs("el", "it", [("λέξη", "parola"), ("λέξη", "parole"), ("λέξη", "vocabolo")]);
        let mut el = MorphTable::new("el");
        el.add(MorphAnalysis::new("λέξη", "λέξη", "NOUN", &[("Number", "Sing")]));
        let mut it = MorphTable::new("it");
        it.add(MorphAnalysis::new("parola", "parola", "NOUN", &[("Number", "Sing")]));
        it.add(MorphAnalysis::new("parole", "parola", "NOUN", &[("Number", "Plur")]));
        let out = morph_filter(&lex, &el, &it, &ignored());
        assert_eq!(out.targets_of("λέξη"), ["parola", "vocabolo"]);
    }

    #[test]
    fn disjoint_inventories_keep_everything() {
        let lex = Lexicon::from_pairs("tr", "it", [("ev", "casa"), ("ev", "case")]);
        let mut tr = MorphTable::new("tr");
        tr.add(MorphAnalysis::new("ev", "ev", "_", &[("Case", "Nom")]));
        let mut it = MorphTable::new("it");
        it.add(MorphAnalysis::new("casa", "casa", "_", &[("Number", "Sing")]));
        it.add(MorphAnalysis::new("case", "casa", "_", &[("Number", "Plur")]));
        assert_eq!(morph_filter(&lex, &tr, &it, &ignored()), lex);
    }

    #[test]
    fn ignored_set_is_configurable() {
        let lex = Lexicon::from_pairs("el", "it", [("καλή", "buono"), ("καλή", "buona")]);
        let mut el = MorphTable::new("el");
        el.add(MorphAnalysis::new("καλή", "καλός", "ADJ", &[("Gender", "Fem"), ("Number", "Sing")]));
        let mut it = MorphTable::new("it");
        it.add(MorphAnalysis::new("buono", "buono", "ADJ", &[("Gender", "Masc"), ("Number", "Sing")]));
        it.add(MorphAnalysis::new("buona", "buono", "ADJ", &[("Gender", "Fem"), ("Number", "Sing")]));
        assert_eq!(morph_filter(&lex, &el, &it, &ignored()).len(), 2);
        let strict = morph_filter(&lex, &el, &it, &HashSet::new());
        assert_eq!(strict.targets_of("καλή"), ["buona"]);
    }
}
