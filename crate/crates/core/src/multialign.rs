//! Multilingual alignment through a hub language.
//!
//! Every non-hub language gets its own orthogonal map into the hub's
//! coordinates; the hub keeps the identity. Any two languages are then
//! compared in hub space, which is equivalent to composing `W_src·W_trgᵀ`
//! into the target's original space since all maps preserve cosines.

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::embedio::{load_embeddings, EmbeddingSpace, NormStep, DEFAULT_MAX_VOCAB};
use crate::error::{Error, Result};
use crate::kvfile::{self, KeyValues};
use crate::mapping::{
    self_learn, OrthogonalMap, RefinementConfig, SeedStrategy, StopReason, DEFAULT_SIMILARITY_VOCAB,
};
use crate::retrieval::{retrieve, RetrievalConfig, RetrievalRun};

/// How one language was aligned to the hub.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageReport {
    pub seed: SeedStrategy,
    pub seed_size: usize,
    pub iterations: usize,
    pub dictionary_size: usize,
    pub stop: StopReason,
}

#[derive(Debug, Clone)]
pub struct MultiSpace {
    hub: String,
    spaces: IndexMap<String, EmbeddingSpace>,
    maps: IndexMap<String, OrthogonalMap>,
    reports: IndexMap<String, LanguageReport>,
}

impl MultiSpace {
    /// Assembles a multi-space from already learned maps.
    pub fn from_parts(hub: &str, spaces: Vec<EmbeddingSpace>, mut maps: IndexMap<String, OrthogonalMap>) -> Result<Self> {
        let spaces = index_spaces(spaces)?;
        let hub_space = spaces.get(hub).ok_or_else(|| Error::UnknownLanguage(hub.to_string()))?;
        maps.insert(hub.to_string(), OrthogonalMap::identity(hub, hub_space.dim()));
        let mut ordered = IndexMap::new();
        for (lang, space) in &spaces {
            let map = maps.swap_remove(lang).ok_or_else(|| Error::UnknownLanguage(lang.clone()))?;
            if map.dim() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    found: map.dim(),
                });
            }
            if map.src_lang() != lang || map.trg_lang() != hub {
                return Err(Error::LanguageMismatch {
                    left: format!("{}->{}", map.src_lang(), map.trg_lang()),
                    right: format!("{lang}->{hub}"),
                });
            }
            ordered.insert(lang.clone(), map);
        }
        if let Some(extra) = maps.keys().next() {
            return Err(Error::UnknownLanguage(extra.clone()));
        }
        Ok(MultiSpace {
            hub: hub.to_string(),
            spaces,
            maps: ordered,
            reports: IndexMap::new(),
        })
    }

    pub fn hub(&self) -> &str {
        &self.hub
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.spaces.keys().map(String::as_str)
    }

    pub fn space(&self, lang: &str) -> Result<&EmbeddingSpace> {
        self.spaces.get(lang).ok_or_else(|| Error::UnknownLanguage(lang.to_string()))
    }

    pub fn map(&self, lang: &str) -> Result<&OrthogonalMap> {
        self.maps.get(lang).ok_or_else(|| Error::UnknownLanguage(lang.to_string()))
    }

    pub fn maps(&self) -> &IndexMap<String, OrthogonalMap> {
        &self.maps
    }

    pub fn report(&self, lang: &str) -> Option<&LanguageReport> {
        self.reports.get(lang)
    }

    /// A language's space expressed in hub coordinates.
    pub fn hub_space(&self, lang: &str) -> Result<EmbeddingSpace> {
        self.map(lang)?.apply_space(self.space(lang)?)
    }

    /// Both vocabularies' vectors in hub coordinates: `(X·W_src, Y·W_trg)`.
    pub fn pair_view(&self, src: &str, trg: &str) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let xs = self.map(src)?.apply(self.space(src)?.vectors());
        let ys = self.map(trg)?.apply(self.space(trg)?.vectors());
        Ok((xs, ys))
    }

    /// The direct map from `src` into `trg`'s original coordinates,
    /// `W_src·W_trgᵀ`.
    pub fn composed_map(&self, src: &str, trg: &str) -> Result<OrthogonalMap> {
        self.map(src)?.then(&self.map(trg)?.inverse())
    }

    /// Retrieves translations of `words` from `src` into `trg` through the hub.
    pub fn translate(&self, src: &str, trg: &str, words: &[&str], cfg: RetrievalConfig) -> Result<RetrievalRun> {
        retrieve(&self.hub_space(src)?, &self.hub_space(trg)?, words, cfg)
    }
}

fn index_spaces(spaces: Vec<EmbeddingSpace>) -> Result<IndexMap<String, EmbeddingSpace>> {
    let mut out = IndexMap::new();
    for s in spaces {
        let lang = s.language().to_string();
        if out.insert(lang.clone(), s).is_some() {
            return Err(Error::Invalid(format!("language `{lang}` given twice")));
        }
    }
    Ok(out)
}

/// Learns one map per non-hub language with self-learning against the hub.
///
/// Languages are trained independently (and concurrently) from seeds built
/// with `seed` against the hub. An identical-string seed that comes out empty,
/// as between different scripts, falls back to the similarity seed. Any
/// failure aborts the whole alignment and names the language.
pub fn align_to_hub(spaces: Vec<EmbeddingSpace>, hub: &str, seed: SeedStrategy, cfg: &RefinementConfig) -> Result<MultiSpace> {
    cfg.validate()?;
    let spaces = index_spaces(spaces)?;
    let hub_space = spaces.get(hub).ok_or_else(|| Error::UnknownLanguage(hub.to_string()))?;
    if let Some(s) = spaces.values().find(|s| s.dim() != hub_space.dim()) {
        return Err(Error::Language {
            language: s.language().to_string(),
            source: Box::new(Error::DimensionMismatch {
                expected: hub_space.dim(),
                found: s.dim(),
            }),
        });
    }

    let others: Vec<&EmbeddingSpace> = spaces.values().filter(|s| s.language() != hub).collect();
    let learned: Vec<(String, OrthogonalMap, LanguageReport)> = others
        .par_iter()
        .map(|space| {
            align_one(space, hub_space, seed, cfg).map_err(|e| Error::Language {
                language: space.language().to_string(),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut maps = IndexMap::new();
    let mut reports = IndexMap::new();
    for (lang, map, report) in learned {
        maps.insert(lang.clone(), map);
        reports.insert(lang, report);
    }
    let mut ms = MultiSpace::from_parts(hub, spaces.into_values().collect(), maps)?;
    ms.reports = reports;
    Ok(ms)
}

fn align_one(
    space: &EmbeddingSpace,
    hub: &EmbeddingSpace,
    strategy: SeedStrategy,
    cfg: &RefinementConfig,
) -> Result<(String, OrthogonalMap, LanguageReport)> {
    let mut used = strategy;
    let mut seed = strategy.build(space, hub)?;
    if seed.is_empty() {
        if let SeedStrategy::Identical { .. } = strategy {
            log::info!("{}: no identical strings shared with the hub, using the similarity seed", space.language());
            used = SeedStrategy::Similarity {
                vocab_cap: DEFAULT_SIMILARITY_VOCAB,
            };
            seed = used.build(space, hub)?;
        }
    }
    let out = self_learn(space, hub, &seed, cfg)?;
    let report = LanguageReport {
        seed: used,
        seed_size: seed.len(),
        iterations: out.iterations.len(),
        dictionary_size: out.dictionary.len(),
        stop: out.stop,
    };
    Ok((space.language().to_string(), out.map, report))
}

/// Description of a multilingual run: languages, hub and training settings.
/// Persisted multi-spaces add one `map.<lang>` entry per language.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub hub: String,
    /// Language code → embedding file, in alignment order.
    pub languages: IndexMap<String, PathBuf>,
    pub seed: SeedStrategy,
    pub normalize: Vec<NormStep>,
    pub max_vocab: Option<usize>,
    pub refinement: RefinementConfig,
    pub maps: IndexMap<String, PathBuf>,
}

fn parse_field<T: std::str::FromStr>(kv: &KeyValues, key: &str, default: T) -> Result<T> {
    match kv.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Error::Invalid(format!("bad value `{v}` for `{key}`"))),
    }
}

impl Manifest {
    /// Reads the manifest's recognized keys. Relative paths are taken
    /// relative to `base`.
    pub fn from_kv(kv: &KeyValues, base: &Path) -> Result<Self> {
        let hub = kv.get("hub").cloned().ok_or_else(|| Error::Invalid("manifest lacks `hub`".into()))?;
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_relative() {
                base.join(p)
            } else {
                p
            }
        };
        let mut languages = IndexMap::new();
        let mut maps = IndexMap::new();
        for (k, v) in kv {
            if let Some(lang) = k.strip_prefix("lang.") {
                languages.insert(lang.to_string(), resolve(v));
            } else if let Some(lang) = k.strip_prefix("map.") {
                maps.insert(lang.to_string(), resolve(v));
            }
        }
        if !languages.contains_key(&hub) {
            return Err(Error::UnknownLanguage(hub));
        }
        let defaults = RefinementConfig::default();
        let refinement = RefinementConfig {
            max_iters: parse_field(kv, "max_iters", defaults.max_iters)?,
            induction_vocab: parse_field(kv, "induction_vocab", defaults.induction_vocab)?,
            csls_k: parse_field(kv, "csls_k", defaults.csls_k)?,
            stop_delta: parse_field(kv, "stop_delta", defaults.stop_delta)?,
        };
        refinement.validate()?;
        let max_vocab = match kv.get("max_vocab").map(String::as_str) {
            None => Some(DEFAULT_MAX_VOCAB),
            Some("unlimited") => None,
            Some(v) => Some(v.parse().map_err(|_| Error::Invalid(format!("bad value `{v}` for `max_vocab`")))?),
        };
        Ok(Manifest {
            hub,
            languages,
            seed: parse_field(kv, "seed", SeedStrategy::default())?,
            normalize: match kv.get("normalize") {
                Some(v) => NormStep::parse_list(v)?,
                None => NormStep::default_pipeline(),
            },
            max_vocab,
            refinement,
            maps,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let kv = kvfile::read_kv(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(&kv, base)
    }

    pub fn to_kv(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.insert("hub".into(), self.hub.clone());
        kv.insert("seed".into(), self.seed.to_string());
        let steps: Vec<String> = self.normalize.iter().map(ToString::to_string).collect();
        kv.insert("normalize".into(), if steps.is_empty() { "none".into() } else { steps.join(",") });
        kv.insert(
            "max_vocab".into(),
            self.max_vocab.map_or("unlimited".into(), |v| v.to_string()),
        );
        kv.insert("max_iters".into(), self.refinement.max_iters.to_string());
        kv.insert("induction_vocab".into(), self.refinement.induction_vocab.to_string());
        kv.insert("csls_k".into(), self.refinement.csls_k.to_string());
        kv.insert("stop_delta".into(), self.refinement.stop_delta.to_string());
        for (lang, p) in &self.languages {
            kv.insert(format!("lang.{lang}"), p.display().to_string());
        }
        for (lang, p) in &self.maps {
            kv.insert(format!("map.{lang}"), p.display().to_string());
        }
        kv
    }

    /// Loads and normalizes every language's embeddings, in manifest order.
    pub fn load_spaces(&self) -> Result<Vec<EmbeddingSpace>> {
        self.languages
            .iter()
            .map(|(lang, path)| Ok(load_embeddings(path, lang, self.max_vocab)?.normalized(&self.normalize)))
            .collect()
    }
}

/// Writes `manifest.txt` plus `maps/<lang>.map` under `dir`.
pub fn save_multispace(ms: &MultiSpace, manifest: &Manifest, dir: &Path) -> Result<PathBuf> {
    let maps_dir = dir.join("maps");
    std::fs::create_dir_all(&maps_dir).map_err(|e| Error::io(&maps_dir, e))?;
    let mut manifest = manifest.clone();
    manifest.maps.clear();
    for (lang, map) in ms.maps() {
        let file = maps_dir.join(format!("{lang}.map"));
        crate::mapping::save_map(map, &file)?;
        manifest.maps.insert(lang.clone(), PathBuf::from("maps").join(format!("{lang}.map")));
    }
    for p in manifest.languages.values_mut() {
        if p.is_relative() {
            *p = std::path::absolute(&*p).map_err(|e| Error::io(p.clone(), e))?;
        }
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, kvfile::format_kv(&manifest.to_kv())).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Reloads a multi-space written by [`save_multispace`].
pub fn load_multispace(manifest_path: &Path) -> Result<(MultiSpace, Manifest)> {
    let manifest = Manifest::read(manifest_path)?;
    let spaces = manifest.load_spaces()?;
    let mut maps = IndexMap::new();
    for (lang, p) in &manifest.maps {
        if lang != &manifest.hub {
            maps.insert(lang.clone(), crate::mapping::load_map(p)?);
        }
    }
    let ms = MultiSpace::from_parts(&manifest.hub, spaces, maps)?;
    Ok((ms, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(lang: &str) -> EmbeddingSpace {
        EmbeddingSpace::from_rows(lang, vec!["a".into(), "b".into()], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn hub_only() {
        let ms = align_to_hub(vec![tiny("en")], "en", SeedStrategy::default(), &RefinementConfig::default()).unwrap();
        assert_eq!(ms.maps().len(), 1);
        assert_eq!(ms.map("en").unwrap().matrix(), &DMatrix::identity(2, 2));
        let (x, y) = ms.pair_view("en", "en").unwrap();
        assert_eq!(&x, tiny("en").vectors());
        assert_eq!(x, y);
    }

    #[test]
    fn missing_hub_and_unknown_codes() {
        let err = align_to_hub(vec![tiny("en")], "fr", SeedStrategy::default(), &RefinementConfig::default());
        assert!(matches!(err, Err(Error::UnknownLanguage(_))));
        let ms = align_to_hub(vec![tiny("en")], "en", SeedStrategy::default(), &RefinementConfig::default()).unwrap();
        assert!(ms.pair_view("en", "xx").is_err());
    }

    #[test]
    fn duplicate_language_rejected() {
        let err = align_to_hub(vec![tiny("en"), tiny("en")], "en", SeedStrategy::default(), &RefinementConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn dimension_mismatch_names_language() {
        let odd = EmbeddingSpace::from_rows("fr", vec!["a".into()], &[vec![1.0, 0.0, 0.0]]).unwrap();
        match align_to_hub(vec![tiny("en"), odd], "en", SeedStrategy::default(), &RefinementConfig::default()) {
            Err(Error::Language { language, .. }) => assert_eq!(language, "fr"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn manifest_round_trip() {
        let text = "hub = en\nseed = similarity:500\nlang.en = en.vec\nlang.es = /abs/es.vec\nmax_iters = 4\n";
        let kv = kvfile::parse_kv(text, Path::new("m")).unwrap();
        let m = Manifest::from_kv(&kv, Path::new("/base")).unwrap();
        assert_eq!(m.languages["en"], PathBuf::from("/base/en.vec"));
        assert_eq!(m.languages["es"], PathBuf::from("/abs/es.vec"));
        assert_eq!(m.refinement.max_iters, 4);
        assert_eq!(m.seed, SeedStrategy::Similarity { vocab_cap: 500 });
        assert_eq!(m.normalize, NormStep::default_pipeline());
        let again = Manifest::from_kv(&m.to_kv(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, m);

        let kv = kvfile::parse_kv("hub = fr\nlang.en = e\n", Path::new("m")).unwrap();
        assert!(Manifest::from_kv(&kv, Path::new("/")).is_err());
        let kv = kvfile::parse_kv("hub = en\nlang.en = e\nstop_delta = 2\n", Path::new("m")).unwrap();
        assert!(Manifest::from_kv(&kv, Path::new("/")).is_err());
    }
}
