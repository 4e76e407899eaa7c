mod common;

use common::*;
use hubalign::embedio::{write_embeddings, NormStep};
use hubalign::mapping::{orthogonality_error, RefinementConfig, SeedStrategy};
use hubalign::multialign::{align_to_hub, load_multispace, save_multispace, Manifest};
use hubalign::Error;
use indexmap::IndexMap;

#[test]
fn every_hub_gives_perfect_retrieval_on_exact_rotations() {
    let spaces = rotated_family(&["aa", "bb", "cc"], 250, 12, 20, 5);
    for hub in ["aa", "bb", "cc"] {
        let (worst, same) = hub_equivalence(&spaces, hub);
        assert_eq!(worst, 1.0, "hub {hub}");
        assert!(same, "hub {hub}");
    }
}

#[test]
fn reports_and_maps_per_language() {
    let spaces = rotated_family(&["aa", "bb", "cc"], 200, 10, 15, 9);
    let ms = align_to_hub(spaces, "bb", SeedStrategy::default(), &RefinementConfig::default()).unwrap();
    assert_eq!(ms.hub(), "bb");
    assert_eq!(ms.languages().collect::<Vec<_>>(), ["aa", "bb", "cc"]);
    assert!(ms.report("bb").is_none());
    for lang in ["aa", "cc"] {
        let r = ms.report(lang).unwrap();
        assert_eq!(r.seed_size, 15);
        assert!(r.iterations >= 1 && r.iterations <= 10);
        assert_eq!(r.dictionary_size, 200);
        assert!(orthogonality_error(ms.map(lang).unwrap().matrix()) < 1e-9);
    }
}

#[test]
fn disjoint_scripts_fall_back_to_similarity_seed() {
    let spaces = rotated_family(&["aa", "bb"], 120, 8, 0, 13);
    let ms = align_to_hub(spaces, "aa", SeedStrategy::default(), &RefinementConfig::default()).unwrap();
    assert!(matches!(ms.report("bb").unwrap().seed, SeedStrategy::Similarity { .. }));
}

#[test]
fn saved_multispace_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spaces = rotated_family(&["aa", "bb", "cc"], 150, 8, 12, 17);
    let mut languages = IndexMap::new();
    for s in &spaces {
        let p = dir.path().join(format!("{}.vec", s.language()));
        write_embeddings(s, &p).unwrap();
        languages.insert(s.language().to_string(), p);
    }
    let manifest = Manifest {
        hub: "aa".into(),
        languages,
        seed: SeedStrategy::default(),
        normalize: NormStep::parse_list("none").unwrap(),
        max_vocab: None,
        refinement: RefinementConfig::default(),
        maps: IndexMap::new(),
    };
    let loaded = manifest.load_spaces().unwrap();
    let ms = align_to_hub(loaded, "aa", manifest.seed, &manifest.refinement).unwrap();
    let out = dir.path().join("model");
    let path = save_multispace(&ms, &manifest, &out).unwrap();
    let (again, m2) = load_multispace(&path).unwrap();
    assert_eq!(m2.hub, "aa");
    for lang in ["aa", "bb", "cc"] {
        let (a, b) = (ms.map(lang).unwrap().matrix(), again.map(lang).unwrap().matrix());
        assert!((a - b).abs().max() < 1e-12, "{lang}");
    }
}

#[test]
fn failures_name_the_language() {
    let mut spaces = rotated_family(&["aa", "bb"], 50, 6, 10, 1);
    let bad = spaces[1].vectors().columns(0, 5).into_owned();
    spaces[1] = space("bb", spaces[1].words().to_vec(), bad);
    match align_to_hub(spaces, "aa", SeedStrategy::default(), &RefinementConfig::default()) {
        Err(Error::Language { language, .. }) => assert_eq!(language, "bb"),
        other => panic!("unexpected {other:?}"),
    }
}
