mod common;

use std::collections::BTreeSet;

use common::*;
use hubalign::lexicon::{read_lexicon, triangulate, write_lexicon};
use hubalign::morph::{default_ignored, morph_filter, read_morph_table};

#[test]
fn trabalho_reaches_seven_czech_words() {
    let (pt_en, en_cs) = trabalho_dictionaries();
    let pt_cs = triangulate(&pt_en, &en_cs).unwrap();
    assert_eq!((pt_cs.src_lang(), pt_cs.trg_lang()), ("pt", "cs"));
    assert_eq!(pt_cs.targets_of("trabalho"), trabalho_expected());
}

#[test]
fn peaceful_filter_matches_expected_table() {
    let (el_en, en_it) = peaceful_dictionaries();
    let (el, it) = peaceful_tags();
    let raw = triangulate(&el_en, &en_it).unwrap();
    assert_eq!(raw.len(), 12);
    let kept = morph_filter(&raw, &el, &it, &default_ignored());
    for (form, expected) in peaceful_expected() {
        let got: BTreeSet<&str> = kept.targets_of(form).into_iter().collect();
        assert_eq!(got, expected, "{form}");
    }
    assert_eq!(kept.len(), 7);
}

#[test]
fn filtering_without_ignored_features_is_stricter() {
    let (el_en, en_it) = peaceful_dictionaries();
    let (el, it) = peaceful_tags();
    let raw = triangulate(&el_en, &en_it).unwrap();
    let strict = morph_filter(&raw, &el, &it, &Default::default());
    // gender now counts, so the neuter forms have no Italian counterpart left
    assert_eq!(strict.targets_of("ειρηνικός"), ["pacifico"]);
    assert_eq!(strict.targets_of("ειρηνική"), ["pacifica"]);
    assert!(strict.len() < morph_filter(&raw, &el, &it, &default_ignored()).len());
}

#[test]
fn pivot_mismatch_is_rejected() {
    let (el_en, _) = peaceful_dictionaries();
    let (_, en_cs) = trabalho_dictionaries();
    assert!(triangulate(&en_cs, &el_en).is_err());
}

#[test]
fn files_round_trip_through_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (el_en, en_it) = peaceful_dictionaries();
    write_lexicon(&el_en, dir.path().join("el-en.txt")).unwrap();
    write_lexicon(&en_it, dir.path().join("en-it.txt")).unwrap();
    std::fs::write(
        dir.path().join("el.tags"),
        "# form\tlemma\tupos\tfeats\n\
         ειρηνικός\tειρηνικός\tADJ\tCase=Nom|Gender=Masc|Number=Sing\n\
         ειρηνική\tειρηνικός\tADJ\tCase=Nom|Gender=Fem|Number=Sing\n\
         ειρηνικό\tειρηνικός\tADJ\tCase=Nom|Gender=Neut|Number=Sing\n\
         ειρηνικά\tειρηνικός\tADJ\tCase=Nom|Gender=Neut|Number=Plur\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("it.tags"),
        "pacifico\tpacifico\tADJ\tGender=Masc|Number=Sing\n\
         pacifici\tpacifico\tADJ\tGender=Masc|Number=Plur\n\
         pacifica\tpacifico\tADJ\tGender=Fem|Number=Sing\n",
    )
    .unwrap();

    let a = read_lexicon(dir.path().join("el-en.txt"), "el", "en").unwrap();
    let b = read_lexicon(dir.path().join("en-it.txt"), "en", "it").unwrap();
    assert_eq!(a, el_en);
    let el = read_morph_table(dir.path().join("el.tags"), "el").unwrap();
    let it = read_morph_table(dir.path().join("it.tags"), "it").unwrap();
    let kept = morph_filter(&triangulate(&a, &b).unwrap(), &el, &it, &default_ignored());
    for (form, expected) in peaceful_expected() {
        let got: BTreeSet<&str> = kept.targets_of(form).into_iter().collect();
        assert_eq!(got, expected);
    }
}
