#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use hubalign::embedio::EmbeddingSpace;
use hubalign::extraction::{Alignment, AlignedBitext, SentencePair};
use hubalign::lexicon::Lexicon;
use hubalign::morph::{MorphAnalysis, MorphTable};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Standard normal draw (Box-Muller).
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| normal(rng))
}

/// Haar-ish random orthogonal matrix from the QR of a Gaussian matrix.
pub fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn unit_rows(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for mut row in m.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        }
    }
    m
}

pub fn space(lang: &str, words: Vec<String>, vectors: DMatrix<f64>) -> EmbeddingSpace {
    EmbeddingSpace::new(lang, words, vectors).unwrap()
}

/// A source space and its rotated, noisy copy. The first `shared` words are
/// spelled the same on both sides; the rest are `s{i}` / `t{i}`.
pub struct RotatedPair {
    pub src: EmbeddingSpace,
    pub trg: EmbeddingSpace,
    pub rotation: DMatrix<f64>,
    pub gold: Lexicon,
}

pub fn rotated_pair(n: usize, d: usize, shared: usize, noise: f64, seed: u64) -> RotatedPair {
    let mut r = rng(seed);
    let x = unit_rows(gaussian(n, d, &mut r));
    let w = random_orthogonal(d, &mut r);
    let y = &x * &w + gaussian(n, d, &mut r) * noise;
    let name = |i: usize, side: &str| if i < shared { format!("w{i}") } else { format!("{side}{i}") };
    let sw: Vec<String> = (0..n).map(|i| name(i, "s")).collect();
    let tw: Vec<String> = (0..n).map(|i| name(i, "t")).collect();
    let gold = Lexicon::from_pairs("src", "trg", sw.iter().zip(&tw).map(|(a, b)| (a.as_str(), b.as_str())));
    RotatedPair {
        src: space("src", sw, x),
        trg: space("trg", tw, y),
        rotation: w,
        gold,
    }
}

/// Several languages that are exact rotations of one base space. The first
/// `shared` words are spelled identically everywhere.
pub fn rotated_family(langs: &[&str], n: usize, d: usize, shared: usize, seed: u64) -> Vec<EmbeddingSpace> {
    let mut r = rng(seed);
    let base = unit_rows(gaussian(n, d, &mut r));
    langs
        .iter()
        .map(|lang| {
            let w = random_orthogonal(d, &mut r);
            let words = (0..n).map(|i| if i < shared { format!("n{i}") } else { format!("{lang}{i}") }).collect();
            space(lang, words, &base * w)
        })
        .collect()
}

pub fn family_gold(src: &EmbeddingSpace, trg: &EmbeddingSpace) -> Lexicon {
    Lexicon::from_pairs(
        src.language(),
        trg.language(),
        src.words().iter().zip(trg.words()).map(|(a, b)| (a.as_str(), b.as_str())),
    )
}

/// CSLS by the definition, one score at a time.
pub fn brute_csls_topk(q: &DMatrix<f64>, c: &DMatrix<f64>, k: usize, k_max: usize) -> Vec<Vec<usize>> {
    let unit = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| {
                let row: Vec<f64> = m.row(i).iter().copied().collect();
                let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                row.iter().map(|v| if n > 0.0 { v * (1.0 / n) } else { 0.0 }).collect()
            })
            .collect()
    };
    let (qs, cs) = (unit(q), unit(c));
    let cos = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mean_top = |mut v: Vec<f64>| {
        v.sort_by(|a, b| b.total_cmp(a));
        let k = k.min(v.len());
        v[..k].iter().sum::<f64>() / k as f64
    };
    let r_t: Vec<f64> = qs.iter().map(|x| mean_top(cs.iter().map(|y| cos(x, y)).collect())).collect();
    let r_s: Vec<f64> = cs.iter().map(|y| mean_top(qs.iter().map(|x| cos(y, x)).collect())).collect();
    let mut out = Vec::new();
    for (i, x) in qs.iter().enumerate() {
        let mut scored = Vec::new();
        for (j, y) in cs.iter().enumerate() {
            scored.push((j, 2.0 * cos(x, y) - r_t[i] - r_s[j]));
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out.push(scored.into_iter().take(k_max).map(|(j, _)| j).collect());
    }
    out
}

/// grow-diag-final-and written directly over link sets, recomputing every
/// "is aligned" test from scratch.
pub fn brute_gdfa(fwd: &Alignment, rev: &Alignment, src_len: usize, trg_len: usize) -> Alignment {
    let neighbors = [(-1, -1), (-1, 1), (1, -1), (1, 1), (-1, 0), (0, -1), (1, 0), (0, 1)];
    let union: Alignment = fwd | rev;
    let mut a: Alignment = fwd & rev;
    let src_free = |a: &Alignment, i: usize| !a.iter().any(|&(x, _)| x == i);
    let trg_free = |a: &Alignment, j: usize| !a.iter().any(|&(_, y)| y == j);
    loop {
        let before = a.clone();
        for i in 0..src_len as i64 {
            for j in 0..trg_len as i64 {
                if !a.contains(&(i as usize, j as usize)) {
                    continue;
                }
                for (di, dj) in neighbors {
                    let (ni, nj) = (i + di, j + dj);
                    if ni < 0 || nj < 0 {
                        continue;
                    }
                    let p = (ni as usize, nj as usize);
                    if union.contains(&p) && !a.contains(&p) && (src_free(&a, p.0) || trg_free(&a, p.1)) {
                        a.insert(p);
                    }
                }
            }
        }
        if a == before {
            break;
        }
    }
    for dir in [fwd, rev] {
        for i in 0..src_len {
            for j in 0..trg_len {
                if dir.contains(&(i, j)) && src_free(&a, i) && trg_free(&a, j) {
                    a.insert((i, j));
                }
            }
        }
    }
    a
}

/// Links of a 3x3 grid encoded as a 9-bit mask, row-major.
pub fn mask_links(mask: u32) -> Alignment {
    (0..9).filter(|b| mask >> b & 1 == 1).map(|b| (b / 3, b % 3)).collect()
}

fn one_word_sentence(s: &str, t: &str) -> SentencePair {
    let link: Alignment = BTreeSet::from([(0, 0)]);
    SentencePair {
        src: vec![s.to_string()],
        trg: vec![t.to_string()],
        forward: link.clone(),
        reverse: link,
    }
}

/// 1000 one-word sentence pairs with planted statistics:
///
/// * `five`/`cinq` co-occur exactly 5 times, both probabilities 1;
/// * `six`/`seis` co-occur 6 times, both probabilities 1;
/// * `quarter` goes to `q1` 10 times and `q2` 30 times (p = 0.25 / 0.75);
/// * `tf` goes to `t35` 35 times and `t65` 65 times (p = 0.35 / 0.65);
/// * the rest are filler pairs `f{k}`/`g{k}`.
pub fn planted_bitext() -> AlignedBitext {
    let mut b = AlignedBitext::new("src", "trg");
    let plan: [(&str, &str, usize); 6] = [
        ("five", "cinq", 5),
        ("six", "seis", 6),
        ("quarter", "q1", 10),
        ("quarter", "q2", 30),
        ("tf", "t35", 35),
        ("tf", "t65", 65),
    ];
    for (s, t, n) in plan {
        for _ in 0..n {
            b.push(one_word_sentence(s, t)).unwrap();
        }
    }
    let mut k = 0;
    while b.len() < 1000 {
        b.push(one_word_sentence(&format!("f{}", k % 40), &format!("g{}", k % 40))).unwrap();
        k += 1;
    }
    b
}

pub fn lex(src: &str, trg: &str, pairs: &[(&str, &str)]) -> Lexicon {
    Lexicon::from_pairs(src, trg, pairs.iter().copied())
}

/// Greek -> English and English -> Italian entries for the "peaceful" example.
pub fn peaceful_dictionaries() -> (Lexicon, Lexicon) {
    let el_en = lex(
        "el",
        "en",
        &[("ειρηνικός", "peaceful"), ("ειρηνική", "peaceful"), ("ειρηνικό", "peaceful"), ("ειρηνικά", "peaceful")],
    );
    let en_it = lex("en", "it", &[("peaceful", "pacifico"), ("peaceful", "pacifici"), ("peaceful", "pacifica")]);
    (el_en, en_it)
}

pub fn peaceful_tags() -> (MorphTable, MorphTable) {
    let mut el = MorphTable::new("el");
    for (form, g, n) in [
        ("ειρηνικός", "Masc", "Sing"),
        ("ειρηνική", "Fem", "Sing"),
        ("ειρηνικό", "Neut", "Sing"),
        ("ειρηνικά", "Neut", "Plur"),
    ] {
        el.add(MorphAnalysis::new(form, "ειρηνικός", "ADJ", &[("Case", "Nom"), ("Gender", g), ("Number", n)]));
    }
    let mut it = MorphTable::new("it");
    for (form, g, n) in [("pacifico", "Masc", "Sing"), ("pacifici", "Masc", "Plur"), ("pacifica", "Fem", "Sing")] {
        it.add(MorphAnalysis::new(form, "pacifico", "ADJ", &[("Gender", g), ("Number", n)]));
    }
    (el, it)
}

/// What the filter must keep for every Greek form.
pub fn peaceful_expected() -> BTreeMap<&'static str, BTreeSet<&'static str>> {
    BTreeMap::from([
        ("ειρηνικός", BTreeSet::from(["pacifico", "pacifica"])),
        ("ειρηνική", BTreeSet::from(["pacifico", "pacifica"])),
        ("ειρηνικό", BTreeSet::from(["pacifico", "pacifica"])),
        ("ειρηνικά", BTreeSet::from(["pacifici"])),
    ])
}

pub fn trabalho_dictionaries() -> (Lexicon, Lexicon) {
    let pt_en = lex("pt", "en", &[("trabalho", "job"), ("trabalho", "work")]);
    let en_cs = lex(
        "en",
        "cs",
        &[
            ("job", "prácu"),
            ("job", "zamestnanie"),
            ("job", "praca"),
            ("job", "práca"),
            ("work", "praca"),
            ("work", "práca"),
            ("work", "dielo"),
            ("work", "práce"),
            ("work", "pracovné"),
        ],
    );
    (pt_en, en_cs)
}

pub fn trabalho_expected() -> Vec<&'static str> {
    vec!["prácu", "zamestnanie", "praca", "práca", "dielo", "práce", "pracovné"]
}

/// Aligns a rotated family through `hub` and checks every directed pair.
/// Returns the lowest P@1 seen and whether retrieval in hub space agreed
/// with retrieval through the composed map for every pair.
pub fn hub_equivalence(spaces: &[EmbeddingSpace], hub: &str) -> (f64, bool) {
    use hubalign::mapping::{RefinementConfig, SeedStrategy};
    use hubalign::multialign::align_to_hub;
    use hubalign::retrieval::{precision_at_k, retrieve, RetrievalConfig};

    let ms = align_to_hub(spaces.to_vec(), hub, SeedStrategy::default(), &RefinementConfig::default()).unwrap();
    let cfg = RetrievalConfig::default();
    let mut worst = 1.0f64;
    let mut same = true;
    for a in spaces {
        for b in spaces {
            if a.language() == b.language() {
                continue;
            }
            let words: Vec<&str> = a.words().iter().map(String::as_str).collect();
            let through_hub = ms.translate(a.language(), b.language(), &words, cfg).unwrap();
            let composed = ms.composed_map(a.language(), b.language()).unwrap();
            let direct = retrieve(&composed.apply_space(a).unwrap(), b, &words, cfg).unwrap();
            let p1 = precision_at_k(&through_hub, &family_gold(a, b), &[1]).unwrap().p_at[&1];
            worst = worst.min(p1);
            for (x, y) in through_hub.topk.iter().zip(&direct.topk) {
                let wx: Vec<&String> = x.iter().map(|p| &p.0).collect();
                let wy: Vec<&String> = y.iter().map(|p| &p.0).collect();
                same &= wx == wy && x.iter().zip(y).all(|(p, q)| (p.1 - q.1).abs() < 1e-9);
            }
        }
    }
    (worst, same)
}
