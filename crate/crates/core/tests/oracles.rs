mod common;

use common::*;
use hubalign::extraction::symmetrize_gdfa;
use hubalign::mapping::{orthogonality_error, procrustes, self_learn, seed_identical, OrthogonalMap, RefinementConfig};
use hubalign::retrieval::{csls_topk, precision_at_k, retrieve, RetrievalConfig};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn procrustes_recovers_planted_rotation() {
    let mut r = rng(7);
    for _ in 0..20 {
        let x = gaussian(40, 6, &mut r);
        let w = random_orthogonal(6, &mut r);
        let got = procrustes(&x, &(&x * &w)).unwrap();
        assert!((&got - &w).norm() < 1e-9);
        assert!(orthogonality_error(&got) < 1e-12);
    }
}

#[test]
fn procrustes_beats_random_rotations() {
    let mut r = rng(8);
    let x = gaussian(30, 5, &mut r);
    let y = &x * random_orthogonal(5, &mut r) + gaussian(30, 5, &mut r) * 0.3;
    let w = procrustes(&x, &y).unwrap();
    let best = (&x * &w - &y).norm();
    for _ in 0..200 {
        let q = random_orthogonal(5, &mut r);
        assert!(best <= (&x * q - &y).norm() + 1e-12);
    }
}

#[test]
fn csls_matches_brute_force() {
    let mut r = rng(11);
    for _ in 0..15 {
        let m = r.random_range(1..60usize);
        let v = r.random_range(1..60usize);
        let d = r.random_range(1..12usize);
        let q = gaussian(m, d, &mut r);
        let c = gaussian(v, d, &mut r);
        for k in [1, 3, 10] {
            let got: Vec<Vec<usize>> = csls_topk(&q, &c, k, v)
                .unwrap()
                .into_iter()
                .map(|row| row.into_iter().map(|(j, _)| j).collect())
                .collect();
            assert_eq!(got, brute_csls_topk(&q, &c, k, v));
        }
    }
}

#[test]
fn csls_ties_go_to_lower_index() {
    // every candidate is the same point, so every score ties
    let q = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let c = nalgebra::DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
    for row in csls_topk(&q, &c, 2, 3).unwrap() {
        assert_eq!(row.iter().map(|p| p.0).collect::<Vec<_>>(), [0, 1, 2]);
    }
}

#[test]
fn retrieval_is_rotation_invariant() {
    let p = rotated_pair(150, 10, 0, 0.0, 3);
    let mut r = rng(4);
    let rot = OrthogonalMap::new("trg", "trg", random_orthogonal(10, &mut r)).unwrap();
    let map = OrthogonalMap::new("src", "trg", p.rotation.clone()).unwrap();
    let mapped = map.apply_space(&p.src).unwrap();
    let words: Vec<&str> = p.src.words().iter().map(String::as_str).collect();
    let cfg = RetrievalConfig::default();
    let plain = retrieve(&mapped, &p.trg, &words, cfg).unwrap();
    let turned = retrieve(&rot.apply_space(&mapped).unwrap(), &rot.apply_space(&p.trg).unwrap(), &words, cfg).unwrap();
    for (a, b) in plain.topk.iter().zip(&turned.topk) {
        assert_eq!(a.iter().map(|x| &x.0).collect::<Vec<_>>(), b.iter().map(|x| &x.0).collect::<Vec<_>>());
    }
    let eval = precision_at_k(&plain, &p.gold, &[1]).unwrap();
    assert_eq!(eval.p_at[&1], 1.0);
}

#[test]
fn gdfa_matches_reference_exhaustively_on_2x3() {
    // every pair of link sets on a 2x3 grid
    for f in 0u32..64 {
        for g in 0u32..64 {
            let to_links = |m: u32| (0..6).filter(|b| m >> b & 1 == 1).map(|b| (b / 3, b % 3)).collect();
            let (fwd, rev) = (to_links(f), to_links(g));
            assert_eq!(symmetrize_gdfa(&fwd, &rev, 2, 3).unwrap(), brute_gdfa(&fwd, &rev, 2, 3));
        }
    }
}

#[test]
fn gdfa_matches_reference_exhaustively_on_3x3() {
    for f in 0u32..512 {
        let fwd = mask_links(f);
        for g in 0u32..512 {
            let rev = mask_links(g);
            let got = symmetrize_gdfa(&fwd, &rev, 3, 3).unwrap();
            assert_eq!(got, brute_gdfa(&fwd, &rev, 3, 3), "forward {f:09b} reverse {g:09b}");
        }
    }
}

#[test]
fn self_learning_recovers_a_noisy_rotation() {
    let p = rotated_pair(600, 20, 25, 0.01, 21);
    let seed = seed_identical(&p.src, &p.trg, false);
    assert_eq!(seed.len(), 25);
    let out = self_learn(&p.src, &p.trg, &seed, &RefinementConfig::default()).unwrap();
    assert!(out.iterations.len() <= 10);
    assert!((out.map.matrix() - &p.rotation).norm() < 0.05);
    let correct = out.dictionary.entries().iter().filter(|(s, t)| p.gold.contains(s, t)).count();
    assert!(correct as f64 >= 0.95 * out.dictionary.len() as f64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn procrustes_is_orthogonal_for_any_input(seed in any::<u64>(), n in 1usize..20, d in 1usize..8) {
        let mut r = rng(seed);
        let x = gaussian(n, d, &mut r);
        let y = gaussian(n, d, &mut r);
        let w = procrustes(&x, &y).unwrap();
        prop_assert!(orthogonality_error(&w) < 1e-9);
    }

    #[test]
    fn gdfa_stays_between_intersection_and_union(f in 0u32..512, g in 0u32..512) {
        let (fwd, rev) = (mask_links(f), mask_links(g));
        let out = symmetrize_gdfa(&fwd, &rev, 3, 3).unwrap();
        prop_assert!(fwd.intersection(&rev).all(|p| out.contains(p)));
        prop_assert!(out.iter().all(|p| fwd.contains(p) || rev.contains(p)));
    }
}
