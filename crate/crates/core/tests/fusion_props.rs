mod common;

use common::*;
use proptest::prelude::*;
use reid_rerank::fusion::{cffm_fuse, uffm_fuse, uffm_fuse_all, uffm_fuse_all_with, DENOMINATOR_GUARD};
use reid_rerank::simkit::cosine;
use reid_rerank::store::{FeatureRecord, FeatureSet, Role};
use reid_rerank::Parallelism;

fn scaled(set: &FeatureSet, lambda: f32) -> FeatureSet {
    FeatureSet::new(
        set.iter()
            .map(|r| FeatureRecord::new(r.item_id.clone(), r.person_id, r.camera_id, r.feature.iter().map(|x| x * lambda).collect()))
            .collect(),
        set.dim(),
        set.role(),
    )
    .unwrap()
}

#[test]
fn uffm_all_count_and_order() {
    let g = random_set_seeded(3, 60, 8, 12, 4, Role::Gallery);
    let all = uffm_fuse_all(&g, 4).unwrap();
    assert_eq!(all.len(), 60);
    for (j, u) in all.iter().enumerate() {
        assert_eq!(u.source_index, j);
        assert_eq!(u, &uffm_fuse(&g, j, 4).unwrap());
    }
    assert_eq!(all, uffm_fuse_all_with(Parallelism::Sequential, &g, 4).unwrap());
}

#[test]
fn uffm_permutation_equivariance() {
    let g = random_set_seeded(8, 80, 12, 20, 5, Role::Gallery);
    let perm = random_permutation(&mut reid_rerank::rng::seeded_rng(1), g.len());
    let gp = permuted(&g, &perm);
    let base = uffm_fuse_all(&g, 4).unwrap();
    let moved = uffm_fuse_all(&gp, 4).unwrap();
    for (new_i, &old_i) in perm.iter().enumerate() {
        assert_eq!(moved[new_i].vector, base[old_i].vector);
        let mapped: Vec<usize> = moved[new_i].contributors.iter().map(|c| perm[c.index]).collect();
        let orig: Vec<usize> = base[old_i].contributors.iter().map(|c| c.index).collect();
        assert_eq!(mapped, orig);
    }
}

#[test]
fn uffm_k1_is_exact_neighbor() {
    let g = random_set_seeded(21, 70, 10, 15, 3, Role::Gallery);
    for u in uffm_fuse_all(&g, 1).unwrap() {
        let nn = brute_knn(&g, u.source_index, 1);
        if nn.is_empty() {
            assert!(u.is_fallback());
        } else {
            assert_eq!(u.vector, g.feature(nn[0].0));
        }
    }
}

#[test]
fn cffm_matches_oracle_k4() {
    let t = random_set_seeded(77, 120, 16, 15, 4, Role::Train);
    for i in 0..t.len() {
        let rf = cffm_fuse(&t, i, 4).unwrap();
        let want = naive_cffm(&t, i, 4);
        let diff = rf.vector.iter().zip(&want).map(|(a, b)| (*a as f64 - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-6, "row {i}: {diff}");
        if !rf.contributors.is_empty() {
            let w = 1.0 / rf.contributors.len() as f64;
            assert!(rf.contributors.iter().all(|c| c.weight == w));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uffm_weights_normalized_and_camera_pure(seed in any::<u64>(), n in 2usize..60, k in 1usize..8, cams in 1u32..5) {
        let g = random_set_seeded(seed, n, 4, 6, cams, Role::Gallery);
        for u in uffm_fuse_all(&g, k).unwrap() {
            let src_cam = g.record(u.source_index).camera_id;
            for c in &u.contributors {
                prop_assert_ne!(g.record(c.index).camera_id, src_cam);
            }
            if u.is_fallback() {
                prop_assert_eq!(&u.vector[..], g.feature(u.source_index));
                let denom: f64 = brute_knn(&g, u.source_index, k).iter().map(|x| x.1).sum();
                let no_neighbors = brute_knn(&g, u.source_index, k).is_empty();
                prop_assert!(no_neighbors || denom.abs() < DENOMINATOR_GUARD + 1e-12);
            } else {
                prop_assert!((u.weight_sum() - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn uffm_weights_scale_invariant(seed in any::<u64>(), lambda in 0.01f32..100f32) {
        let g = random_set_seeded(seed, 40, 6, 8, 3, Role::Gallery);
        let q = random_set_seeded(seed ^ 0xabc, 5, 6, 8, 3, Role::Query);
        let gs = scaled(&g, lambda);
        let (a, b) = (uffm_fuse_all(&g, 4).unwrap(), uffm_fuse_all(&gs, 4).unwrap());
        for (ua, ub) in a.iter().zip(&b) {
            prop_assert_eq!(ua.contributors.len(), ub.contributors.len());
            for (ca, cb) in ua.contributors.iter().zip(&ub.contributors) {
                prop_assert!((ca.weight - cb.weight).abs() < 1e-6);
            }
            for qi in 0..q.len() {
                let sa = cosine(q.feature(qi), &ua.vector).unwrap();
                let sb = cosine(q.feature(qi), &ub.vector).unwrap();
                prop_assert!((sa - sb).abs() < 1e-6);
            }
        }
    }
}
