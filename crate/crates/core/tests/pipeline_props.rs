mod common;

use common::*;
use proptest::prelude::*;
use reid_rerank::fusion::{uffm_fuse_all, RefinedFeature};
use reid_rerank::pipeline::{combined_score, evaluate, evaluate_with, rank_all, rank_all_with};
use reid_rerank::rng::seeded_rng;
use reid_rerank::store::{CombinationWeights, FeatureRecord, FeatureSet, Role};
use reid_rerank::Parallelism;

fn instance(seed: u64, nq: usize, ng: usize) -> (FeatureSet, FeatureSet) {
    let q = random_set_seeded(seed, nq, 5, 6, 3, Role::Query);
    let mut g = random_set_seeded(seed.wrapping_add(1), ng, 5, 6, 3, Role::Gallery);
    // sprinkle distractors
    let records = g
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let pid = if j % 7 == 3 { -1 } else { r.person_id };
            FeatureRecord::new(r.item_id.clone(), pid, r.camera_id, r.feature.clone())
        })
        .collect();
    g = FeatureSet::new(records, 5, Role::Gallery).unwrap();
    (q, g)
}

fn scores_for(q: &FeatureSet, g: &FeatureSet, urfs: &[RefinedFeature], w: &CombinationWeights) -> Vec<Vec<f64>> {
    q.iter()
        .map(|qr| {
            g.iter()
                .enumerate()
                .map(|(j, gr)| {
                    let c = if qr.camera_id == gr.camera_id { 1.0 } else { 0.0 };
                    w.alpha * naive_cos(&qr.feature, &gr.feature) + w.beta * naive_cos(&qr.feature, &urfs[j].vector) + w.gamma * c
                })
                .collect()
        })
        .collect()
}

#[test]
fn metrics_match_naive_definitions() {
    for seed in 0..50u64 {
        let mut rng = seeded_rng(seed);
        use rand::Rng;
        let (nq, ng) = (rng.random_range(1..15), rng.random_range(1..=50));
        let (q, g) = instance(seed * 31, nq, ng);
        let urfs = uffm_fuse_all(&g, 3).unwrap();
        let w = CombinationWeights::new(0.7, 0.4, -0.05);
        let rep = evaluate(&rank_all(&q, &g, &urfs, &w).unwrap(), &q, &g, 10);
        let naive = naive_metrics(&q, &g, &scores_for(&q, &g, &urfs, &w), 10);
        assert_eq!(rep.num_valid_queries, naive.valid, "seed {seed}");
        assert!((rep.map - naive.map).abs() <= 1e-9, "seed {seed}");
        for k in 0..10 {
            assert!((rep.cmc[k] - naive.cmc[k]).abs() <= 1e-9);
        }
    }
}

#[test]
fn baseline_weights_reduce_to_cosine_retrieval() {
    for seed in 0..20u64 {
        let (q, g) = instance(seed, 12, 40);
        let urfs = uffm_fuse_all(&g, 4).unwrap();
        let r = rank_all(&q, &g, &urfs, &CombinationWeights::baseline()).unwrap();
        for (i, ri) in r.iter().enumerate() {
            let mut plain: Vec<(usize, f64)> = (0..g.len())
                .map(|j| (j, reid_rerank::simkit::cosine(q.feature(i), g.feature(j)).unwrap()))
                .collect();
            plain.sort_by(|a, b| reid_rerank::simkit::rank_order(*a, *b));
            assert_eq!(ri.ordered_gallery, plain);
        }
        let rep = evaluate(&r, &q, &g, 20);
        let naive = naive_metrics(&q, &g, &cosine_scores(&q, &g), 20);
        assert!((rep.map - naive.map).abs() <= 1e-12);
        assert_eq!(rep.rank(1), naive.cmc[0]);
    }
}

#[test]
fn scaling_queries_keeps_orderings() {
    let (q, g) = instance(99, 8, 30);
    let urfs = uffm_fuse_all(&g, 4).unwrap();
    let q2 = FeatureSet::new(
        q.iter()
            .map(|r| FeatureRecord::new(r.item_id.clone(), r.person_id, r.camera_id, r.feature.iter().map(|x| x * 2.0).collect()))
            .collect(),
        5,
        Role::Query,
    )
    .unwrap();
    let w = CombinationWeights::new(0.5, 0.6, 0.1);
    let a = rank_all(&q, &g, &urfs, &w).unwrap();
    let b = rank_all(&q2, &g, &urfs, &w).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let ox: Vec<usize> = x.ordered_gallery.iter().map(|p| p.0).collect();
        let oy: Vec<usize> = y.ordered_gallery.iter().map(|p| p.0).collect();
        assert_eq!(ox, oy);
    }
}

#[test]
fn gallery_permutation_changes_no_metric() {
    for seed in 0..10u64 {
        let (q, g) = instance(seed + 500, 10, 45);
        let w = CombinationWeights::new(0.6, 0.5, -0.02);
        let urfs = uffm_fuse_all(&g, 4).unwrap();
        let rep = evaluate(&rank_all(&q, &g, &urfs, &w).unwrap(), &q, &g, 15);

        let perm = random_permutation(&mut seeded_rng(seed), g.len());
        let gp = permuted(&g, &perm);
        let urfs_p = uffm_fuse_all(&gp, 4).unwrap();
        let rep_p = evaluate(&rank_all(&q, &gp, &urfs_p, &w).unwrap(), &q, &gp, 15);
        assert!((rep.map - rep_p.map).abs() < 1e-12, "seed {seed}");
        assert_eq!(rep.cmc, rep_p.cmc);
        assert_eq!(rep.per_query_ap.len(), rep_p.per_query_ap.len());
    }
}

#[test]
fn strategies_agree() {
    let (q, g) = instance(3, 20, 50);
    let urfs = uffm_fuse_all(&g, 4).unwrap();
    let w = CombinationWeights::new(0.2, 0.9, 0.05);
    let a = rank_all_with(Parallelism::Sequential, &q, &g, &urfs, &w).unwrap();
    let b = rank_all_with(Parallelism::Parallel, &q, &g, &urfs, &w).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        evaluate_with(Parallelism::Sequential, &a, &q, &g, 20),
        evaluate_with(Parallelism::Parallel, &b, &q, &g, 20)
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn cmc_monotone_and_no_junk_matches(seed in any::<u64>(), nq in 1usize..10, ng in 1usize..40) {
        let (q, g) = instance(seed, nq, ng);
        let urfs = uffm_fuse_all(&g, 2).unwrap();
        let r = rank_all(&q, &g, &urfs, &CombinationWeights::new(0.5, 0.5, 0.3)).unwrap();
        for ri in &r {
            let qr = q.record(ri.query_index);
            let mut seen: Vec<usize> = ri.ordered_gallery.iter().map(|p| p.0).collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..g.len()).collect::<Vec<_>>());
            for w in ri.ordered_gallery.windows(2) {
                prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
            }
            for (j, gr) in g.iter().enumerate() {
                if qr.person_id >= 0 && gr.person_id == qr.person_id && gr.camera_id == qr.camera_id {
                    prop_assert!(!ri.valid_mask[j]);
                }
            }
        }
        let rep = evaluate(&r, &q, &g, 20);
        for w in rep.cmc.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        prop_assert!((0.0..=1.0).contains(&rep.map));
        for ap in rep.per_query_ap.iter().flatten() {
            prop_assert!((0.0..=1.0).contains(ap));
        }
    }

    #[test]
    fn combined_score_is_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0u8..2, wa in -2.0f64..2.0, wb in -2.0f64..2.0, wc in -2.0f64..2.0) {
        let w = CombinationWeights::new(wa, wb, wc);
        let s = combined_score(a, b, f64::from(c), &w);
        prop_assert!((s - (wa * a + wb * b + wc * f64::from(c))).abs() < 1e-12);
        prop_assert_eq!(combined_score(a, b, f64::from(c), &CombinationWeights::baseline()), a);
    }
}
