//! Independent reference implementations used as test oracles. Nothing here
//! calls into the crate's similarity, fusion, ranking, or metric code.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use reid_rerank::rng::{seeded_rng, ReproRng};
use reid_rerank::store::{FeatureRecord, FeatureSet, Role};

pub fn naive_cos(a: &[f32], b: &[f32]) -> f64 {
    let mut ab = 0.0f64;
    let mut aa = 0.0f64;
    let mut bb = 0.0f64;
    for i in 0..a.len() {
        ab += a[i] as f64 * b[i] as f64;
        aa += a[i] as f64 * a[i] as f64;
        bb += b[i] as f64 * b[i] as f64;
    }
    ab / (aa.sqrt() * bb.sqrt())
}

/// Random labeled set with gaussian features.
pub fn random_set(rng: &mut ReproRng, n: usize, dim: usize, ids: i64, cams: u32, role: Role) -> FeatureSet {
    let records = (0..n)
        .map(|i| {
            let f: Vec<f32> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            FeatureRecord::new(
                format!("{role}{i}"),
                rng.random_range(0..ids),
                rng.random_range(0..cams),
                f,
            )
        })
        .collect();
    FeatureSet::new(records, dim, role).unwrap()
}

pub fn random_set_seeded(seed: u64, n: usize, dim: usize, ids: i64, cams: u32, role: Role) -> FeatureSet {
    random_set(&mut seeded_rng(seed), n, dim, ids, cams, role)
}

/// Full sort of every cross-camera candidate.
pub fn brute_knn(set: &FeatureSet, target: usize, k: usize) -> Vec<(usize, f64)> {
    let t = set.record(target);
    let mut all: Vec<(usize, f64)> = Vec::new();
    for j in 0..set.len() {
        if j != target && set.record(j).camera_id != t.camera_id {
            all.push((j, naive_cos(&t.feature, set.feature(j))));
        }
    }
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Same-identity pool, cross camera when possible, top-k by cosine, mean.
pub fn naive_cffm(set: &FeatureSet, target: usize, k: usize) -> Vec<f64> {
    let t = set.record(target);
    let same: Vec<usize> = (0..set.len())
        .filter(|&j| j != target && set.record(j).person_id == t.person_id)
        .collect();
    let cross: Vec<usize> = same
        .iter()
        .copied()
        .filter(|&j| set.record(j).camera_id != t.camera_id)
        .collect();
    let pool = if cross.is_empty() { same } else { cross };
    if pool.is_empty() {
        return t.feature.iter().map(|&x| x as f64).collect();
    }
    let mut scored: Vec<(usize, f64)> = pool.iter().map(|&j| (j, naive_cos(&t.feature, set.feature(j)))).collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    let mut mean = vec![0.0f64; set.dim()];
    for &(j, _) in &scored {
        for (m, &x) in mean.iter_mut().zip(set.feature(j)) {
            *m += x as f64;
        }
    }
    mean.iter().map(|m| m / scored.len() as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMetrics {
    pub cmc: Vec<f64>,
    pub map: f64,
    pub valid: usize,
}

/// Metric definitions applied literally: drop same-identity-same-camera
/// items, sort the rest by score, and read off hit positions.
pub fn naive_metrics(queries: &FeatureSet, gallery: &FeatureSet, scores: &[Vec<f64>], max_rank: usize) -> NaiveMetrics {
    let mut cmc = vec![0.0; max_rank];
    let mut ap_total = 0.0;
    let mut valid = 0;
    for (i, q) in queries.iter().enumerate() {
        let mut kept: Vec<(usize, f64)> = Vec::new();
        for (j, g) in gallery.iter().enumerate() {
            let junk = q.person_id >= 0 && g.person_id == q.person_id && g.camera_id == q.camera_id;
            if !junk {
                kept.push((j, scores[i][j]));
            }
        }
        kept.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let relevant: Vec<usize> = kept
            .iter()
            .enumerate()
            .filter(|(_, (j, _))| q.person_id >= 0 && gallery.record(*j).person_id == q.person_id)
            .map(|(pos, _)| pos + 1)
            .collect();
        if relevant.is_empty() {
            continue;
        }
        valid += 1;
        let ap: f64 = relevant.iter().enumerate().map(|(h, &pos)| (h + 1) as f64 / pos as f64).sum::<f64>()
            / relevant.len() as f64;
        ap_total += ap;
        for k in 1..=max_rank {
            if relevant[0] <= k {
                cmc[k - 1] += 1.0;
            }
        }
    }
    let denom = if valid == 0 { 1.0 } else { valid as f64 };
    NaiveMetrics {
        cmc: cmc.iter().map(|c| c / denom).collect(),
        map: ap_total / denom,
        valid,
    }
}

/// Plain cosine score matrix.
pub fn cosine_scores(queries: &FeatureSet, gallery: &FeatureSet) -> Vec<Vec<f64>> {
    queries
        .iter()
        .map(|q| gallery.iter().map(|g| naive_cos(&q.feature, &g.feature)).collect())
        .collect()
}

/// Copy of `set` with rows reordered so that new row `i` is old row `perm[i]`.
pub fn permuted(set: &FeatureSet, perm: &[usize]) -> FeatureSet {
    let records = perm.iter().map(|&i| set.record(i).clone()).collect();
    FeatureSet::new(records, set.dim(), set.role()).unwrap()
}

pub fn random_permutation(rng: &mut ReproRng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Step-by-step replay of the triplet data generation loop: the documented
/// draw protocol (anchor, positive, negative, three draws per step) followed
/// by the positive and negative measure rows.
pub fn replay_triplet_rows(train: &FeatureSet, n: usize, k: usize, seed: u64) -> Vec<(f64, f64, u8, i8)> {
    use std::collections::BTreeMap;
    let mut rng = seeded_rng(seed);
    let mut by_id: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut labeled = Vec::new();
    for (i, r) in train.iter().enumerate() {
        if r.person_id >= 0 {
            labeled.push(i);
            by_id.entry(r.person_id).or_default().push(i);
        }
    }
    let anchors: Vec<usize> = labeled
        .iter()
        .copied()
        .filter(|&i| by_id[&train.record(i).person_id].len() > 1)
        .collect();
    let mut rows = Vec::new();
    for _ in 0..n {
        let a = anchors[rng.random_range(0..anchors.len())];
        let pid = train.record(a).person_id;
        let others_same: Vec<usize> = by_id[&pid].iter().copied().filter(|&i| i != a).collect();
        let p = others_same[rng.random_range(0..others_same.len())];
        let diff: Vec<usize> = labeled.iter().copied().filter(|&i| train.record(i).person_id != pid).collect();
        let ng = diff[rng.random_range(0..diff.len())];
        for (other, label) in [(p, 1i8), (ng, -1i8)] {
            let rf: Vec<f32> = naive_cffm(train, other, k).iter().map(|&x| x as f32).collect();
            let fa = &train.record(a).feature;
            rows.push((
                naive_cos(fa, train.feature(other)),
                naive_cos(fa, &rf),
                u8::from(train.record(a).camera_id == train.record(other).camera_id),
                label,
            ));
        }
    }
    rows
}

pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the built binary in `dir`.
pub fn run_cli(dir: &std::path::Path, args: &[&str]) -> CliOutput {
    run_cli_env(dir, args, &[])
}

pub fn run_cli_env(dir: &std::path::Path, args: &[&str], env: &[(&str, &str)]) -> CliOutput {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_reid-rerank"));
    cmd.current_dir(dir).args(args).env_remove("REID_RERANK_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn reid-rerank");
    CliOutput {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// synth -> fuse -> fit -> eval with relative paths inside `dir`.
pub fn full_chain(dir: &std::path::Path, seed: u64, threads: Option<usize>) {
    let seed = seed.to_string();
    let t = threads.map(|n| n.to_string());
    let with_threads = |args: &[&str]| -> Vec<String> {
        let mut v: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        if let Some(t) = &t {
            v.push("--threads".into());
            v.push(t.clone());
        }
        v
    };
    let steps: Vec<Vec<String>> = vec![
        with_threads(&["synth", "--out", "data", "--seed", &seed]),
        with_threads(&["fuse", "--gallery", "data/gallery.urfb", "--k", "4", "--out", "urf.urfb"]),
        with_threads(&["fit", "--train", "data/train.urfb", "--seed", &seed, "--out", "weights.json", "--dump-triplets", "triplets.csv"]),
        with_threads(&[
            "eval", "--query", "data/query.urfb", "--gallery", "data/gallery.urfb", "--urf", "urf.urfb",
            "--weights", "weights.json", "--out", "report.txt", "--rank-list", "rank_list.csv",
        ]),
    ];
    for s in steps {
        let args: Vec<&str> = s.iter().map(String::as_str).collect();
        let out = run_cli(dir, &args);
        assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    }
}

pub const CHAIN_ARTIFACTS: &[&str] = &[
    "data/train.urfb", "data/train.csv", "data/query.urfb", "data/query.csv", "data/gallery.urfb",
    "data/gallery.csv", "data/synth.run", "urf.urfb", "urf.contributors.csv", "urf.urfb.run",
    "weights.json", "triplets.csv", "report.txt", "rank_list.csv", "rank_list.csv.run",
];

/// Reads the `key=value` report into a map.
pub fn parse_report(text: &str) -> std::collections::BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
