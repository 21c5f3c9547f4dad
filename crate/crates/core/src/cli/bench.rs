use std::time::{Duration, Instant};

use super::{meta_path, BenchArgs, CliError};
use crate::amc::fit_weights_repeated_with;
use crate::exec::Parallelism;
use crate::fusion::uffm_fuse_all_with;
use crate::pipeline::{evaluate_with, rank_all_with, DEFAULT_MAX_RANK};
use crate::simkit::similarity_matrix_with;
use crate::store::{load_feature_set, CombinationWeights, Role};
use crate::synth::{generate, SynthConfig, SynthData};

fn best_of<T>(iters: usize, mut f: impl FnMut() -> T) -> (Duration, T) {
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..iters.max(1) {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed());
        last = Some(v);
    }
    (best, last.expect("at least one iteration"))
}

pub(super) fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let data = match (&a.query, &a.gallery, &a.train) {
        (Some(q), Some(g), Some(t)) => SynthData {
            queries: load_feature_set(q, meta_path(q, None), Role::Query)?,
            gallery: load_feature_set(g, meta_path(g, None), Role::Gallery)?,
            train: load_feature_set(t, meta_path(t, None), Role::Train)?,
        },
        _ => generate(&SynthConfig {
            num_identities: a.ids,
            dim: a.dim,
            seed: a.seed,
            ..SynthConfig::default()
        })?,
    };
    println!(
        "data=queries:{} gallery:{} train:{} dim:{}",
        data.queries.len(),
        data.gallery.len(),
        data.train.len(),
        data.gallery.dim()
    );
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    for par in [Parallelism::Sequential, Parallelism::Parallel] {
        let tag = if par.is_parallel() { "parallel" } else { "sequential" };
        let (t_sim, _) = best_of(a.iters, || similarity_matrix_with(par, &data.queries, &data.gallery));
        let (t_fuse, urfs) = best_of(a.iters, || uffm_fuse_all_with(par, &data.gallery, a.k));
        let urfs = urfs?;
        let (t_fit, fit) = best_of(a.iters, || {
            fit_weights_repeated_with(par, &data.train, a.n, a.k, a.seed, a.repeats)
        });
        let w = fit.map(|f| f.mean).unwrap_or_else(|_| CombinationWeights::refined_only());
        let (t_rank, rankings) = best_of(a.iters, || rank_all_with(par, &data.queries, &data.gallery, &urfs, &w));
        let rankings = rankings?;
        let (t_eval, report) = best_of(a.iters, || {
            evaluate_with(par, &rankings, &data.queries, &data.gallery, DEFAULT_MAX_RANK)
        });
        println!("{tag}.similarity_ms={:.3}", ms(t_sim));
        println!("{tag}.uffm_ms={:.3}", ms(t_fuse));
        println!("{tag}.fit_ms={:.3}", ms(t_fit));
        println!("{tag}.rank_ms={:.3}", ms(t_rank));
        println!("{tag}.eval_ms={:.3}", ms(t_eval));
        println!("{tag}.map={}", report.map);
    }
    Ok(())
}
