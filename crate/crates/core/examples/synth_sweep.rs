//! Mean mAP of baseline, fused-only, and learned-combination scoring on
//! synthetic data across seeds.
//!
//! Run: `cargo run --release --example synth_sweep -- [spread] [bias]`

use reid_rerank::amc::fit_weights_repeated;
use reid_rerank::fusion::uffm_fuse_all;
use reid_rerank::pipeline::{evaluate, rank_all, DEFAULT_MAX_RANK};
use reid_rerank::store::CombinationWeights;
use reid_rerank::synth::{generate, SynthConfig};

fn main() -> reid_rerank::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let base = SynthConfig::default();
    let spread = args.first().copied().unwrap_or(base.identity_spread);
    let bias = args.get(1).copied().unwrap_or(base.camera_bias_scale);

    let (mut sum_base, mut sum_uffm, mut sum_amc) = (0.0, 0.0, 0.0);
    let seeds = 10;
    for seed in 0..seeds {
        let cfg = SynthConfig {
            identity_spread: spread,
            camera_bias_scale: bias,
            seed,
            ..base
        };
        let d = generate(&cfg)?;
        let urfs = uffm_fuse_all(&d.gallery, 4)?;
        let fit = fit_weights_repeated(&d.train, 400, 4, seed, 5)?;
        let mut row = Vec::new();
        for w in [CombinationWeights::baseline(), CombinationWeights::refined_only(), fit.mean] {
            let r = rank_all(&d.queries, &d.gallery, &urfs, &w)?;
            row.push(evaluate(&r, &d.queries, &d.gallery, DEFAULT_MAX_RANK).map);
        }
        println!(
            "seed={seed} baseline={:.4} uffm={:.4} amc={:.4} weights=({:.3}, {:.3}, {:.3})",
            row[0], row[1], row[2], fit.mean.alpha, fit.mean.beta, fit.mean.gamma
        );
        sum_base += row[0];
        sum_uffm += row[1];
        sum_amc += row[2];
    }
    let n = seeds as f64;
    println!(
        "mean baseline={} uffm={} amc={}",
        sum_base / n,
        sum_uffm / n,
        sum_amc / n
    );
    Ok(())
}
