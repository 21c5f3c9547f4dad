//! Auto-weighted measure combination.
//!
//! Training data is a list of labeled measure triples: for a sampled
//! (anchor, positive, negative), the anchor is compared with the positive and
//! the negative through single-view cosine, cosine to the label-refined
//! (CFFM) feature, and the camera-equality indicator. Each step appends one
//! `+1` row and one `-1` row. A linear least-squares fit over those rows
//! gives α, β, γ and an intercept that is recorded but never used.

mod ols;
mod sampling;

use std::io::Write;
use std::path::Path;

pub use ols::{solve_least_squares, LeastSquares, RIDGE_LAMBDA};
pub use sampling::{sample_triplet, Triplet, TripletSampler};

use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::fusion::cffm_fuse;
use crate::rng::seeded_rng;
use crate::simkit::cosine;
use crate::store::{CombinationWeights, FeatureRecord, FeatureSet};

pub const DEFAULT_N: usize = 400;
pub const DEFAULT_REPEATS: usize = 5;

/// Camera-equality indicator: 1 when both images come from the same camera.
pub fn cce(a: &FeatureRecord, b: &FeatureRecord) -> u8 {
    u8::from(a.camera_id == b.camera_id)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureVector {
    pub s_single: f64,
    pub s_refined: f64,
    pub cce: u8,
    pub label: i8,
}

impl MeasureVector {
    pub fn design_row(&self) -> [f64; 4] {
        [self.s_single, self.s_refined, f64::from(self.cce), 1.0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripletDataset {
    pub rows: Vec<MeasureVector>,
    pub triplets: Vec<Triplet>,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
}

impl TripletDataset {
    pub fn count_label(&self, label: i8) -> usize {
        self.rows.iter().filter(|r| r.label == label).count()
    }

    /// Writes `s_single,s_refined,cce,label` rows.
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(w, "s_single,s_refined,cce,label")?;
        }
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.s_single, r.s_refined, r.cce, r.label)?;
        }
        Ok(())
    }
}

fn measure(train: &FeatureSet, anchor: usize, other: usize, k: usize, label: i8) -> Result<MeasureVector> {
    let a = train.record(anchor);
    let o = train.record(other);
    let refined = cffm_fuse(train, other, k)?;
    Ok(MeasureVector {
        s_single: cosine(&a.feature, &o.feature)?,
        s_refined: cosine(&a.feature, &refined.vector)?,
        cce: cce(a, o),
        label,
    })
}

/// Runs `n` sampling steps seeded with `seed`, two rows per step.
pub fn build_triplet_dataset(train: &FeatureSet, n: usize, k: usize, seed: u64) -> Result<TripletDataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let sampler = TripletSampler::new(train)?;
    let mut rng = seeded_rng(seed);
    let mut rows = Vec::with_capacity(2 * n);
    let mut triplets = Vec::with_capacity(n);
    for _ in 0..n {
        let t = sampler.sample(train, &mut rng);
        rows.push(measure(train, t.anchor, t.positive, k, 1)?);
        rows.push(measure(train, t.anchor, t.negative, k, -1)?);
        triplets.push(t);
    }
    Ok(TripletDataset {
        rows,
        triplets,
        seed,
        n,
        k,
    })
}

/// Least-squares fit of `label ≈ α·s_single + β·s_refined + γ·cce + w₀`.
pub fn fit_weights(data: &TripletDataset) -> Result<CombinationWeights> {
    if data.rows.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 rows to fit 4 coefficients, found {}",
            data.rows.len()
        )));
    }
    let design: Vec<[f64; 4]> = data.rows.iter().map(MeasureVector::design_row).collect();
    let target: Vec<f64> = data.rows.iter().map(|r| f64::from(r.label)).collect();
    let fit = solve_least_squares(&design, &target);
    if fit.rank_deficient {
        log::warn!("rank-deficient measure data (seed {}); ridge fallback used", data.seed);
    }
    let [alpha, beta, gamma, intercept] = fit.coefficients;
    Ok(CombinationWeights {
        alpha,
        beta,
        gamma,
        intercept,
        k_used: data.k,
        n_used: data.n,
        seed: data.seed,
        run_index: 0,
        rank_deficient: fit.rank_deficient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpread {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedFit {
    /// Coordinate-wise mean of `runs`, tagged `run_index = -1`.
    pub mean: CombinationWeights,
    pub runs: Vec<CombinationWeights>,
    /// Population standard deviation across runs.
    pub stddev: WeightSpread,
    pub datasets: Vec<TripletDataset>,
}

pub fn fit_weights_repeated(
    train: &FeatureSet,
    n: usize,
    k: usize,
    base_seed: u64,
    repeats: usize,
) -> Result<RepeatedFit> {
    fit_weights_repeated_with(Parallelism::default(), train, n, k, base_seed, repeats)
}

/// Repeat `r` uses seed `base_seed + r` (wrapping).
pub fn fit_weights_repeated_with(
    par: Parallelism,
    train: &FeatureSet,
    n: usize,
    k: usize,
    base_seed: u64,
    repeats: usize,
) -> Result<RepeatedFit> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let results = exec::try_map_indices(par, repeats, |r| {
        let data = build_triplet_dataset(train, n, k, base_seed.wrapping_add(r as u64))?;
        let mut w = fit_weights(&data)?;
        w.run_index = r as i64;
        Ok::<_, Error>((w, data))
    })?;
    let (runs, datasets): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let count = runs.len() as f64;
    let mean_of = |f: fn(&CombinationWeights) -> f64| runs.iter().map(f).sum::<f64>() / count;
    let std_of = |f: fn(&CombinationWeights) -> f64, m: f64| {
        (runs.iter().map(|w| (f(w) - m).powi(2)).sum::<f64>() / count).sqrt()
    };
    let mean = CombinationWeights {
        alpha: mean_of(|w| w.alpha),
        beta: mean_of(|w| w.beta),
        gamma: mean_of(|w| w.gamma),
        intercept: mean_of(|w| w.intercept),
        k_used: k,
        n_used: n,
        seed: base_seed,
        run_index: -1,
        rank_deficient: runs.iter().any(|w| w.rank_deficient),
    };
    let stddev = WeightSpread {
        alpha: std_of(|w| w.alpha, mean.alpha),
        beta: std_of(|w| w.beta, mean.beta),
        gamma: std_of(|w| w.gamma, mean.gamma),
        intercept: std_of(|w| w.intercept, mean.intercept),
    };
    Ok(RepeatedFit {
        mean,
        runs,
        stddev,
        datasets,
    })
}

/// Writes every dataset's rows back to back, in run order, under one header.
pub fn write_triplet_csv(datasets: &[TripletDataset], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for (i, d) in datasets.iter().enumerate() {
        d.write_csv(&mut w, i == 0).map_err(io)?;
    }
    w.flush().map_err(io)
}
