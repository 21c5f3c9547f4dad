//! Gallery ranking with the combined similarity and cross-view evaluation.
//!
//! For a query `q` and gallery item `g_j` with fused feature `URF_j`:
//!
//! ```text
//! S* = α·cos(q, g_j) + β·cos(q, URF_j) + γ·CCE(q, g_j)
//! ```
//!
//! The learned intercept is never added.

mod metrics;
mod report;

use crate::amc::cce;
use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::fusion::RefinedFeature;
use crate::simkit::{self, cosine_prenormed, rank_order};
use crate::store::{CombinationWeights, FeatureSet};

pub use metrics::{evaluate, evaluate_with, EvalReport, DEFAULT_MAX_RANK};
pub use report::{write_rank_list, RANK_LIST_HEADER};

pub fn combined_score(s_single: f64, s_refined: f64, cce_value: f64, w: &CombinationWeights) -> f64 {
    w.alpha * s_single + w.beta * s_refined + w.gamma * cce_value
}

/// One query's full gallery ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub query_index: usize,
    /// Every gallery index exactly once, by descending score, ties by index.
    pub ordered_gallery: Vec<(usize, f64)>,
    /// Indexed by gallery index; `false` for items sharing both identity
    /// and camera with the query. Masked items stay in `ordered_gallery`.
    pub valid_mask: Vec<bool>,
}

/// Cross-view rule: a gallery item is hidden from a query when it shows the
/// same (labeled) identity from the same camera.
pub fn cross_view_valid(queries: &FeatureSet, q: usize, gallery: &FeatureSet, g: usize) -> bool {
    let (qr, gr) = (queries.record(q), gallery.record(g));
    !(qr.person_id >= 0 && qr.person_id == gr.person_id && qr.camera_id == gr.camera_id)
}

pub fn rank_all(
    queries: &FeatureSet,
    gallery: &FeatureSet,
    urfs: &[RefinedFeature],
    w: &CombinationWeights,
) -> Result<Vec<RankingResult>> {
    rank_all_with(Parallelism::default(), queries, gallery, urfs, w)
}

pub fn rank_all_with(
    par: Parallelism,
    queries: &FeatureSet,
    gallery: &FeatureSet,
    urfs: &[RefinedFeature],
    w: &CombinationWeights,
) -> Result<Vec<RankingResult>> {
    if urfs.len() != gallery.len() {
        return Err(Error::Misaligned {
            expected: gallery.len(),
            found: urfs.len(),
        });
    }
    if queries.dim() != gallery.dim() {
        return Err(Error::IncompatibleDims {
            left: queries.dim(),
            right: gallery.dim(),
        });
    }
    let mut urf_sq = Vec::with_capacity(urfs.len());
    for (j, u) in urfs.iter().enumerate() {
        if u.source_index != j || u.vector.len() != gallery.dim() {
            return Err(Error::InvalidArgument(format!(
                "refined feature {j} is not aligned with gallery item {j}"
            )));
        }
        let sq = simkit::sq_norm(&u.vector);
        if sq == 0.0 || !sq.is_finite() {
            return Err(Error::Invariant(format!("refined feature {j} has zero or non-finite norm")));
        }
        urf_sq.push(sq);
    }

    Ok(exec::map_indices(par, queries.len(), |i| {
        let q = queries.record(i);
        let q_sq = queries.sq_norm(i);
        let mut ordered: Vec<(usize, f64)> = (0..gallery.len())
            .map(|j| {
                let g = gallery.record(j);
                let s_single = cosine_prenormed(&q.feature, q_sq, &g.feature, gallery.sq_norm(j));
                let s_refined = cosine_prenormed(&q.feature, q_sq, &urfs[j].vector, urf_sq[j]);
                let score = combined_score(s_single, s_refined, f64::from(cce(q, g)), w);
                (j, score)
            })
            .collect();
        ordered.sort_unstable_by(|a, b| rank_order(*a, *b));
        RankingResult {
            query_index: i,
            ordered_gallery: ordered,
            valid_mask: (0..gallery.len()).map(|j| cross_view_valid(queries, i, gallery, j)).collect(),
        }
    }))
}
