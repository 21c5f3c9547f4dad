//! Multi-view features built from neighboring embeddings.
//!
//! * UFFM (label-free): each gallery feature is replaced by a
//!   similarity-weighted sum of its K nearest cross-camera neighbors,
//!   `w_k = cos(f, n_k) / Σ_i cos(f, n_i)`. Negative cosines give negative
//!   weights; nothing is clipped.
//! * CFFM (label-guided, training only): the plain mean of the K most
//!   similar other images of the same identity.
//!
//! When fusion is impossible or numerically unstable (no neighbor, a weight
//! denominator below [`DENOMINATOR_GUARD`], or a fused vector of zero norm)
//! the source feature is returned unchanged with an empty contributor list.

use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::simkit::{self, cosine_prenormed, knn_cross_camera, Neighbor, NeighborList};
use crate::store::FeatureSet;

pub const DENOMINATOR_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinedKind {
    /// Uncertainty-refined, from unlabeled cross-camera neighbors.
    Urf,
    /// Refined from same-identity neighbors.
    Rf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contributor {
    pub index: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedFeature {
    pub source_index: usize,
    pub vector: Vec<f32>,
    pub kind: RefinedKind,
    pub contributors: Vec<Contributor>,
}

impl RefinedFeature {
    /// The source feature passed through unchanged.
    pub fn identity(set: &FeatureSet, index: usize, kind: RefinedKind) -> Self {
        Self {
            source_index: index,
            vector: set.feature(index).to_vec(),
            kind,
            contributors: Vec::new(),
        }
    }

    pub fn is_fallback(&self) -> bool {
        self.contributors.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.contributors.iter().map(|c| c.weight).sum()
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    Ok(())
}

/// Weighted sum of `set` rows; `None` if the result is unusable.
fn combine(set: &FeatureSet, contributors: &[Contributor]) -> Option<Vec<f32>> {
    let mut acc = vec![0f64; set.dim()];
    for c in contributors {
        for (a, &x) in acc.iter_mut().zip(set.feature(c.index)) {
            *a += c.weight * f64::from(x);
        }
    }
    let out: Vec<f32> = acc.into_iter().map(|v| v as f32).collect();
    let usable = out.iter().all(|v| v.is_finite()) && simkit::sq_norm(&out) > 0.0;
    usable.then_some(out)
}

fn fuse_neighbors(gallery: &FeatureSet, nl: &NeighborList) -> RefinedFeature {
    let denom: f64 = nl.neighbors.iter().map(|n| n.similarity).sum();
    if nl.neighbors.is_empty() || denom.abs() < DENOMINATOR_GUARD {
        return RefinedFeature::identity(gallery, nl.target_index, RefinedKind::Urf);
    }
    let contributors: Vec<Contributor> = nl
        .neighbors
        .iter()
        .map(|n| Contributor {
            index: n.index,
            weight: n.similarity / denom,
        })
        .collect();
    match combine(gallery, &contributors) {
        Some(vector) => RefinedFeature {
            source_index: nl.target_index,
            vector,
            kind: RefinedKind::Urf,
            contributors,
        },
        None => RefinedFeature::identity(gallery, nl.target_index, RefinedKind::Urf),
    }
}

/// UFFM for one gallery item.
pub fn uffm_fuse(gallery: &FeatureSet, target_index: usize, k: usize) -> Result<RefinedFeature> {
    let nl = knn_cross_camera(gallery, target_index, k)?;
    Ok(fuse_neighbors(gallery, &nl))
}

/// UFFM for every gallery item, in gallery order.
pub fn uffm_fuse_all(gallery: &FeatureSet, k: usize) -> Result<Vec<RefinedFeature>> {
    uffm_fuse_all_with(Parallelism::default(), gallery, k)
}

pub fn uffm_fuse_all_with(par: Parallelism, gallery: &FeatureSet, k: usize) -> Result<Vec<RefinedFeature>> {
    check_k(k)?;
    let lists = simkit::knn_cross_camera_all_with(par, gallery, k)?;
    Ok(exec::map_indices(par, lists.len(), |j| fuse_neighbors(gallery, &lists[j])))
}

/// CFFM for one labeled training item.
///
/// The candidate pool is every other image with the same `person_id`,
/// narrowed to other cameras when at least one such image exists. The K most
/// similar candidates are averaged with equal weight. An identity with a
/// single image yields the source feature unchanged.
pub fn cffm_fuse(train: &FeatureSet, target_index: usize, k: usize) -> Result<RefinedFeature> {
    check_k(k)?;
    let t = train.get(target_index)?;
    if t.person_id < 0 {
        return Err(Error::InvalidArgument(format!(
            "cannot refine distractor {:?} (person_id {})",
            t.item_id, t.person_id
        )));
    }
    let same_id = || {
        train
            .iter()
            .enumerate()
            .filter(move |(j, r)| *j != target_index && r.person_id == t.person_id)
    };
    let has_cross = same_id().any(|(_, r)| r.camera_id != t.camera_id);
    let t_sq = train.sq_norm(target_index);
    let mut pool: Vec<Neighbor> = same_id()
        .filter(|(_, r)| !has_cross || r.camera_id != t.camera_id)
        .map(|(j, r)| Neighbor {
            index: j,
            similarity: cosine_prenormed(&t.feature, t_sq, &r.feature, train.sq_norm(j)),
        })
        .collect();
    if pool.is_empty() {
        return Ok(RefinedFeature::identity(train, target_index, RefinedKind::Rf));
    }
    simkit::top_k_sorted(&mut pool, k);

    let count = pool.len() as f64;
    let mut acc = vec![0f64; train.dim()];
    for n in &pool {
        for (a, &x) in acc.iter_mut().zip(train.feature(n.index)) {
            *a += f64::from(x);
        }
    }
    let vector: Vec<f32> = acc.into_iter().map(|v| (v / count) as f32).collect();
    if simkit::sq_norm(&vector) == 0.0 {
        return Ok(RefinedFeature::identity(train, target_index, RefinedKind::Rf));
    }
    Ok(RefinedFeature {
        source_index: target_index,
        vector,
        kind: RefinedKind::Rf,
        contributors: pool
            .iter()
            .map(|n| Contributor {
                index: n.index,
                weight: 1.0 / count,
            })
            .collect(),
    })
}
