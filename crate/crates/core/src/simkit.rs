//! Cosine similarity and exact cross-camera nearest-neighbor search.
//!
//! All accumulation is done in f64 over f32 inputs. Cosine is computed as
//! `dot / sqrt(|a|² |b|²)`, which makes `cosine(v, v)` exactly 1.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::exec::{self, Parallelism};
use crate::store::FeatureSet;

pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

pub fn sq_norm(a: &[f32]) -> f64 {
    a.iter().map(|&x| f64::from(x) * f64::from(x)).sum()
}

#[inline]
pub(crate) fn cosine_prenormed(a: &[f32], a_sq: f64, b: &[f32], b_sq: f64) -> f64 {
    (dot(a, b) / (a_sq * b_sq).sqrt()).clamp(-1.0, 1.0)
}

/// Cosine of the angle between `a` and `b`. Zero-norm inputs are an error.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "cosine of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (a_sq, b_sq) = (sq_norm(a), sq_norm(b));
    if a_sq == 0.0 || b_sq == 0.0 {
        return Err(Error::InvalidArgument("cosine of a zero-norm vector".into()));
    }
    Ok(cosine_prenormed(a, a_sq, b, b_sq))
}

/// Ordering used for every ranked list: higher score first, then lower index.
#[inline]
pub fn rank_order(a: (usize, f64), b: (usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub similarity: f64,
}

/// Up to K cross-camera neighbors of one gallery item, most similar first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub target_index: usize,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborList {
    pub fn indices(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.index).collect()
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    Ok(())
}

/// Keeps the `k` best entries of `items` under [`rank_order`], sorted.
pub(crate) fn top_k_sorted(items: &mut Vec<Neighbor>, k: usize) {
    let cmp = |a: &Neighbor, b: &Neighbor| rank_order((a.index, a.similarity), (b.index, b.similarity));
    if items.len() > k {
        items.select_nth_unstable_by(k - 1, cmp);
        items.truncate(k);
    }
    items.sort_unstable_by(cmp);
}

/// The K gallery items most cosine-similar to `target_index` among those
/// captured by a different camera. Returns fewer than K (possibly none) when
/// not enough cross-camera items exist.
pub fn knn_cross_camera(gallery: &FeatureSet, target_index: usize, k: usize) -> Result<NeighborList> {
    check_k(k)?;
    gallery.check_index(target_index)?;
    Ok(knn_unchecked(gallery, target_index, k))
}

fn knn_unchecked(gallery: &FeatureSet, target: usize, k: usize) -> NeighborList {
    let t = gallery.record(target);
    let t_sq = gallery.sq_norm(target);
    let mut cands: Vec<Neighbor> = gallery
        .iter()
        .enumerate()
        .filter(|(j, r)| *j != target && r.camera_id != t.camera_id)
        .map(|(j, r)| Neighbor {
            index: j,
            similarity: cosine_prenormed(&t.feature, t_sq, &r.feature, gallery.sq_norm(j)),
        })
        .collect();
    top_k_sorted(&mut cands, k);
    NeighborList {
        target_index: target,
        neighbors: cands,
    }
}

/// [`knn_cross_camera`] for every gallery item, in gallery order.
pub fn knn_cross_camera_all(gallery: &FeatureSet, k: usize) -> Result<Vec<NeighborList>> {
    knn_cross_camera_all_with(Parallelism::default(), gallery, k)
}

pub fn knn_cross_camera_all_with(par: Parallelism, gallery: &FeatureSet, k: usize) -> Result<Vec<NeighborList>> {
    check_k(k)?;
    Ok(exec::map_indices(par, gallery.len(), |j| knn_unchecked(gallery, j, k)))
}

/// Dense row-major query-by-gallery cosine matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

pub fn similarity_matrix(queries: &FeatureSet, gallery: &FeatureSet) -> Result<SimilarityMatrix> {
    similarity_matrix_with(Parallelism::default(), queries, gallery)
}

pub fn similarity_matrix_with(
    par: Parallelism,
    queries: &FeatureSet,
    gallery: &FeatureSet,
) -> Result<SimilarityMatrix> {
    if queries.dim() != gallery.dim() {
        return Err(Error::IncompatibleDims {
            left: queries.dim(),
            right: gallery.dim(),
        });
    }
    let rows = exec::map_indices(par, queries.len(), |i| {
        let q = queries.feature(i);
        let q_sq = queries.sq_norm(i);
        (0..gallery.len())
            .map(|j| cosine_prenormed(q, q_sq, gallery.feature(j), gallery.sq_norm(j)))
            .collect::<Vec<f64>>()
    });
    Ok(SimilarityMatrix {
        rows: queries.len(),
        cols: gallery.len(),
        data: rows.concat(),
    })
}
