use std::collections::BTreeMap;

use crate::exec::{self, Parallelism};
use crate::store::FeatureSet;

use super::RankingResult;

pub const DEFAULT_MAX_RANK: usize = 50;

/// CMC curve and mAP under cross-view matching.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// `cmc[k - 1]` is the fraction of valid queries whose first correct
    /// match sits at rank k or better.
    pub cmc: Vec<f64>,
    pub map: f64,
    /// Aligned with the query set; `None` for queries with no relevant item.
    pub per_query_ap: Vec<Option<f64>>,
    pub num_valid_queries: usize,
    pub num_excluded_queries: usize,
    pub config_echo: BTreeMap<String, String>,
}

impl EvalReport {
    /// CMC at 1-based rank `k`; 0 when `k` is out of range.
    pub fn rank(&self, k: usize) -> f64 {
        k.checked_sub(1).and_then(|i| self.cmc.get(i)).copied().unwrap_or(0.0)
    }
}

struct QueryOutcome {
    first_hit: Option<usize>,
    ap: Option<f64>,
}

fn score_query(r: &RankingResult, queries: &FeatureSet, gallery: &FeatureSet) -> QueryOutcome {
    let q = queries.record(r.query_index);
    let mut position = 0usize;
    let mut hits = 0usize;
    let mut precision_sum = 0.0;
    let mut first_hit = None;
    for &(j, _) in &r.ordered_gallery {
        if !r.valid_mask[j] {
            continue;
        }
        position += 1;
        let g = gallery.record(j);
        if q.person_id >= 0 && g.person_id == q.person_id {
            hits += 1;
            precision_sum += hits as f64 / position as f64;
            first_hit.get_or_insert(position);
        }
    }
    QueryOutcome {
        first_hit,
        ap: (hits > 0).then(|| precision_sum / hits as f64),
    }
}

/// Scores rankings against identity labels. Masked gallery items are skipped
/// before positions are counted; distractors stay in the list but never
/// count as matches. Queries without any relevant item are left out of both
/// CMC and mAP and counted in `num_excluded_queries`.
pub fn evaluate(
    rankings: &[RankingResult],
    queries: &FeatureSet,
    gallery: &FeatureSet,
    max_rank: usize,
) -> EvalReport {
    evaluate_with(Parallelism::default(), rankings, queries, gallery, max_rank)
}

pub fn evaluate_with(
    par: Parallelism,
    rankings: &[RankingResult],
    queries: &FeatureSet,
    gallery: &FeatureSet,
    max_rank: usize,
) -> EvalReport {
    let outcomes = exec::map_indices(par, rankings.len(), |i| score_query(&rankings[i], queries, gallery));

    let mut per_query_ap = vec![None; queries.len()];
    let mut cmc_counts = vec![0usize; max_rank];
    let mut ap_sum = 0.0;
    let mut valid = 0usize;
    for (r, o) in rankings.iter().zip(&outcomes) {
        per_query_ap[r.query_index] = o.ap;
        if let (Some(first), Some(ap)) = (o.first_hit, o.ap) {
            valid += 1;
            ap_sum += ap;
            for c in cmc_counts.iter_mut().skip(first - 1) {
                *c += 1;
            }
        }
    }
    let denom = valid.max(1) as f64;
    EvalReport {
        cmc: cmc_counts.iter().map(|&c| c as f64 / denom).collect(),
        map: ap_sum / denom,
        per_query_ap,
        num_valid_queries: valid,
        num_excluded_queries: rankings.len() - valid,
        config_echo: BTreeMap::new(),
    }
}
