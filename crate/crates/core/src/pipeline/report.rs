//! Text and CSV renderings of evaluation output.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::store::FeatureSet;

use super::{EvalReport, RankingResult};

pub const RANK_LIST_HEADER: &str = "query_item_id,rank,gallery_item_id,score,is_match,is_excluded";
const REPORT_FORMAT_VERSION: u32 = 1;

impl EvalReport {
    /// `key=value` lines: configuration echo, counts, headline metrics, the
    /// CMC curve (`cmc.<k>`), and per-query AP (`ap.<query_item_id>`).
    pub fn to_text(&self, queries: &FeatureSet) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format_version={REPORT_FORMAT_VERSION}");
        for (k, v) in &self.config_echo {
            let _ = writeln!(s, "config.{k}={v}");
        }
        let _ = writeln!(s, "num_queries={}", self.per_query_ap.len());
        let _ = writeln!(s, "num_valid_queries={}", self.num_valid_queries);
        let _ = writeln!(s, "num_excluded_queries={}", self.num_excluded_queries);
        for k in [1, 5, 10] {
            if k <= self.cmc.len() {
                let _ = writeln!(s, "rank{k}={}", self.rank(k));
            }
        }
        let _ = writeln!(s, "map={}", self.map);
        for (i, v) in self.cmc.iter().enumerate() {
            let _ = writeln!(s, "cmc.{}={v}", i + 1);
        }
        for (rec, ap) in queries.iter().zip(&self.per_query_ap) {
            match ap {
                Some(ap) => {
                    let _ = writeln!(s, "ap.{}={ap}", rec.item_id);
                }
                None => {
                    let _ = writeln!(s, "ap.{}=excluded", rec.item_id);
                }
            }
        }
        s
    }
}

/// Writes the ranked lists as CSV, keeping masked rows (flagged
/// `is_excluded`). `top` limits rows per query.
pub fn write_rank_list(
    rankings: &[RankingResult],
    queries: &FeatureSet,
    gallery: &FeatureSet,
    top: Option<usize>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(w, "{RANK_LIST_HEADER}").map_err(io)?;
    for r in rankings {
        let q = queries.record(r.query_index);
        let limit = top.unwrap_or(usize::MAX);
        for (rank, &(j, score)) in r.ordered_gallery.iter().take(limit).enumerate() {
            let g = gallery.record(j);
            let excluded = !r.valid_mask[j];
            let is_match = !excluded && q.person_id >= 0 && g.person_id == q.person_id;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                q.item_id,
                rank + 1,
                g.item_id,
                score,
                u8::from(is_match),
                u8::from(excluded)
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
