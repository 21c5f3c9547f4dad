use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WEIGHTS_FORMAT_VERSION: u32 = 1;

/// Learned weights for the combined similarity, with provenance.
///
/// `intercept` is kept for audit only; scoring never adds it.
/// `run_index` is the zero-based repeat that produced the weights, or `-1`
/// for a mean taken over several repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinationWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub intercept: f64,
    pub k_used: usize,
    pub n_used: usize,
    pub seed: u64,
    pub run_index: i64,
    /// Set when the least-squares system was singular and the ridge path ran.
    #[serde(default)]
    pub rank_deficient: bool,
}

impl CombinationWeights {
    /// Bare weights with empty provenance.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            intercept: 0.0,
            k_used: 0,
            n_used: 0,
            seed: 0,
            run_index: -1,
            rank_deficient: false,
        }
    }

    /// (1, 0, 0): plain single-view cosine.
    pub fn baseline() -> Self {
        Self::new(1.0, 0.0, 0.0)
    }

    /// (0, 1, 0): similarity to the fused gallery feature only.
    pub fn refined_only() -> Self {
        Self::new(0.0, 1.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        [self.alpha, self.beta, self.gamma, self.intercept]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// On-disk weights document: the weights plus an optional echo of the run
/// configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub weights: CombinationWeights,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub run_config: BTreeMap<String, String>,
}

pub fn save_weights(w: &CombinationWeights, path: impl AsRef<Path>) -> Result<()> {
    save_weights_with_config(w, &BTreeMap::new(), path)
}

pub fn save_weights_with_config(
    w: &CombinationWeights,
    run_config: &BTreeMap<String, String>,
    path: impl AsRef<Path>,
) -> Result<()> {
    if !w.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "refusing to save non-finite weights {w:?}"
        )));
    }
    let doc = WeightsFile {
        format_version: WEIGHTS_FORMAT_VERSION,
        weights: *w,
        run_config: run_config.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Schema(e.to_string()))?;
    text.push('\n');
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<CombinationWeights> {
    load_weights_file(path).map(|f| f.weights)
}

pub fn load_weights_file(path: impl AsRef<Path>) -> Result<WeightsFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(WEIGHTS_FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::Schema(format!(
                "format_version {v} is not supported (expected {WEIGHTS_FORMAT_VERSION})"
            )))
        }
        None => return Err(Error::Schema("missing format_version".into())),
    }
    let doc: WeightsFile =
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    if !doc.weights.is_finite() {
        return Err(Error::Schema("non-finite weight value".into()));
    }
    Ok(doc)
}
