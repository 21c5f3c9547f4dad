//! Embedding sets, their on-disk formats, and persisted combination weights.

mod container;
mod metadata;
mod weights;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

pub use container::{read_matrix, write_matrix, Matrix, FORMAT_VERSION, MAGIC, SCALAR_F32};
pub use metadata::{read_metadata, write_metadata, MetadataRow};
pub use weights::{load_weights, load_weights_file, save_weights, save_weights_with_config, CombinationWeights, WeightsFile, WEIGHTS_FORMAT_VERSION};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Query,
    Gallery,
    Train,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Query => "query",
            Role::Gallery => "gallery",
            Role::Train => "train",
        })
    }
}

/// One image: its embedding plus identity and camera labels.
///
/// A negative `person_id` marks a distractor or unlabeled image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub item_id: String,
    pub person_id: i64,
    pub camera_id: u32,
    pub feature: Vec<f32>,
}

impl FeatureRecord {
    pub fn new(item_id: impl Into<String>, person_id: i64, camera_id: u32, feature: Vec<f32>) -> Self {
        Self {
            item_id: item_id.into(),
            person_id,
            camera_id,
            feature,
        }
    }

    pub fn is_labeled(&self) -> bool {
        self.person_id >= 0
    }
}

/// Validated, immutable collection of [`FeatureRecord`]s sharing one dimension.
///
/// Squared norms are computed once at construction; every cosine in the
/// crate reads them from here.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    records: Vec<FeatureRecord>,
    sq_norms: Vec<f64>,
    dim: usize,
    role: Role,
}

impl FeatureSet {
    /// Rejects wrong-length, non-finite, or all-zero features and repeated
    /// item ids. Errors name the offending row.
    pub fn new(records: Vec<FeatureRecord>, dim: usize, role: Role) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        let mut sq_norms = Vec::with_capacity(records.len());
        for (row, rec) in records.iter().enumerate() {
            if rec.feature.len() != dim {
                return Err(Error::DimensionMismatch {
                    row,
                    expected: dim,
                    found: rec.feature.len(),
                });
            }
            if let Some(column) = rec.feature.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, column });
            }
            if !seen.insert(rec.item_id.as_str()) {
                return Err(Error::DuplicateItemId {
                    row,
                    item_id: rec.item_id.clone(),
                });
            }
            let sq = crate::simkit::sq_norm(&rec.feature);
            if sq == 0.0 {
                return Err(Error::ZeroNorm { row });
            }
            sq_norms.push(sq);
        }
        Ok(Self {
            records,
            sq_norms,
            dim,
            role,
        })
    }

    /// Pairs a loaded matrix with its metadata rows, row for row.
    pub fn from_matrix(matrix: Matrix, metadata: Vec<MetadataRow>, role: Role) -> Result<Self> {
        if matrix.rows != metadata.len() {
            return Err(Error::RowCountMismatch {
                matrix: matrix.rows,
                metadata: metadata.len(),
            });
        }
        let dim = matrix.dim;
        let records = metadata
            .into_iter()
            .zip(matrix.row_iter())
            .map(|(m, row)| FeatureRecord::new(m.item_id, m.person_id, m.camera_id, row.to_vec()))
            .collect();
        Self::new(records, dim, role)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FeatureRecord> {
        self.records.iter()
    }

    /// Panics on an out-of-range index; use [`FeatureSet::get`] for a checked lookup.
    pub fn record(&self, index: usize) -> &FeatureRecord {
        &self.records[index]
    }

    pub fn get(&self, index: usize) -> Result<&FeatureRecord> {
        self.records.get(index).ok_or(Error::InvalidIndex {
            index,
            len: self.records.len(),
        })
    }

    pub fn feature(&self, index: usize) -> &[f32] {
        &self.records[index].feature
    }

    pub(crate) fn sq_norm(&self, index: usize) -> f64 {
        self.sq_norms[index]
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        self.get(index).map(|_| ())
    }

    /// Row-major copy of all features, ready for [`write_matrix`].
    pub fn to_matrix(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.len() * self.dim);
        for rec in &self.records {
            data.extend_from_slice(&rec.feature);
        }
        Matrix {
            rows: self.len(),
            dim: self.dim,
            data,
        }
    }

    pub fn metadata(&self) -> Vec<MetadataRow> {
        self.records
            .iter()
            .map(|r| MetadataRow {
                item_id: r.item_id.clone(),
                person_id: r.person_id,
                camera_id: r.camera_id,
            })
            .collect()
    }
}

/// Loads a binary feature matrix and its metadata CSV into a [`FeatureSet`].
pub fn load_feature_set(
    matrix_path: impl AsRef<Path>,
    metadata_path: impl AsRef<Path>,
    role: Role,
) -> Result<FeatureSet> {
    let matrix = read_matrix(matrix_path)?;
    let metadata = read_metadata(metadata_path)?;
    FeatureSet::from_matrix(matrix, metadata, role)
}

pub fn write_feature_set(
    set: &FeatureSet,
    matrix_path: impl AsRef<Path>,
    metadata_path: impl AsRef<Path>,
) -> Result<()> {
    write_matrix(matrix_path, &set.to_matrix())?;
    write_metadata(metadata_path, &set.metadata())
}

/// Loads features from a headerless CSV of floats (one row per record)
/// plus the usual metadata CSV. Meant for small hand-written fixtures.
pub fn load_feature_set_text(
    features_path: impl AsRef<Path>,
    metadata_path: impl AsRef<Path>,
    role: Role,
) -> Result<FeatureSet> {
    let path = features_path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::new();
    let mut dim = None;
    let mut rows = 0;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let values = line
            .split(',')
            .enumerate()
            .map(|(column, tok)| {
                tok.trim().parse::<f32>().map_err(|_| Error::Metadata {
                    row: rows,
                    reason: format!("column {column}: cannot parse {:?} as a float", tok.trim()),
                })
            })
            .collect::<Result<Vec<f32>>>()?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::DimensionMismatch {
                    row: rows,
                    expected: d,
                    found: values.len(),
                })
            }
            _ => {}
        }
        data.extend(values);
        rows += 1;
    }
    let matrix = Matrix {
        rows,
        dim: dim.unwrap_or(0),
        data,
    };
    FeatureSet::from_matrix(matrix, read_metadata(metadata_path)?, role)
}
