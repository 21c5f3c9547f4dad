use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HEADER: [&str; 3] = ["item_id", "person_id", "camera_id"];

/// One line of the metadata CSV (`item_id,person_id,camera_id`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataRow {
    pub item_id: String,
    pub person_id: i64,
    pub camera_id: u32,
}

#[derive(Deserialize)]
struct RawRow {
    item_id: String,
    person_id: i64,
    camera_id: i64,
}

pub fn read_metadata(path: impl AsRef<Path>) -> Result<Vec<MetadataRow>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: format!("expected header {:?}, found {:?}", HEADER.join(","), headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for (row, result) in rdr.deserialize::<RawRow>().enumerate() {
        let raw = result.map_err(|e| Error::Metadata {
            row,
            reason: e.to_string(),
        })?;
        let camera_id = u32::try_from(raw.camera_id).map_err(|_| Error::Metadata {
            row,
            reason: format!("camera_id must be non-negative, found {}", raw.camera_id),
        })?;
        rows.push(MetadataRow {
            item_id: raw.item_id,
            person_id: raw.person_id,
            camera_id,
        });
    }
    Ok(rows)
}

pub fn write_metadata(path: impl AsRef<Path>, rows: &[MetadataRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(HEADER).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    }
}
