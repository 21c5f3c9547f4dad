//! Little-endian binary feature matrix.
//!
//! Layout (24-byte header, then the body):
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `URFB`                   |
//! | 4      | 4    | format version (u32) = 1       |
//! | 8      | 8    | row count (u64)                |
//! | 16     | 4    | dim (u32)                      |
//! | 20     | 4    | scalar code (u32), 1 = f32     |
//! | 24     | ...  | `rows * dim` f32, row-major    |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"URFB";
pub const FORMAT_VERSION: u32 = 1;
pub const SCALAR_F32: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub dim: usize,
    pub data: Vec<f32>,
}

impl Matrix {
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f32]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }
}

pub fn write_matrix(path: impl AsRef<Path>, matrix: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode(&mut w, matrix)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode(&mut BufReader::new(file), path)
}

fn encode<W: Write>(w: &mut W, m: &Matrix) -> std::io::Result<()> {
    debug_assert_eq!(m.data.len(), m.rows * m.dim);
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u64::<LittleEndian>(m.rows as u64)?;
    w.write_u32::<LittleEndian>(m.dim as u32)?;
    w.write_u32::<LittleEndian>(SCALAR_F32)?;
    for v in &m.data {
        w.write_f32::<LittleEndian>(*v)?;
    }
    Ok(())
}

fn decode<R: Read>(r: &mut R, path: &Path) -> Result<Matrix> {
    let bad = |reason: String| Error::MalformedHeader {
        path: path.to_path_buf(),
        reason,
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| bad("file shorter than magic bytes".into()))?;
    if &magic != MAGIC {
        return Err(bad(format!("bad magic {magic:?}")));
    }
    let short = |_| bad("truncated header".into());
    let version = r.read_u32::<LittleEndian>().map_err(short)?;
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let rows = r.read_u64::<LittleEndian>().map_err(short)?;
    let dim = r.read_u32::<LittleEndian>().map_err(short)? as usize;
    let scalar = r.read_u32::<LittleEndian>().map_err(short)?;
    if scalar != SCALAR_F32 {
        return Err(bad(format!("unsupported scalar code {scalar}")));
    }
    let rows = usize::try_from(rows).map_err(|_| bad(format!("row count {rows} too large")))?;
    let total = rows
        .checked_mul(dim)
        .ok_or_else(|| bad(format!("{rows} x {dim} overflows")))?;

    let mut data = Vec::with_capacity(total.min(1 << 28));
    let mut buf = [0u8; 4];
    for i in 0..total {
        r.read_exact(&mut buf)
            .map_err(|_| bad(format!("truncated body at row {}", i / dim.max(1))))?;
        data.push(f32::from_le_bytes(buf));
    }
    if r.read(&mut buf).map_err(|e| Error::io(path, e))? != 0 {
        return Err(bad("trailing bytes after body".into()));
    }
    Ok(Matrix { rows, dim, data })
}
