//! `SAEB` binary pool files and the `id,v0,v1,...` CSV alternative.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{EmbeddingPool, PoolEntry, SpeakerEmbedding};
use crate::error::{Error, Result};

pub const SAEB_MAGIC: &[u8; 4] = b"SAEB";
pub const SAEB_VERSION: u16 = 1;

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads a pool from a `SAEB` file. All integers are little-endian.
pub fn load_pool(path: impl AsRef<Path>) -> Result<EmbeddingPool> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let trunc = |e: std::io::Error| format_err(path, format!("truncated file: {e}"));

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(trunc)?;
    if &magic != SAEB_MAGIC {
        return Err(format_err(path, "bad magic, expected SAEB"));
    }
    let version = r.read_u16::<LittleEndian>().map_err(trunc)?;
    if version != SAEB_VERSION {
        return Err(Error::Unsupported(format!("SAEB version {version}")));
    }
    let dim = r.read_u32::<LittleEndian>().map_err(trunc)? as usize;
    let count = r.read_u32::<LittleEndian>().map_err(trunc)? as usize;
    if count > 0 && dim == 0 {
        return Err(Error::Validation(format!("{}: zero dimension with {count} entries", path.display())));
    }

    let mut entries = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let id_len = r.read_u16::<LittleEndian>().map_err(trunc)? as usize;
        let mut id = vec![0u8; id_len];
        r.read_exact(&mut id).map_err(trunc)?;
        let id = String::from_utf8(id).map_err(|_| format_err(path, format!("entry {i}: id is not UTF-8")))?;
        let mut vector = vec![0f32; dim];
        r.read_f32_into::<LittleEndian>(&mut vector).map_err(trunc)?;
        let embedding = SpeakerEmbedding::new(vector)
            .map_err(|e| Error::Validation(format!("{}: entry {i} ('{id}'): {e}", path.display())))?;
        entries.push(PoolEntry { id, embedding });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io(path, e))? != 0 {
        return Err(format_err(path, "trailing bytes after last entry"));
    }
    if count == 0 {
        log::warn!("{}: empty embedding pool", path.display());
    }
    EmbeddingPool::new(dim, entries)
}

pub fn save_pool(pool: &EmbeddingPool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(SAEB_MAGIC).map_err(io)?;
    w.write_u16::<LittleEndian>(SAEB_VERSION).map_err(io)?;
    w.write_u32::<LittleEndian>(pool.dim() as u32).map_err(io)?;
    w.write_u32::<LittleEndian>(pool.len() as u32).map_err(io)?;
    for e in pool.entries() {
        let id = e.id.as_bytes();
        let len = u16::try_from(id.len())
            .map_err(|_| Error::Validation(format!("pool id longer than 65535 bytes: '{}'", e.id)))?;
        w.write_u16::<LittleEndian>(len).map_err(io)?;
        w.write_all(id).map_err(io)?;
        for &v in e.embedding.as_slice() {
            w.write_f32::<LittleEndian>(v).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads `id,v0,v1,...` rows. A header row is optional; it is recognised by a
/// non-numeric second cell.
pub fn load_pool_csv(path: impl AsRef<Path>) -> Result<EmbeddingPool> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut entries = Vec::new();
    let mut dim = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = i + 1;
        if i == 0 && rec.get(1).is_some_and(|c| c.trim().parse::<f32>().is_err()) {
            continue;
        }
        let id = rec.get(0).unwrap_or_default().trim().to_string();
        let vector = rec
            .iter()
            .skip(1)
            .map(|c| {
                c.trim()
                    .parse::<f32>()
                    .map_err(|_| Error::Validation(format!("{}: row {row}: non-numeric value '{c}'", path.display())))
            })
            .collect::<Result<Vec<f32>>>()?;
        match dim {
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(Error::Validation(format!(
                    "{}: row {row} has {} values, expected {d}",
                    path.display(),
                    vector.len()
                )))
            }
            _ => {}
        }
        let embedding = SpeakerEmbedding::new(vector)
            .map_err(|e| Error::Validation(format!("{}: row {row}: {e}", path.display())))?;
        entries.push(PoolEntry { id, embedding });
    }
    if entries.is_empty() {
        log::warn!("{}: empty embedding pool", path.display());
    }
    EmbeddingPool::new(dim.unwrap_or(0), entries)
}

pub fn save_pool_csv(pool: &EmbeddingPool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for e in pool.entries() {
        let mut row = vec![e.id.clone()];
        row.extend(e.embedding.as_slice().iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Validation(format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool3() -> EmbeddingPool {
        EmbeddingPool::from_pairs(
            3,
            [
                ("a", [1.0f32, 2.0, 3.0]),
                ("bé", [-0.1, f32::MIN_POSITIVE, 1e30]),
                ("c", [0.3, 0.0, -7.5]),
            ]
            .into_iter()
            .map(|(id, v)| (id.to_string(), SpeakerEmbedding::new(v.to_vec()).unwrap())),
        )
        .unwrap()
    }

    #[test]
    fn saeb_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pool.saeb");
        let pool = pool3();
        save_pool(&pool, &p).unwrap();
        assert_eq!(load_pool(&p).unwrap(), pool);
    }

    #[test]
    fn saeb_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pool.saeb");
        let pool = EmbeddingPool::from_pairs(1, [("x".to_string(), SpeakerEmbedding::new(vec![1.0]).unwrap())]).unwrap();
        save_pool(&pool, &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let mut expect = b"SAEB".to_vec();
        expect.extend([1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, b'x']);
        expect.extend(1.0f32.to_le_bytes());
        assert_eq!(bytes, expect);
    }

    #[test]
    fn saeb_truncated_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pool.saeb");
        save_pool(&pool3(), &p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(load_pool(&p), Err(Error::Format { .. })));

        let empty = EmbeddingPool::new(8, vec![]).unwrap();
        save_pool(&empty, &p).unwrap();
        let loaded = load_pool(&p).unwrap();
        assert!(loaded.is_empty());
        assert_eq!(loaded.dim(), 8);
    }

    #[test]
    fn csv_round_trip_and_mixed_dims() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pool.csv");
        let pool = pool3();
        save_pool_csv(&pool, &p).unwrap();
        assert_eq!(load_pool_csv(&p).unwrap(), pool);

        std::fs::write(&p, "id,v0,v1\na,1,2\nb,1\n").unwrap();
        assert!(matches!(load_pool_csv(&p), Err(Error::Validation(_))));
        std::fs::write(&p, "a,1,x\n").unwrap();
        assert!(matches!(load_pool_csv(&p), Err(Error::Validation(_))));
    }
}
