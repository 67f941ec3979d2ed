//! P3DF descriptor container: magic "P3DF", u32 LE descriptor count,
//! u32 LE dimension, then count x dimension little-endian f32 values,
//! row-major.

use super::IoError;
use crate::matrix::FeatureMatrix;
use std::path::Path;

const MAGIC: &[u8; 4] = b"P3DF";

pub fn write_descriptors(matrix: &FeatureMatrix, path: &Path) -> Result<(), IoError> {
    let mut bytes = Vec::with_capacity(12 + matrix.rows() * matrix.dim() * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(matrix.rows() as u32).to_le_bytes());
    bytes.extend_from_slice(&(matrix.dim() as u32).to_le_bytes());
    for v in matrix.as_slice() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| IoError::io(path, e))
}

pub fn read_descriptors(path: &Path) -> Result<FeatureMatrix, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(IoError::parse(path, 0, "not a P3DF file"));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().expect("sized")) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().expect("sized")) as usize;
    if dim == 0 {
        return Err(IoError::parse(path, 0, "descriptor dimension is zero"));
    }
    let expected = 12 + count * dim * 4;
    if bytes.len() != expected {
        return Err(IoError::parse(
            path,
            0,
            format!("expected {expected} bytes for {count} x {dim}, found {}", bytes.len()),
        ));
    }
    let mut matrix = FeatureMatrix::with_capacity(dim, count);
    let mut row = vec![0.0f64; dim];
    for r in 0..count {
        for (c, slot) in row.iter_mut().enumerate() {
            let at = 12 + (r * dim + c) * 4;
            *slot = f32::from_le_bytes(bytes[at..at + 4].try_into().expect("sized")) as f64;
        }
        matrix.push_row(&row);
    }
    Ok(matrix)
}

/// Debug CSV export: one descriptor per row.
pub fn descriptors_to_csv(matrix: &FeatureMatrix) -> String {
    let mut out = String::new();
    for row in matrix.iter_rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.p3df");
        let mut m = FeatureMatrix::new(4);
        m.push_row(&[0.25, -1.5, 3.0, 0.0]);
        m.push_row(&[1.0, 2.0, -4.25, 8.5]);
        write_descriptors(&m, &path).unwrap();
        let back = read_descriptors(&path).unwrap();
        assert_eq!(back.rows(), 2);
        assert_eq!(back.dim(), 4);
        assert_eq!(back.row(0), m.row(0));
        assert_eq!(back.row(1), m.row(1));
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.p3df");
        std::fs::write(&bad, b"NOPE\x00\x00\x00\x00\x00\x00\x00\x00").unwrap();
        assert!(read_descriptors(&bad).is_err());

        let truncated = dir.path().join("trunc.p3df");
        let mut bytes = b"P3DF".to_vec();
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        std::fs::write(&truncated, bytes).unwrap();
        assert!(read_descriptors(&truncated).is_err());
    }

    #[test]
    fn csv_export_shape() {
        let mut m = FeatureMatrix::new(2);
        m.push_row(&[1.0, 2.0]);
        m.push_row(&[3.5, -4.0]);
        let csv = descriptors_to_csv(&m);
        assert_eq!(csv, "1,2\n3.5,-4\n");
    }
}
