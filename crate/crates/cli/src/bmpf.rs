//! BMPF field files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size     contents
//! 0       4        b"BMPF"
//! 4       4        version (u32), currently 1
//! 8       1        dim (u8)
//! 9       8        n (u64), points per axis
//! 17      8·dim    box length per axis (f64)
//! ...     8·n^dim  values (f64), row-major
//! ```

use std::fs;
use std::path::Path;

use bessel_mp_core::{Field, Grid};

pub const MAGIC: [u8; 4] = *b"BMPF";
pub const VERSION: u32 = 1;

const HEADER_FIXED: usize = 4 + 4 + 1 + 8;

#[derive(Debug, thiserror::Error)]
pub enum BmpfError {
    #[error("bad magic at byte offset {offset}: expected {expected:#04x}, found {found:#04x}")]
    BadMagic { offset: usize, expected: u8, found: u8 },
    #[error("unsupported BMPF version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("truncated file: {what} needs bytes up to offset {needed}, file has {available}")]
    Truncated { what: &'static str, needed: usize, available: usize },
    #[error("invalid header at byte offset {offset}: {reason}")]
    InvalidHeader { offset: usize, reason: String },
    #[error("non-finite value {value} at index {index} (byte offset {offset})")]
    NonFinite { index: usize, offset: usize, value: f64 },
    #[error("{extra} unexpected bytes after the payload")]
    TrailingBytes { extra: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn encode(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_FIXED + 8 * (grid.dim() + grid.len()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(grid.dim() as u8);
    out.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    for len in grid.lengths() {
        out.extend_from_slice(&len.to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<'a>(bytes: &'a [u8], at: usize, len: usize, what: &'static str) -> Result<&'a [u8], BmpfError> {
    bytes.get(at..at + len).ok_or(BmpfError::Truncated {
        what,
        needed: at + len,
        available: bytes.len(),
    })
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<Field, BmpfError> {
    for (offset, &expected) in MAGIC.iter().enumerate() {
        let found = *take(bytes, offset, 1, "magic")?.first().unwrap();
        if found != expected {
            return Err(BmpfError::BadMagic { offset, expected, found });
        }
    }
    let version = u32::from_le_bytes(take(bytes, 4, 4, "version")?.try_into().unwrap());
    if version != VERSION {
        return Err(BmpfError::UnsupportedVersion { found: version, supported: VERSION });
    }
    let dim = take(bytes, 8, 1, "dim")?[0] as usize;
    if !(1..=3).contains(&dim) {
        return Err(BmpfError::InvalidHeader { offset: 8, reason: format!("dim {dim} is not in 1..=3") });
    }
    let n = u64::from_le_bytes(take(bytes, 9, 8, "n")?.try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| BmpfError::InvalidHeader { offset: 9, reason: format!("n = {n} does not fit") })?;
    let lengths_at = HEADER_FIXED;
    take(bytes, lengths_at, 8 * dim, "box lengths")?;
    let lengths: Vec<f64> = (0..dim).map(|a| f64_at(bytes, lengths_at + 8 * a)).collect();
    let grid = Grid::with_lengths(dim, n, &lengths).map_err(|e| BmpfError::InvalidHeader {
        offset: 9,
        reason: e.to_string(),
    })?;

    let payload_at = lengths_at + 8 * dim;
    let count = grid.len();
    take(bytes, payload_at, 8 * count, "values")?;
    let extra = bytes.len() - (payload_at + 8 * count);
    if extra > 0 {
        return Err(BmpfError::TrailingBytes { extra });
    }
    let mut values = Vec::with_capacity(count);
    for index in 0..count {
        let offset = payload_at + 8 * index;
        let value = f64_at(bytes, offset);
        if !value.is_finite() {
            return Err(BmpfError::NonFinite { index, offset, value });
        }
        values.push(value);
    }
    Ok(Field::from_values(grid, values).expect("length and finiteness checked above"))
}

pub fn save_field(path: impl AsRef<Path>, field: &Field) -> Result<(), BmpfError> {
    fs::write(path, encode(field))?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field, BmpfError> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let g = Grid::with_lengths(2, 8, &[40.0, 20.0]).unwrap();
        Field::from_fn(g, |x| (-(x[0] * x[0] + 3.0 * x[1] * x[1]) / 50.0).exp() - 0.25)
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample());
        assert_eq!(&bytes[..4], b"BMPF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(bytes[8], 2);
        assert_eq!(u64::from_le_bytes(bytes[9..17].try_into().unwrap()), 8);
        assert_eq!(f64_at(&bytes, 17), 40.0);
        assert_eq!(f64_at(&bytes, 25), 20.0);
        assert_eq!(bytes.len(), 33 + 8 * 64);
        // Row-major: the second stored value is the neighbour along the last axis.
        let f = sample();
        assert_eq!(f64_at(&bytes, 41), f.values()[1]);
        assert_eq!(f.grid().multi_index(1)[..2], [0, 1]);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let f = sample();
        let g = decode(&encode(&f)).unwrap();
        assert_eq!(g.grid(), f.grid());
        let same = f.values().iter().zip(g.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }

    #[test]
    fn corrupted_magic_reports_offset() {
        let mut bytes = encode(&sample());
        bytes[2] = b'X';
        match decode(&bytes) {
            Err(BmpfError::BadMagic { offset: 2, found: b'X', .. }) => {}
            other => panic!("{other:?}"),
        }
        let msg = decode(&bytes).unwrap_err().to_string();
        assert!(msg.contains("offset 2"), "{msg}");
    }

    #[test]
    fn version_bump_is_unsupported() {
        let mut bytes = encode(&sample());
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(decode(&bytes), Err(BmpfError::UnsupportedVersion { found: 2, supported: 1 })));
    }

    #[test]
    fn truncation_anywhere_is_rejected() {
        let bytes = encode(&sample());
        for cut in [0, 3, 7, 8, 16, 24, 33, bytes.len() - 1] {
            assert!(
                matches!(decode(&bytes[..cut]), Err(BmpfError::Truncated { .. })),
                "cut at {cut}"
            );
        }
    }

    #[test]
    fn non_finite_payload_rejected() {
        let mut bytes = encode(&sample());
        let at = 33 + 8 * 5;
        bytes[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        match decode(&bytes) {
            Err(BmpfError::NonFinite { index: 5, offset, .. }) => assert_eq!(offset, at),
            other => panic!("{other:?}"),
        }
        bytes[at..at + 8].copy_from_slice(&f64::NEG_INFINITY.to_le_bytes());
        assert!(matches!(decode(&bytes), Err(BmpfError::NonFinite { index: 5, .. })));
    }

    #[test]
    fn bad_header_fields() {
        let mut bytes = encode(&sample());
        bytes[8] = 4;
        assert!(matches!(decode(&bytes), Err(BmpfError::InvalidHeader { offset: 8, .. })));
        let mut bytes = encode(&sample());
        bytes[17..25].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert!(matches!(decode(&bytes), Err(BmpfError::InvalidHeader { .. })));
        let mut bytes = encode(&sample());
        bytes.push(0);
        assert!(matches!(decode(&bytes), Err(BmpfError::TrailingBytes { extra: 1 })));
    }
}
