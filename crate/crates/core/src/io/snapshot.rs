//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | offset | size      | content                          |
//! |--------|-----------|----------------------------------|
//! | 0      | 4         | magic `GPMX`                     |
//! | 4      | 4         | `u32` version (1)                |
//! | 8      | 4         | `u32` n                          |
//! | 12     | 8         | `f64` box length L               |
//! | 20     | 8         | `f64` time t                     |
//! | 28     | 16 n³     | `φ₁` as `(re, im)` `f64` pairs   |
//! | 28+16n³| 16 n³     | `φ₂`                             |

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field2C;
use crate::grid::{is_supported_size, Grid3};

pub const MAGIC: &[u8; 4] = b"GPMX";
pub const VERSION: u32 = 1;
const HEADER: usize = 28;

pub fn encode(f: &Field2C) -> Vec<u8> {
    let len = f.grid.len();
    let mut out = Vec::with_capacity(HEADER + 32 * len);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(f.grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&f.grid.box_length().to_le_bytes());
    out.extend_from_slice(&f.t.to_le_bytes());
    for phi in &f.phi {
        for v in phi {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode(bytes: &[u8]) -> Result<Field2C> {
    if bytes.len() < HEADER {
        return Err(Error::Snapshot(format!("truncated header: {} bytes", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = u32_at(bytes, 8) as usize;
    if !is_supported_size(n) {
        return Err(Error::Snapshot(format!("unsupported grid size {n}")));
    }
    let l = f64_at(bytes, 12);
    let t = f64_at(bytes, 20);
    let len = n * n * n;
    let expect = HEADER + 32 * len;
    if bytes.len() != expect {
        return Err(Error::Snapshot(format!(
            "expected {expect} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let grid = Grid3::new(n, l).map_err(|e| Error::Snapshot(e.to_string()))?;
    let read = |base: usize| -> Vec<Complex64> {
        (0..len)
            .map(|i| {
                let at = base + 16 * i;
                Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8))
            })
            .collect()
    };
    let phi1 = read(HEADER);
    let phi2 = read(HEADER + 16 * len);
    Field2C::from_arrays(grid, phi1, phi2, t).map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn write_snapshot(f: &Field2C, path: &Path) -> Result<()> {
    super::write_atomic(path, &encode(f))
}

pub fn read_snapshot(path: &Path) -> Result<Field2C> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_layout_of_constant_field() {
        let g = Grid3::new(8, 2.0).unwrap();
        let mut f = Field2C::from_fn(g, |_| Complex64::new(0.5, -0.25), |_| Complex64::new(1.0, 0.0));
        f.t = 0.125;
        let bytes = encode(&f);
        let mut head = vec![0x47, 0x50, 0x4d, 0x58, 1, 0, 0, 0, 8, 0, 0, 0];
        head.extend_from_slice(&[0, 0, 0, 0, 0, 0, 0, 0x40]); // 2.0
        head.extend_from_slice(&[0, 0, 0, 0, 0, 0, 0xc0, 0x3f]); // 0.125
        assert_eq!(&bytes[..28], &head[..]);
        let a = [0, 0, 0, 0, 0, 0, 0xe0, 0x3f, 0, 0, 0, 0, 0, 0, 0xd0, 0xbf]; // 0.5, -0.25
        let b = [0, 0, 0, 0, 0, 0, 0xf0, 0x3f, 0, 0, 0, 0, 0, 0, 0, 0]; // 1.0, 0.0
        assert_eq!(bytes.len(), 28 + 2 * 512 * 16);
        for i in 0..512 {
            assert_eq!(&bytes[28 + 16 * i..28 + 16 * (i + 1)], &a);
            assert_eq!(&bytes[28 + 8192 + 16 * i..28 + 8192 + 16 * (i + 1)], &b);
        }
    }

    #[test]
    fn rejects_damaged_files() {
        let g = Grid3::new(8, 2.0).unwrap();
        let bytes = encode(&Field2C::zeros(g));
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(&bytes[..10]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(decode(&bad).is_err());
        let mut bad = bytes;
        bad[8] = 7;
        assert!(decode(&bad).is_err());
    }
}
