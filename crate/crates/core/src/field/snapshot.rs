//! Binary field snapshots: "EULR", version u32, n u32, component count u32,
//! then each component x₁-fastest as little-endian f64.

use std::io::{Read, Write};
use std::path::Path;

use super::{Field, GridSpec};
use crate::error::{Error, Result};
use crate::real::Real;

pub const MAGIC: &[u8; 4] = b"EULR";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode<T: Real, F: Field<T>>(f: &F) -> Vec<u8> {
    let comps = f.components();
    let mut out = Vec::with_capacity(16 + 8 * comps.len() * f.grid().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(f.grid().n as u32).to_le_bytes());
    out.extend_from_slice(&(comps.len() as u32).to_le_bytes());
    for c in comps {
        for &x in c {
            out.extend_from_slice(&x.to_le_bytes_f64());
        }
    }
    out
}

pub fn decode<T: Real, F: Field<T>>(bytes: &[u8]) -> Result<F> {
    if bytes.len() < 16 || &bytes[0..4] != MAGIC {
        return Err(Error::Snapshot("missing EULR magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != FORMAT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let grid = GridSpec::new(word(8) as usize)?;
    let count = word(12) as usize;
    if count != F::COMPONENTS {
        return Err(Error::Snapshot(format!(
            "{count} components, expected {}",
            F::COMPONENTS
        )));
    }
    let len = grid.len();
    if bytes.len() != 16 + 8 * count * len {
        return Err(Error::Snapshot(format!("payload length {} is wrong", bytes.len())));
    }
    let comps = (0..count)
        .map(|c| {
            (0..len)
                .map(|i| {
                    let at = 16 + 8 * (c * len + i);
                    T::lit(f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()))
                })
                .collect()
        })
        .collect();
    F::from_components(grid, comps)
}

pub fn write<T: Real, F: Field<T>>(path: &Path, f: &F) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode(f)).map_err(|e| Error::io(path, e))
}

pub fn read<T: Real, F: Field<T>>(path: &Path) -> Result<F> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
