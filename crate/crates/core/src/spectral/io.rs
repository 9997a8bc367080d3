//! Binary grid-field files.
//!
//! Layout (little endian): magic `FOGF`, version `u32`, dimension `u32`,
//! points per axis `u32`, box length `f64`, then the samples as `f64` in
//! row-major order. A vector field stores its `d` components as consecutive
//! scalar blocks.

use std::io::{Read, Write};
use std::path::Path;

use super::{Grid, GridField, VectorGridField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FOGF";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8;

fn write_header(out: &mut impl Write, grid: &Grid) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&grid.length().to_le_bytes())?;
    Ok(())
}

fn write_block(out: &mut impl Write, data: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(data.len() * 8);
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn encode_scalar(field: &GridField) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + field.data().len() * 8);
    write_header(&mut buf, field.grid()).expect("vec write");
    write_block(&mut buf, field.data()).expect("vec write");
    buf
}

pub fn encode_vector(field: &VectorGridField) -> Vec<u8> {
    let mut buf = Vec::new();
    write_header(&mut buf, field.grid()).expect("vec write");
    for c in field.components() {
        write_block(&mut buf, c).expect("vec write");
    }
    buf
}

/// Parses the header and returns the grid plus every sample after it.
fn decode(bytes: &[u8]) -> Result<(Grid, Vec<f64>)> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing FOGF header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let length = f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let grid = Grid::new(dim, n, length).map_err(|e| Error::Format(e.to_string()))?;
    let body = &bytes[HEADER_LEN..];
    if !body.len().is_multiple_of(8) {
        return Err(Error::Format("truncated sample block".into()));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((grid, data))
}

pub fn decode_scalar(bytes: &[u8]) -> Result<GridField> {
    let (grid, data) = decode(bytes)?;
    if data.len() != grid.len() {
        return Err(Error::Format(format!(
            "expected {} samples for a scalar field, found {}",
            grid.len(),
            data.len()
        )));
    }
    GridField::new(grid, data)
}

pub fn decode_vector(bytes: &[u8]) -> Result<VectorGridField> {
    let (grid, data) = decode(bytes)?;
    if data.len() != grid.len() * grid.dim() {
        return Err(Error::Format(format!(
            "expected {} samples for a vector field, found {}",
            grid.len() * grid.dim(),
            data.len()
        )));
    }
    let comps = data.chunks_exact(grid.len()).map(<[f64]>::to_vec).collect();
    VectorGridField::new(grid, comps)
}

pub fn write_scalar(path: impl AsRef<Path>, field: &GridField) -> Result<()> {
    std::fs::write(path, encode_scalar(field))?;
    Ok(())
}

pub fn write_vector(path: impl AsRef<Path>, field: &VectorGridField) -> Result<()> {
    std::fs::write(path, encode_vector(field))?;
    Ok(())
}

fn read_all(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(bytes)
}

pub fn read_scalar(path: impl AsRef<Path>) -> Result<GridField> {
    decode_scalar(&read_all(path)?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<VectorGridField> {
    decode_vector(&read_all(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let g = Grid::new(1, 8, 2.5).unwrap();
        let f = GridField::from_fn(g, |p| p[0]);
        let bytes = encode_scalar(&f);
        assert_eq!(&bytes[..4], b"FOGF");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 2.5);
        assert_eq!(bytes.len(), 24 + 8 * 8);
        assert_eq!(f64::from_le_bytes(bytes[24..32].try_into().unwrap()), -1.25);
    }

    #[test]
    fn vector_blocks_are_consecutive() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let v = VectorGridField::new(g, vec![vec![1.0; 64], vec![2.0; 64]]).unwrap();
        let bytes = encode_vector(&v);
        assert_eq!(bytes.len(), 24 + 2 * 64 * 8);
        assert_eq!(decode_vector(&bytes).unwrap(), v);
        assert!(decode_scalar(&bytes).is_err());
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_scalar(b"NOPE").is_err());
        let g = Grid::new(1, 8, 1.0).unwrap();
        let mut bytes = encode_scalar(&GridField::zeros(g));
        bytes.pop();
        assert!(decode_scalar(&bytes).is_err());
    }
}
