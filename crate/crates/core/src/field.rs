//! Tensor fields on regular grids and their on-disk formats.
//!
//! Binary `DTF1` layout (all little-endian):
//!
//! ```text
//! b"DTF1" | nx ny nz : u32 | sx sy sz : f64 | voxels : [f64; 6] * nx*ny*nz
//! ```
//!
//! Voxels are `(dxx, dxy, dxz, dyy, dyz, dzz)`, x fastest. The text variant
//! starts with `# dtf-text nx ny nz` followed by one voxel per line (six
//! space-separated decimals); it carries no spacing and reads back with unit
//! spacing.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, TensorError};
use crate::format::fmt_f64;
use crate::tensor::{validate_spd, DiffusionTensor};

pub const MAGIC: &[u8; 4] = b"DTF1";
pub const TEXT_HEADER: &str = "# dtf-text";
const HEADER_LEN: usize = 4 + 3 * 4 + 3 * 8;
const VOXEL_LEN: usize = 6 * 8;

#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    dims: [usize; 3],
    spacing: [f64; 3],
    voxels: Vec<DiffusionTensor>,
}

impl TensorField {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], voxels: Vec<DiffusionTensor>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(TensorError::DimensionMismatch(format!("dimensions must be positive, got {dims:?}")));
        }
        if spacing.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(TensorError::InvalidParameter(format!("spacing must be positive, got {spacing:?}")));
        }
        let expected = voxel_count(dims)?;
        if voxels.len() != expected {
            return Err(TensorError::DimensionMismatch(format!(
                "{} voxels for dimensions {dims:?} (expected {expected})",
                voxels.len()
            )));
        }
        Ok(Self { dims, spacing, voxels })
    }

    /// Field with every voxel equal to `value`.
    pub fn constant(dims: [usize; 3], spacing: [f64; 3], value: DiffusionTensor) -> Result<Self> {
        let n = voxel_count(dims)?;
        Self::new(dims, spacing, vec![value; n])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn voxels(&self) -> &[DiffusionTensor] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> &DiffusionTensor {
        &self.voxels[self.index(x, y, z)]
    }

    /// Voxels of the z-slice `z`, row-major in (y, x).
    pub fn slice_z(&self, z: usize) -> &[DiffusionTensor] {
        let n = self.dims[0] * self.dims[1];
        &self.voxels[z * n..(z + 1) * n]
    }
}

fn voxel_count(dims: [usize; 3]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| TensorError::DimensionMismatch(format!("dimensions {dims:?} overflow")))
}

pub fn encode_binary(f: &TensorField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + f.len() * VOXEL_LEN);
    out.extend_from_slice(MAGIC);
    for d in f.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for s in f.spacing {
        out.extend_from_slice(&s.to_le_bytes());
    }
    for v in &f.voxels {
        for c in v.components() {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<TensorField> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(TensorError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(TensorError::TruncatedFile {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let dims = [u32_at(4), u32_at(8), u32_at(12)];
    let spacing = [f64_at(16), f64_at(24), f64_at(32)];
    let n = voxel_count(dims)?;
    let expected = n
        .checked_mul(VOXEL_LEN)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| TensorError::DimensionMismatch(format!("dimensions {dims:?} overflow")))?;
    if bytes.len() < expected {
        return Err(TensorError::TruncatedFile {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(TensorError::DimensionMismatch(format!(
            "{} trailing bytes after {n} voxels",
            bytes.len() - expected
        )));
    }
    let voxels = (0..n)
        .map(|i| {
            let base = HEADER_LEN + i * VOXEL_LEN;
            let c = [0, 1, 2, 3, 4, 5].map(|k| f64_at(base + 8 * k));
            validate_spd(c).map_err(|e| e.at_voxel(i))
        })
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(dims, spacing, voxels)
}

pub fn encode_text(f: &TensorField) -> String {
    let mut out = format!("{TEXT_HEADER} {} {} {}\n", f.dims[0], f.dims[1], f.dims[2]);
    for v in &f.voxels {
        let line: Vec<String> = v.components().iter().map(|x| fmt_f64(*x)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn decode_text(text: &str) -> Result<TensorField> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(TensorError::BadMagic)?;
    let rest = header.strip_prefix(TEXT_HEADER).ok_or(TensorError::BadMagic)?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| TensorError::Parse(format!("header `{t}`: {e}"))))
        .collect::<Result<_>>()?;
    let dims: [usize; 3] = dims
        .try_into()
        .map_err(|_| TensorError::Parse(format!("header needs three dimensions: `{header}`")))?;
    let voxels = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| parse_voxel(l).and_then(|c| validate_spd(c).map_err(|e| e.at_voxel(i))))
        .collect::<Result<Vec<_>>>()?;
    TensorField::new(dims, [1.0; 3], voxels)
}

/// Six whitespace-separated numbers.
pub fn parse_voxel(line: &str) -> Result<[f64; 6]> {
    let values: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| TensorError::Parse(format!("`{t}`: {e}"))))
        .collect::<Result<_>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| TensorError::Parse(format!("expected 6 components, found {}", v.len())))
}

/// Reads either format, detected from the first bytes.
pub fn read_field(path: impl AsRef<Path>) -> Result<TensorField> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        decode_binary(&bytes)
    } else if bytes.starts_with(TEXT_HEADER.as_bytes()) {
        let text = std::str::from_utf8(&bytes).map_err(|e| TensorError::Parse(e.to_string()))?;
        decode_text(text)
    } else {
        Err(TensorError::BadMagic)
    }
}

/// Plain tensor list: six numbers per line; blank lines and text after `#`
/// are ignored.
pub fn parse_tensor_list(text: &str) -> Result<Vec<DiffusionTensor>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| parse_voxel(l).and_then(|c| validate_spd(c).map_err(|e| e.at_voxel(i))))
        .collect()
}

/// Tensors from a field file (either format, in voxel order) or a plain list.
pub fn read_tensors(path: impl AsRef<Path>) -> Result<Vec<DiffusionTensor>> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        return Ok(decode_binary(&bytes)?.voxels);
    }
    let text = std::str::from_utf8(&bytes).map_err(|e| TensorError::Parse(e.to_string()))?;
    if text.starts_with(TEXT_HEADER) {
        return Ok(decode_text(text)?.voxels);
    }
    parse_tensor_list(text)
}

pub fn write_field(f: &TensorField, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode_binary(f))?;
    Ok(())
}

pub fn write_field_text(f: &TensorField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_text(f))?;
    Ok(())
}
