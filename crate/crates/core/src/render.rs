//! SVG ellipse glyphs and the fixed tensor configurations used in figures.
//!
//! Each tensor is drawn as the shadow of its ellipsoid (semi-axes along the
//! eigenvectors, proportional to the eigenvalues) on the xy plane, filled
//! with a yellow-to-red ramp of HA or FA.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Matrix3;

use crate::anisotropy::{classical_index, hilbert_anisotropy, AnisoIndexKind};
use crate::error::{Result, TensorError};
use crate::field::TensorField;
use crate::quaternion::{quat_to_rotation, UnitQuaternion};
use crate::tensor::DiffusionTensor;

const CELL: f64 = 40.0;
const FILL: f64 = 0.45;
const LOW_COLOR: [u8; 3] = [255, 255, 0];
const HIGH_COLOR: [u8; 3] = [255, 0, 0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Glyph {
    /// Column and row of the glyph cell.
    pub x: f64,
    pub y: f64,
    pub tensor: DiffusionTensor,
}

/// Glyphs in a single row.
pub fn row_glyphs(tensors: &[DiffusionTensor]) -> Vec<Glyph> {
    tensors
        .iter()
        .enumerate()
        .map(|(i, t)| Glyph {
            x: i as f64,
            y: 0.0,
            tensor: *t,
        })
        .collect()
}

/// Glyphs of the z-slice `z`, row `y` drawn at the top for `y = ny - 1`.
pub fn slice_glyphs(f: &TensorField, z: usize) -> Result<Vec<Glyph>> {
    let [nx, ny, nz] = f.dims();
    if z >= nz {
        return Err(TensorError::DimensionMismatch(format!("slice {z} outside {nz} slices")));
    }
    let mut out = Vec::with_capacity(nx * ny);
    for y in 0..ny {
        for x in 0..nx {
            out.push(Glyph {
                x: x as f64,
                y: (ny - 1 - y) as f64,
                tensor: *f.get(x, y, z),
            });
        }
    }
    Ok(out)
}

pub fn glyph_index(t: &DiffusionTensor, coloring: AnisoIndexKind) -> Result<f64> {
    let l = t.eigenvalues();
    match coloring {
        AnisoIndexKind::HA => Ok(hilbert_anisotropy(l)),
        AnisoIndexKind::FA => Ok(classical_index(AnisoIndexKind::FA, l)),
        other => Err(TensorError::InvalidParameter(format!("glyphs are colored by HA or FA, not {other}"))),
    }
}

/// Semi-axes and orientation (radians, counter-clockwise from x) of the
/// projected ellipse, before scaling.
pub fn projected_ellipse(t: &DiffusionTensor) -> (f64, f64, f64) {
    let m = t.to_matrix();
    let sq = m * m;
    let (a, b, c) = (sq[(0, 0)], sq[(0, 1)], sq[(1, 1)]);
    let half_diff = 0.5 * (a - c);
    let r = half_diff.hypot(b);
    let mid = 0.5 * (a + c);
    let major = (mid + r).max(0.0).sqrt();
    let minor = (mid - r).max(0.0).sqrt();
    let theta = if r == 0.0 { 0.0 } else { 0.5 * b.atan2(half_diff) };
    (major, minor, theta)
}

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 1.0 };
    let ch = |i: usize| (LOW_COLOR[i] as f64 + t * (HIGH_COLOR[i] as f64 - LOW_COLOR[i] as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" { "0.000000".into() } else { s }
}

/// SVG 1.1 document with one `<ellipse>` per glyph. The color ramp runs from
/// index 0 to the largest finite index among the glyphs and is recorded in
/// the `<metadata>` element.
pub fn render_svg(glyphs: &[Glyph], coloring: AnisoIndexKind) -> Result<String> {
    if glyphs.is_empty() {
        return Err(TensorError::InvalidParameter("nothing to render".into()));
    }
    let values = glyphs
        .iter()
        .map(|g| glyph_index(&g.tensor, coloring))
        .collect::<Result<Vec<_>>>()?;
    let vmax = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let lmax = glyphs.iter().map(|g| g.tensor.eigenvalues()[0]).fold(0.0, f64::max);
    let cols = glyphs.iter().map(|g| g.x).fold(0.0, f64::max) + 1.0;
    let rows = glyphs.iter().map(|g| g.y).fold(0.0, f64::max) + 1.0;
    let (w, h) = (cols * CELL, rows * CELL);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(w),
        num(h),
        num(w),
        num(h)
    );
    let _ = writeln!(
        s,
        "<metadata>color-scale index={coloring} min=0 max={} low={} high={} glyphs={}</metadata>",
        crate::format::fmt_f64(vmax),
        color(0.0),
        color(1.0),
        glyphs.len()
    );
    let _ = writeln!(s, "<desc>Tensor glyphs colored by {coloring}, linear from {} to {}</desc>", color(0.0), color(1.0));
    let _ = writeln!(s, "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>", num(w), num(h));
    for (g, v) in glyphs.iter().zip(&values) {
        let (major, minor, theta) = projected_ellipse(&g.tensor);
        let scale = FILL * CELL / lmax;
        let cx = (g.x + 0.5) * CELL;
        let cy = (g.y + 0.5) * CELL;
        let t = if vmax > 0.0 { v / vmax } else { 0.0 };
        // SVG y points down, so the rotation is negated.
        let _ = writeln!(
            s,
            "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" transform=\"rotate({} {} {})\" fill=\"{}\" stroke=\"#000000\" stroke-width=\"0.5\"/>",
            num(cx),
            num(cy),
            num(major * scale),
            num(minor * scale),
            num(-theta.to_degrees()),
            num(cx),
            num(cy),
            color(t)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_svg(glyphs: &[Glyph], coloring: AnisoIndexKind, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_svg(glyphs, coloring)?)?;
    Ok(())
}

/// Fixed tensor configurations.
pub mod scenes {
    use super::*;

    /// Eigenvalues shared by the cigar-shaped scene tensors.
    pub const CIGAR: [f64; 3] = [1.0, 0.3, 0.2];

    fn about_z(lambda: [f64; 3], angle_deg: f64) -> DiffusionTensor {
        let q = UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], angle_deg.to_radians()).expect("fixed axis");
        let r: Matrix3<f64> = quat_to_rotation(&q);
        DiffusionTensor::diagonal(lambda).expect("positive eigenvalues").rotated(&r)
    }

    /// Two cigars in the xy plane whose principal axes cross at `angle_deg`.
    pub fn crossing_cigars(angle_deg: f64) -> [DiffusionTensor; 2] {
        [about_z(CIGAR, -0.5 * angle_deg), about_z(CIGAR, 0.5 * angle_deg)]
    }

    /// Endpoints of the interpolation curve: different shapes, sizes and
    /// orientations.
    pub fn curve_endpoints() -> [DiffusionTensor; 2] {
        [about_z([1.0, 0.3, 0.2], 0.0), about_z([2.0, 1.0, 0.5], 80.0)]
    }

    /// Four equal-HA corners of a square, in grid-corner order
    /// `(0,0), (1,0), (0,1), (1,1)`.
    pub fn equal_ha_corners() -> [DiffusionTensor; 4] {
        [
            about_z(CIGAR, 0.0),
            about_z(CIGAR, 70.0),
            about_z(CIGAR, 130.0),
            about_z(CIGAR, 30.0),
        ]
    }
}
