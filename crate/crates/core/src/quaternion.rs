//! Unit quaternions as orientation representatives of diffusion tensors.
//!
//! A tensor orientation (an unordered frame of undirected axes) is covered
//! eight times by the unit quaternions: the two signs of the double cover
//! times the four rotations that only flip eigenvector directions
//! (identity and the three π-rotations about the frame axes).

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TensorError};

/// `|sin θ|` below which the axis/angle extraction switches to the
/// largest-diagonal branch.
const SMALL_SIN: f64 = 1e-6;
const ROTATION_TOL: f64 = 1e-9;

/// Unit quaternion `(a, v1, v2, v3)` with `a = cos(θ/2)` and
/// `v = sin(θ/2)·w` for rotation angle θ about unit axis w.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    c: [f64; 4],
}

impl UnitQuaternion {
    pub const IDENTITY: Self = Self {
        c: [1.0, 0.0, 0.0, 0.0],
    };

    /// Normalizes the given components.
    pub fn new(a: f64, v1: f64, v2: f64, v3: f64) -> Result<Self> {
        let c = [a, v1, v2, v3];
        if c.iter().any(|x| !x.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        let n = norm4(&c);
        if n < 1e-300 {
            return Err(TensorError::InvalidParameter("zero quaternion".into()));
        }
        Ok(Self {
            c: c.map(|x| x / n),
        })
    }

    /// Caller guarantees unit norm.
    pub(crate) const fn from_unit(c: [f64; 4]) -> Self {
        Self { c }
    }

    /// Rotation by `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(n > 0.0) || !angle.is_finite() {
            return Err(TensorError::InvalidParameter("degenerate rotation axis".into()));
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Self::new(c, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    pub fn a(&self) -> f64 {
        self.c[0]
    }

    pub fn vector(&self) -> [f64; 3] {
        [self.c[1], self.c[2], self.c[3]]
    }

    pub fn components(&self) -> [f64; 4] {
        self.c
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.c[0] * other.c[0] + self.c[1] * other.c[1] + self.c[2] * other.c[2] + self.c[3] * other.c[3]
    }

    /// Euclidean (chordal) distance in R⁴.
    pub fn chordal_distance(&self, other: &Self) -> f64 {
        self.c
            .iter()
            .zip(other.c.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Hamilton product `self ⊗ rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        let [a1, b1, c1, d1] = self.c;
        let [a2, b2, c2, d2] = rhs.c;
        Self {
            c: [
                a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
                a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
                a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
                a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
            ],
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            c: self.c.map(|x| -x),
        }
    }

    /// Rotation angle in `[0, π]`, identical for `q` and `-q`.
    pub fn angle(&self) -> f64 {
        2.0 * self.c[0].abs().min(1.0).acos()
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        for (x, y) in self.c.iter().zip(other.c.iter()) {
            match x.partial_cmp(y) {
                Some(Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        Ordering::Equal
    }
}

impl Default for UnitQuaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

fn norm4(c: &[f64; 4]) -> f64 {
    (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt()
}

/// The eight quaternions encoding one tensor orientation, ordered
/// `[q, q⊗i, q⊗j, q⊗k, -q, -q⊗i, -q⊗j, -q⊗k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuaternionOrbit {
    pub members: [UnitQuaternion; 8],
}

impl QuaternionOrbit {
    pub fn iter(&self) -> impl Iterator<Item = &UnitQuaternion> {
        self.members.iter()
    }

    pub fn contains(&self, q: &UnitQuaternion) -> bool {
        self.members.iter().any(|m| m == q)
    }
}

/// Right cosets `q·G` for `G = {1, i, j, k}` are pure sign permutations of
/// the components, so every member is exact.
fn right_flips(q: &UnitQuaternion) -> [UnitQuaternion; 4] {
    let [a, b, c, d] = q.c;
    [
        UnitQuaternion { c: [a, b, c, d] },
        UnitQuaternion { c: [-b, a, d, -c] },
        UnitQuaternion { c: [-c, -d, a, b] },
        UnitQuaternion { c: [-d, c, -b, a] },
    ]
}

pub fn orbit(q: &UnitQuaternion) -> QuaternionOrbit {
    let f = right_flips(q);
    QuaternionOrbit {
        members: [f[0], f[1], f[2], f[3], f[0].neg(), f[1].neg(), f[2].neg(), f[3].neg()],
    }
}

/// Lexicographically greatest orbit member under `(a, v1, v2, v3)`.
pub fn canonical_representative(q: &UnitQuaternion) -> UnitQuaternion {
    let o = orbit(q);
    let mut best = o.members[0];
    for m in &o.members[1..] {
        if m.lex_cmp(&best) == Ordering::Greater {
            best = *m;
        }
    }
    // Collapse signed zeros so equal orbits give equal bits.
    UnitQuaternion {
        c: best.c.map(|x| x + 0.0),
    }
}

/// Orbit member of `orbit2` closest (chordally) to `q_ref`, and that distance.
pub fn realign(q_ref: &UnitQuaternion, orbit2: &QuaternionOrbit) -> (UnitQuaternion, f64) {
    let mut best = orbit2.members[0];
    let mut best_dot = q_ref.dot(&best);
    for m in &orbit2.members[1..] {
        let d = q_ref.dot(m);
        if d > best_dot {
            best_dot = d;
            best = *m;
        }
    }
    (best, q_ref.chordal_distance(&best))
}

pub fn quat_to_rotation(q: &UnitQuaternion) -> Matrix3<f64> {
    let [a, x, y, z] = q.c;
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - a * z),
        2.0 * (x * z + a * y),
        2.0 * (x * y + a * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - a * x),
        2.0 * (x * z - a * y),
        2.0 * (y * z + a * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

/// Quaternion of a rotation matrix. Fails with `NotARotation` unless
/// `RᵀR = I` and `det R = 1` within 1e-9.
pub fn rotation_to_quat(r: &Matrix3<f64>) -> Result<UnitQuaternion> {
    let orthogonality_error = (r.transpose() * r - Matrix3::identity()).amax();
    let det = r.determinant();
    if !(orthogonality_error <= ROTATION_TOL) || !((det - 1.0).abs() <= ROTATION_TOL) {
        return Err(TensorError::NotARotation {
            orthogonality_error,
            det,
        });
    }
    Ok(rotation_to_quat_unchecked(r))
}

pub(crate) fn rotation_to_quat_unchecked(r: &Matrix3<f64>) -> UnitQuaternion {
    let trace = r[(0, 0)] + r[(1, 1)] + r[(2, 2)];
    let cos_theta = ((trace - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    let sin_theta = theta.sin();
    if sin_theta.abs() < SMALL_SIN {
        return largest_diagonal_branch(r, trace);
    }
    let w = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    ) / (2.0 * sin_theta);
    let (s, c) = (0.5 * theta).sin_cos();
    let q = [c, s * w[0], s * w[1], s * w[2]];
    let n = norm4(&q);
    UnitQuaternion { c: q.map(|x| x / n) }
}

fn largest_diagonal_branch(r: &Matrix3<f64>, trace: f64) -> UnitQuaternion {
    let (r00, r11, r22) = (r[(0, 0)], r[(1, 1)], r[(2, 2)]);
    let q = if trace >= r00 && trace >= r11 && trace >= r22 {
        let s = 2.0 * (1.0 + trace).sqrt();
        [
            0.25 * s,
            (r[(2, 1)] - r[(1, 2)]) / s,
            (r[(0, 2)] - r[(2, 0)]) / s,
            (r[(1, 0)] - r[(0, 1)]) / s,
        ]
    } else if r00 >= r11 && r00 >= r22 {
        let s = 2.0 * (1.0 + r00 - r11 - r22).sqrt();
        [
            (r[(2, 1)] - r[(1, 2)]) / s,
            0.25 * s,
            (r[(0, 1)] + r[(1, 0)]) / s,
            (r[(0, 2)] + r[(2, 0)]) / s,
        ]
    } else if r11 >= r22 {
        let s = 2.0 * (1.0 + r11 - r00 - r22).sqrt();
        [
            (r[(0, 2)] - r[(2, 0)]) / s,
            (r[(0, 1)] + r[(1, 0)]) / s,
            0.25 * s,
            (r[(1, 2)] + r[(2, 1)]) / s,
        ]
    } else {
        let s = 2.0 * (1.0 + r22 - r00 - r11).sqrt();
        [
            (r[(1, 0)] - r[(0, 1)]) / s,
            (r[(0, 2)] + r[(2, 0)]) / s,
            (r[(1, 2)] + r[(2, 1)]) / s,
            0.25 * s,
        ]
    };
    let n = norm4(&q);
    UnitQuaternion { c: q.map(|x| x / n) }
}
