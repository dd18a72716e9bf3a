//! Distances and similarity measures between diffusion tensors.
//!
//! Four measures are provided:
//!
//! * affine-invariant: `‖log(S1^{-1/2} S2 S1^{-1/2})‖`,
//! * Log-Euclidean: `‖log S1 − log S2‖_F`,
//! * spectral with rotation matrices: eigenvalue log-ratios plus the SO(3)
//!   geodesic between the closest pair of eigenframes (four candidates),
//! * spectral quaternions: eigenvalue log-ratios plus the chordal distance
//!   between the reference quaternion and the realigned one (eight candidates).
//!
//! Both spectral measures weight the orientation term by [`k_factor`] of the
//! two Hilbert anisotropies, so orientation is ignored for near-isotropic
//! tensors.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::anisotropy::hilbert_anisotropy;
use crate::eigen::{map_spectrum, symmetric_eigen, sym_matrix};
use crate::error::{Result, TensorError};
use crate::quaternion::{orbit, realign};
use crate::tensor::{spectral_decompose, DiffusionTensor, SpectralForm};

/// Condition number above which the affine-invariant distance refuses to
/// whiten by `S1^{-1/2}`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    AffineInvariant,
    LogEuclidean,
    SpectralRotation,
    SpectralQuaternion,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        Self::AffineInvariant,
        Self::LogEuclidean,
        Self::SpectralRotation,
        Self::SpectralQuaternion,
    ];

    /// Short name used on the command line.
    pub fn flag(&self) -> &'static str {
        match self {
            Self::AffineInvariant => "ai",
            Self::LogEuclidean => "le",
            Self::SpectralRotation => "spectral-rot",
            Self::SpectralQuaternion => "sq",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for MetricKind {
    type Err = TensorError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ai" | "affine-invariant" => Ok(Self::AffineInvariant),
            "le" | "log-euclidean" => Ok(Self::LogEuclidean),
            "spectral-rot" | "spectral-rotation" => Ok(Self::SpectralRotation),
            "sq" | "spectral-quaternion" => Ok(Self::SpectralQuaternion),
            _ => Err(TensorError::Parse(format!("unknown metric `{s}`"))),
        }
    }
}

/// Parameters of the orientation weight `k = (1 + tanh(slope·h1·h2 − offset)) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KParams {
    pub slope: f64,
    pub offset: f64,
}

impl KParams {
    pub fn new(slope: f64, offset: f64) -> Result<Self> {
        if !(slope > 0.0) || !slope.is_finite() || !(offset >= 0.0) || !offset.is_finite() {
            return Err(TensorError::InvalidParameter(format!(
                "k parameters need slope > 0 and offset >= 0, got ({slope}, {offset})"
            )));
        }
        Ok(Self { slope, offset })
    }
}

impl Default for KParams {
    fn default() -> Self {
        Self {
            slope: 3.0,
            offset: 7.0,
        }
    }
}

/// `sqrt(Σ log²(λ1,i / λ2,i))` over eigenvalues paired by rank.
pub fn dist_eigenvalues(l1: [f64; 3], l2: [f64; 3]) -> f64 {
    eigenvalue_term_sq(l1, l2).sqrt()
}

fn eigenvalue_term_sq(l1: [f64; 3], l2: [f64; 3]) -> f64 {
    (0..3).map(|i| (l1[i] / l2[i]).ln().powi(2)).sum()
}

/// `(1 + tanh(slope·ha1·ha2 − offset)) / 2`, evaluated as the equivalent
/// logistic to keep relative precision when the weight is tiny.
pub fn k_factor(ha1: f64, ha2: f64, p: &KParams) -> f64 {
    let x = p.slope * ha1 * ha2 - p.offset;
    1.0 / (1.0 + (-2.0 * x).exp())
}

fn pair_k(s1: &SpectralForm, s2: &SpectralForm, p: &KParams) -> f64 {
    k_factor(
        hilbert_anisotropy(s1.eigenvalues()),
        hilbert_anisotropy(s2.eigenvalues()),
        p,
    )
}

/// `sqrt(k·‖q1 − q2ᵃ‖² + Σ log²(λ1,i/λ2,i))` with the anisotropy weight `k`.
pub fn dist_spectral_quaternion(s1: &SpectralForm, s2: &SpectralForm, p: &KParams) -> f64 {
    dist_spectral_quaternion_with_k(s1, s2, pair_k(s1, s2, p))
}

/// Spectral-quaternion measure with a caller-supplied orientation weight.
pub fn dist_spectral_quaternion_with_k(s1: &SpectralForm, s2: &SpectralForm, k: f64) -> f64 {
    let (_, chord) = realign(&s1.quaternion(), &orbit(&s2.quaternion()));
    (k * chord * chord + eigenvalue_term_sq(s1.eigenvalues(), s2.eigenvalues())).sqrt()
}

fn log_matrix(s: &DiffusionTensor) -> Matrix3<f64> {
    sym_matrix(map_spectrum(s.components(), f64::ln))
}

pub fn dist_log_euclidean(s1: &DiffusionTensor, s2: &DiffusionTensor) -> f64 {
    (log_matrix(s1) - log_matrix(s2)).norm()
}

pub fn dist_affine_invariant(s1: &DiffusionTensor, s2: &DiffusionTensor) -> Result<f64> {
    if s1 == s2 {
        return Ok(0.0);
    }
    let e = symmetric_eigen(s1.components());
    let condition = e.values[0] / e.values[2];
    if !(e.values[2] > 0.0) || !(condition <= MAX_CONDITION) {
        return Err(TensorError::IllConditioned { condition });
    }
    let u = e.vectors;
    let inv_sqrt = Matrix3::from_diagonal(&Vector3::from(e.values.map(|l| 1.0 / l.sqrt())));
    let w = u * inv_sqrt * u.transpose();
    let m = w * s2.to_matrix() * w;
    let c = [
        m[(0, 0)],
        0.5 * (m[(0, 1)] + m[(1, 0)]),
        0.5 * (m[(0, 2)] + m[(2, 0)]),
        m[(1, 1)],
        0.5 * (m[(1, 2)] + m[(2, 1)]),
        m[(2, 2)],
    ];
    let mu = symmetric_eigen(c).values;
    if !(mu[2] > 0.0) {
        return Err(TensorError::IllConditioned { condition });
    }
    Ok(mu.iter().map(|x| x.ln().powi(2)).sum::<f64>().sqrt())
}

/// Right factors turning one eigenframe into the other three frames of the
/// same tensor.
const FRAME_FLIPS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Principal logarithm of a rotation matrix (a skew matrix).
pub fn so3_log(m: &Matrix3<f64>) -> Matrix3<f64> {
    let skew = m - m.transpose();
    let sin_theta = skew.norm() / (2.0 * std::f64::consts::SQRT_2);
    let cos_theta = 0.5 * (m.trace() - 1.0);
    let theta = sin_theta.atan2(cos_theta);
    if sin_theta > 1e-6 {
        return skew * (theta / (2.0 * sin_theta));
    }
    if cos_theta > 0.0 {
        // θ ≈ 0: log M ≈ (M − Mᵀ)/2.
        return skew * 0.5;
    }
    // θ ≈ π: M ≈ 2wwᵀ − I, recover the axis from the symmetric part.
    let b = (m + m.transpose()) * 0.25 + Matrix3::identity() * 0.5;
    let k = (0..3)
        .max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)]))
        .unwrap_or(0);
    let mut w = b.column(k).into_owned() / b[(k, k)].sqrt();
    let sign_ref = Vector3::new(skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
    if w.dot(&sign_ref) < 0.0 {
        w = -w;
    }
    w.normalize().cross_matrix() * theta
}

/// Orientation distance between eigenframes: the smallest SO(3) geodesic
/// over the four frames of `u2`, expressed as half the relative rotation
/// angle (the arc length between the corresponding unit quaternions).
pub fn frame_distance(u1: &Matrix3<f64>, u2: &Matrix3<f64>) -> f64 {
    let u1t = u1.transpose();
    let mut best = f64::INFINITY;
    for flip in FRAME_FLIPS {
        let g = Matrix3::from_diagonal(&Vector3::from(flip));
        let rel = u1t * (u2 * g);
        let d = so3_log(&rel).norm() / (2.0 * std::f64::consts::SQRT_2);
        best = best.min(d);
    }
    best
}

pub fn dist_spectral_rotation(s1: &DiffusionTensor, s2: &DiffusionTensor, p: &KParams) -> f64 {
    let e1 = symmetric_eigen(s1.components());
    let e2 = symmetric_eigen(s2.components());
    let k = k_factor(hilbert_anisotropy(e1.values), hilbert_anisotropy(e2.values), p);
    let rot = frame_distance(&e1.vectors, &e2.vectors);
    (k * rot * rot + eigenvalue_term_sq(e1.values, e2.values)).sqrt()
}

/// Rotation-matrix spectral measure with a caller-supplied orientation weight.
pub fn dist_spectral_rotation_with_k(s1: &DiffusionTensor, s2: &DiffusionTensor, k: f64) -> f64 {
    let e1 = symmetric_eigen(s1.components());
    let e2 = symmetric_eigen(s2.components());
    let rot = frame_distance(&e1.vectors, &e2.vectors);
    (k * rot * rot + eigenvalue_term_sq(e1.values, e2.values)).sqrt()
}

/// Distance between two tensors under `kind`; the spectral measures
/// decompose both inputs.
pub fn distance(kind: MetricKind, s1: &DiffusionTensor, s2: &DiffusionTensor, p: &KParams) -> Result<f64> {
    match kind {
        MetricKind::AffineInvariant => dist_affine_invariant(s1, s2),
        MetricKind::LogEuclidean => Ok(dist_log_euclidean(s1, s2)),
        MetricKind::SpectralRotation => Ok(dist_spectral_rotation(s1, s2, p)),
        MetricKind::SpectralQuaternion => Ok(dist_spectral_quaternion(
            &spectral_decompose(s1),
            &spectral_decompose(s2),
            p,
        )),
    }
}
