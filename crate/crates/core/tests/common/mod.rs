//! Independent reference computations for integration tests. Everything here
//! goes through nalgebra's own eigensolver and quaternion type rather than
//! the library's routines.

#![allow(dead_code)]

use nalgebra::{Matrix3, Quaternion, SymmetricEigen, UnitQuaternion as NaQuat, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use spectral_tensor::DiffusionTensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Eigenvalues in descending order.
pub fn eigenvalues(t: &DiffusionTensor) -> [f64; 3] {
    let mut v: Vec<f64> = SymmetricEigen::new(t.to_matrix()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    [v[0], v[1], v[2]]
}

pub fn hilbert(t: &DiffusionTensor) -> f64 {
    let l = eigenvalues(t);
    (l[0] / l[2]).ln()
}

/// Principal eigenvector.
pub fn principal_axis(t: &DiffusionTensor) -> Vector3<f64> {
    let e = SymmetricEigen::new(t.to_matrix());
    let i = e.eigenvalues.imax();
    e.eigenvectors.column(i).into_owned()
}

pub fn spectral_map(m: &Matrix3<f64>, f: impl Fn(f64) -> f64) -> Matrix3<f64> {
    let e = SymmetricEigen::new(*m);
    let d = Matrix3::from_diagonal(&e.eigenvalues.map(f));
    e.eigenvectors * d * e.eigenvectors.transpose()
}

pub fn log_m(m: &Matrix3<f64>) -> Matrix3<f64> {
    spectral_map(m, f64::ln)
}

pub fn exp_m(m: &Matrix3<f64>) -> Matrix3<f64> {
    spectral_map(m, f64::exp)
}

pub fn pow_m(m: &Matrix3<f64>, p: f64) -> Matrix3<f64> {
    spectral_map(m, |x| x.powf(p))
}

/// `S1^{1/2} (S1^{-1/2} S2 S1^{-1/2})^t S1^{1/2}`.
pub fn affine_geodesic(s1: &DiffusionTensor, s2: &DiffusionTensor, t: f64) -> Matrix3<f64> {
    let a = s1.to_matrix();
    let half = pow_m(&a, 0.5);
    let inv_half = pow_m(&a, -0.5);
    let mid = inv_half * s2.to_matrix() * inv_half;
    let mid = (mid + mid.transpose()) * 0.5;
    half * pow_m(&mid, t) * half
}

pub fn random_quat(r: &mut ChaCha8Rng) -> NaQuat<f64> {
    loop {
        let v: [f64; 4] = [0; 4].map(|_| StandardNormal.sample(r));
        let q = Quaternion::new(v[0], v[1], v[2], v[3]);
        if q.norm() > 1e-3 {
            return NaQuat::from_quaternion(q);
        }
    }
}

pub fn random_rotation(r: &mut ChaCha8Rng) -> Matrix3<f64> {
    random_quat(r).to_rotation_matrix().into_inner()
}

/// Tensor `R diag(λ) Rᵀ` with the rotation of `q`.
pub fn tensor_from(q: &NaQuat<f64>, lambda: [f64; 3]) -> DiffusionTensor {
    let r = q.to_rotation_matrix().into_inner();
    let m = r * Matrix3::from_diagonal(&Vector3::from(lambda)) * r.transpose();
    DiffusionTensor::from_matrix(&((m + m.transpose()) * 0.5)).unwrap()
}

/// Distinct descending eigenvalues with `λ1/λ3 ≥ min_ratio`.
pub fn random_eigenvalues(r: &mut ChaCha8Rng, min_ratio: f64) -> [f64; 3] {
    loop {
        let mut l = [0; 3].map(|_| (r.random_range(-2.5..1.0f64)).exp());
        l.sort_by(|a, b| b.total_cmp(a));
        if l[0] / l[2] >= min_ratio && l[0] > l[1] && l[1] > l[2] {
            return l;
        }
    }
}

/// The 8 quaternions `±q·{1, i, j, k}` as plain 4-vectors `(w, x, y, z)`.
pub fn orbit(q: &NaQuat<f64>) -> Vec<[f64; 4]> {
    let units = [
        Quaternion::new(1.0, 0.0, 0.0, 0.0),
        Quaternion::new(0.0, 1.0, 0.0, 0.0),
        Quaternion::new(0.0, 0.0, 1.0, 0.0),
        Quaternion::new(0.0, 0.0, 0.0, 1.0),
    ];
    let mut out = Vec::new();
    for u in units {
        let m = q.quaternion() * u;
        for s in [1.0, -1.0] {
            out.push([s * m.w, s * m.i, s * m.j, s * m.k]);
        }
    }
    out
}

pub fn chord_sq(a: [f64; 4], b: [f64; 4]) -> f64 {
    (0..4).map(|i| (a[i] - b[i]).powi(2)).sum()
}

/// `min` over the orbit of the squared chord.
pub fn orbit_chord_sq(q: [f64; 4], orbit: &[[f64; 4]]) -> f64 {
    orbit.iter().map(|m| chord_sq(q, *m)).fold(f64::INFINITY, f64::min)
}

/// Uniform point of the probability simplex.
pub fn simplex(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let mut w: Vec<f64> = e.iter().map(|x| x / s).collect();
    let total: f64 = w[..n - 1].iter().sum();
    w[n - 1] = (1.0 - total).max(0.0);
    w
}

pub fn rel_frobenius(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    (a - b).norm() / b.norm()
}
