//! Diffusion tensors and their spectral (eigenvalue + quaternion) form.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::eigen::{self, symmetric_eigen};
use crate::error::{Result, TensorError};
use crate::quaternion::{canonical_representative, quat_to_rotation, rotation_to_quat_unchecked, UnitQuaternion};

/// Relative positive-definiteness floor: `λ_min > PD_EPS · max(1, λ_max)`.
pub const PD_EPS: f64 = 1e-12;

/// 3×3 symmetric positive-definite tensor stored as
/// `(dxx, dxy, dxz, dyy, dyz, dzz)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionTensor {
    c: [f64; 6],
}

impl DiffusionTensor {
    pub const IDENTITY: Self = Self {
        c: [1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
    };

    /// Validating constructor, see [`validate_spd`].
    pub fn new(components: [f64; 6]) -> Result<Self> {
        validate_spd(components)
    }

    pub fn diagonal(d: [f64; 3]) -> Result<Self> {
        validate_spd([d[0], 0.0, 0.0, d[1], 0.0, d[2]])
    }

    /// Builds from the upper triangle of `m`.
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        validate_spd(eigen::sym_components(m))
    }

    /// Skips validation; the components must come from an SPD construction.
    pub(crate) const fn from_components_unchecked(c: [f64; 6]) -> Self {
        Self { c }
    }

    pub fn components(&self) -> [f64; 6] {
        self.c
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        eigen::sym_matrix(self.c)
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix().determinant()
    }

    pub fn trace(&self) -> f64 {
        self.c[0] + self.c[3] + self.c[5]
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        symmetric_eigen(self.c).values
    }

    /// `R S Rᵀ`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        let m = r * self.to_matrix() * r.transpose();
        Self::from_components_unchecked(eigen::sym_components(&m))
    }

    /// `α S` for `α > 0`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self::from_components_unchecked(self.c.map(|x| alpha * x))
    }

    /// `G S Gᵀ` for an arbitrary (invertible) `G`.
    pub fn congruence(&self, g: &Matrix3<f64>) -> Self {
        let m = g * self.to_matrix() * g.transpose();
        Self::from_components_unchecked(eigen::sym_components(&m))
    }

    pub fn spectral(&self) -> SpectralForm {
        spectral_decompose(self)
    }
}

/// Validates six components as a symmetric positive-definite tensor.
pub fn validate_spd(components: [f64; 6]) -> Result<DiffusionTensor> {
    if components.iter().any(|x| !x.is_finite()) {
        return Err(TensorError::NonFinite);
    }
    let values = symmetric_eigen(components).values;
    let floor = PD_EPS * values[0].max(1.0);
    if !(values[2] > floor) {
        return Err(TensorError::NotPositiveDefinite {
            min_eigenvalue: values[2],
        });
    }
    Ok(DiffusionTensor { c: components })
}

/// Eigenvalues `λ1 ≥ λ2 ≥ λ3 > 0` and canonical orientation quaternion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralForm {
    lambda: [f64; 3],
    q: UnitQuaternion,
}

impl SpectralForm {
    /// Eigenvalues must be positive; they are sorted descending and `q` is
    /// replaced by its canonical orbit representative.
    pub fn new(eigenvalues: [f64; 3], q: UnitQuaternion) -> Result<Self> {
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        if eigenvalues.iter().any(|&x| !(x > 0.0)) {
            return Err(TensorError::NotPositiveDefinite {
                min_eigenvalue: eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
        let mut lambda = eigenvalues;
        if !(lambda[0] >= lambda[1] && lambda[1] >= lambda[2]) {
            // Sorting eigenvalues permutes the eigenvector frame as well.
            let u = quat_to_rotation(&q);
            let mut order = [0usize, 1, 2];
            order.sort_by(|&i, &j| lambda[j].total_cmp(&lambda[i]));
            let mut cols = [u.column(order[0]).into_owned(), u.column(order[1]).into_owned(), u.column(order[2]).into_owned()];
            let permuted = Matrix3::from_columns(&cols);
            if permuted.determinant() < 0.0 {
                cols[2] = -cols[2];
            }
            lambda = [lambda[order[0]], lambda[order[1]], lambda[order[2]]];
            let q = rotation_to_quat_unchecked(&Matrix3::from_columns(&cols));
            return Ok(Self::from_parts(lambda, q));
        }
        Ok(Self::from_parts(lambda, q))
    }

    /// `lambda` must already be sorted and positive.
    pub(crate) fn from_parts(lambda: [f64; 3], q: UnitQuaternion) -> Self {
        Self {
            lambda,
            q: canonical_representative(&q),
        }
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.lambda
    }

    pub fn quaternion(&self) -> UnitQuaternion {
        self.q
    }

    /// Eigenvector frame `U` (columns) with `det U = 1`.
    pub fn frame(&self) -> Matrix3<f64> {
        quat_to_rotation(&self.q)
    }

    pub fn determinant(&self) -> f64 {
        self.lambda[0] * self.lambda[1] * self.lambda[2]
    }

    pub fn log_eigenvalues(&self) -> [f64; 3] {
        self.lambda.map(f64::ln)
    }

    pub fn to_tensor(&self) -> DiffusionTensor {
        compose(self)
    }
}

/// `S = U Λ Uᵀ` with λ sorted descending, `det U = +1` and the canonical
/// quaternion of `U`.
///
/// Near-degenerate eigenvalues are accepted: the solver's frame is used as is,
/// so the orientation is only defined up to rotations inside the degenerate
/// eigenspace.
pub fn spectral_decompose(s: &DiffusionTensor) -> SpectralForm {
    let e = symmetric_eigen(s.c);
    SpectralForm::from_parts(e.values, rotation_to_quat_unchecked(&e.vectors))
}

pub fn compose(f: &SpectralForm) -> DiffusionTensor {
    let u = quat_to_rotation(&f.q);
    DiffusionTensor::from_components_unchecked(eigen::reconstruct(&u, f.lambda))
}

/// Relative Frobenius distance `‖A − B‖ / ‖B‖` between two tensors.
pub fn relative_frobenius_error(a: &DiffusionTensor, b: &DiffusionTensor) -> f64 {
    (a.to_matrix() - b.to_matrix()).norm() / b.to_matrix().norm()
}
