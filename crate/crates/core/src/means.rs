//! Weighted means of diffusion tensors.
//!
//! The spectral-quaternion means average log-eigenvalues (a geometric mean
//! per eigenvalue rank) and realigned orientation quaternions (a chordal
//! mean). Because the Hilbert anisotropy is a difference of log-eigenvalues,
//! the anisotropy of the mean is the weighted mean of the anisotropies.
//! Log-Euclidean and affine-invariant (Karcher) means are provided as
//! baselines.

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};

use crate::anisotropy::hilbert_anisotropy;
use crate::eigen::{map_spectrum, reconstruct, symmetric_eigen, sym_components, sym_matrix};
use crate::error::{Result, TensorError};
use crate::metrics::{k_factor, KParams};
use crate::quaternion::{orbit, realign, UnitQuaternion};
use crate::tensor::{spectral_decompose, DiffusionTensor, SpectralForm};

/// Tolerance on `Σ w = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Below this norm the averaged quaternion has no usable direction.
const DEGENERATE_NORM: f64 = 1e-9;
const DEGENERATE_K_SUM: f64 = 1e-12;

/// Tensors in spectral form with nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedTensorSet {
    tensors: Vec<SpectralForm>,
    weights: Vec<f64>,
}

impl WeightedTensorSet {
    pub fn new(tensors: Vec<SpectralForm>, weights: Vec<f64>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(TensorError::InvalidWeights("empty tensor set".into()));
        }
        if tensors.len() != weights.len() {
            return Err(TensorError::InvalidWeights(format!(
                "{} tensors but {} weights",
                tensors.len(),
                weights.len()
            )));
        }
        check_weights(&weights)?;
        Ok(Self { tensors, weights })
    }

    /// Divides the weights by their sum first.
    pub fn normalized(tensors: Vec<SpectralForm>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(TensorError::InvalidWeights(format!("weights sum to {total}")));
        }
        Self::new(tensors, weights.iter().map(|w| w / total).collect())
    }

    /// Equal weights.
    pub fn uniform(tensors: Vec<SpectralForm>) -> Result<Self> {
        let w = vec![1.0; tensors.len()];
        Self::normalized(tensors, &w)
    }

    pub fn from_tensors(tensors: &[DiffusionTensor], weights: &[f64]) -> Result<Self> {
        Self::new(tensors.iter().map(spectral_decompose).collect(), weights.to_vec())
    }

    pub fn tensors(&self) -> &[SpectralForm] {
        &self.tensors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    fn iter(&self) -> impl Iterator<Item = (&SpectralForm, f64)> {
        self.tensors.iter().zip(self.weights.iter().copied())
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(TensorError::InvalidWeights(format!("negative or non-finite weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(TensorError::InvalidWeights(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// Two-tensor mean: geometric mean of each eigenvalue and normalized chordal
/// mean of `q1` and the realigned `q2`.
pub fn mean_pair(s1: &SpectralForm, s2: &SpectralForm, w1: f64, w2: f64) -> Result<SpectralForm> {
    check_weights(&[w1, w2])?;
    if w2 == 0.0 {
        return Ok(*s1);
    }
    if w1 == 0.0 {
        return Ok(*s2);
    }
    let l1 = s1.log_eigenvalues();
    let l2 = s2.log_eigenvalues();
    let lambda = [0, 1, 2].map(|i| (w1 * l1[i] + w2 * l2[i]).exp());

    let q1 = s1.quaternion();
    let (q2a, _) = realign(&q1, &orbit(&s2.quaternion()));
    let m = add_scaled([0.0; 4], &q1, w1);
    let m = add_scaled(m, &q2a, w2);
    let q = normalize_or(m, q1);
    Ok(SpectralForm::from_parts(lambda, q))
}

fn add_scaled(acc: [f64; 4], q: &UnitQuaternion, w: f64) -> [f64; 4] {
    let c = q.components();
    [acc[0] + w * c[0], acc[1] + w * c[1], acc[2] + w * c[2], acc[3] + w * c[3]]
}

fn normalize_or(m: [f64; 4], fallback: UnitQuaternion) -> UnitQuaternion {
    let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3]).sqrt();
    if n < DEGENERATE_NORM {
        return fallback;
    }
    UnitQuaternion::from_unit(m.map(|x| x / n))
}

/// Ordering used to pick the reference tensor: larger `w·k`, then larger
/// HA, then the lexicographically greater quaternion, then larger
/// determinant. Does not depend on input order.
fn reference_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.wk.total_cmp(&b.wk)
        .then(a.ha.total_cmp(&b.ha))
        .then_with(|| {
            let (qa, qb) = (a.q.components(), b.q.components());
            qa.iter()
                .zip(qb.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
        .then(a.det.total_cmp(&b.det))
}

struct Candidate {
    wk: f64,
    ha: f64,
    q: UnitQuaternion,
    det: f64,
}

/// Weighted mean of N tensors: geometric mean of eigenvalues; orientation
/// is the normalized sum of `wᵢ kᵢ qᵢ` over quaternions realigned to the
/// most informative tensor (largest `wᵢ kᵢ`), with
/// `kᵢ = k(HAᵢ, HA_μ)` and `HA_μ = Σ wᵢ HAᵢ` taken from the mean eigenvalues.
///
/// When all tensors are (near) isotropic the weights vanish and the
/// reference orientation is returned.
pub fn mean_n(set: &WeightedTensorSet, p: &KParams) -> SpectralForm {
    if set.len() == 1 {
        return set.tensors[0];
    }
    let mut log_mean = [0.0; 3];
    for (s, w) in set.iter() {
        let l = s.log_eigenvalues();
        for i in 0..3 {
            log_mean[i] += w * l[i];
        }
    }
    let lambda = log_mean.map(f64::exp);
    let ha_mean = log_mean[0] - log_mean[2];

    let ks: Vec<f64> = set
        .tensors
        .iter()
        .map(|s| k_factor(hilbert_anisotropy(s.eigenvalues()), ha_mean, p))
        .collect();
    let candidates: Vec<Candidate> = set
        .iter()
        .zip(ks.iter())
        .map(|((s, w), k)| Candidate {
            wk: w * k,
            ha: hilbert_anisotropy(s.eigenvalues()),
            q: s.quaternion(),
            det: s.determinant(),
        })
        .collect();
    let r = (0..candidates.len())
        .max_by(|&i, &j| reference_order(&candidates[i], &candidates[j]))
        .unwrap_or(0);
    let q_ref = set.tensors[r].quaternion();

    let k_sum: f64 = ks.iter().sum();
    let q = if k_sum < DEGENERATE_K_SUM {
        q_ref
    } else {
        let mut m = [0.0; 4];
        for ((s, w), k) in set.iter().zip(ks.iter()) {
            let (aligned, _) = realign(&q_ref, &orbit(&s.quaternion()));
            m = add_scaled(m, &aligned, w * k / k_sum);
        }
        normalize_or(m, q_ref)
    };
    SpectralForm::from_parts(lambda, q)
}

fn log_of(s: &SpectralForm) -> Matrix3<f64> {
    sym_matrix(reconstruct(&s.frame(), s.log_eigenvalues()))
}

fn exp_sym(m: &Matrix3<f64>) -> Matrix3<f64> {
    sym_matrix(map_spectrum(sym_components(m), f64::exp))
}

fn sym_log(m: &Matrix3<f64>) -> Matrix3<f64> {
    sym_matrix(map_spectrum(symmetrized(m), f64::ln))
}

fn symmetrized(m: &Matrix3<f64>) -> [f64; 6] {
    [
        m[(0, 0)],
        0.5 * (m[(0, 1)] + m[(1, 0)]),
        0.5 * (m[(0, 2)] + m[(2, 0)]),
        m[(1, 1)],
        0.5 * (m[(1, 2)] + m[(2, 1)]),
        m[(2, 2)],
    ]
}

/// `exp(Σ wᵢ log Sᵢ)`.
pub fn mean_log_euclidean(set: &WeightedTensorSet) -> DiffusionTensor {
    if set.len() == 1 {
        return set.tensors[0].to_tensor();
    }
    let mut acc = Matrix3::zeros();
    for (s, w) in set.iter() {
        acc += log_of(s) * w;
    }
    DiffusionTensor::from_components_unchecked(sym_components(&exp_sym(&acc)))
}

/// Stopping rule of the affine-invariant mean iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KarcherOptions {
    /// Frobenius norm of the weighted log-residual at convergence.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for KarcherOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

/// Riemannian (Karcher) mean for the affine-invariant metric by the
/// iteration `S ← S^{1/2} exp(τ Σ wᵢ log(S^{-1/2} Sᵢ S^{-1/2})) S^{1/2}`,
/// started at the Log-Euclidean mean.
///
/// The cost Hessian at `S` has eigenvalues in `[1, Σ wᵢ cᵢ]` with
/// `cᵢ = (δᵢ/2) coth(δᵢ/2)` and `δᵢ` the log-eigenvalue spread of
/// `S^{-1/2} Sᵢ S^{-1/2}`; the step `τ = 2 / (1 + Σ wᵢ cᵢ)` balances the
/// contraction at both ends. `τ = 1` for clustered data.
pub fn mean_affine_invariant(set: &WeightedTensorSet, opts: KarcherOptions) -> Result<DiffusionTensor> {
    if !(opts.tol > 0.0) {
        return Err(TensorError::InvalidParameter("tolerance must be positive".into()));
    }
    let inputs: Vec<Matrix3<f64>> = set.tensors.iter().map(|s| s.to_tensor().to_matrix()).collect();
    let mut current = mean_log_euclidean(set).to_matrix();
    let mut residual = f64::INFINITY;
    for _ in 0..=opts.max_iter {
        let (sqrt, inv_sqrt) = sqrt_and_inv_sqrt(&current);
        let mut tangent = Matrix3::zeros();
        let mut curvature = 0.0;
        for (m, w) in inputs.iter().zip(set.weights.iter()) {
            if *w == 0.0 {
                continue;
            }
            let e = symmetric_eigen(symmetrized(&(inv_sqrt * m * inv_sqrt)));
            let logs = e.values.map(f64::ln);
            tangent += sym_matrix(reconstruct(&e.vectors, logs)) * *w;
            curvature += w * spread_factor(logs[0] - logs[2]);
        }
        residual = tangent.norm();
        if residual < opts.tol {
            return Ok(DiffusionTensor::from_components_unchecked(symmetrized(&current)));
        }
        let step = 2.0 / (1.0 + curvature);
        current = sqrt * exp_sym(&(tangent * step)) * sqrt;
    }
    Err(TensorError::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// `(δ/2) coth(δ/2)`, tending to 1 as `δ → 0`.
fn spread_factor(delta: f64) -> f64 {
    let h = 0.5 * delta;
    if h < 1e-4 {
        1.0 + h * h / 3.0
    } else {
        h / h.tanh()
    }
}

/// Frobenius norm of `Σ wᵢ log(S^{-1/2} Sᵢ S^{-1/2})`, the first-order
/// optimality residual of an affine-invariant mean candidate `S`.
pub fn karcher_residual(set: &WeightedTensorSet, candidate: &DiffusionTensor) -> f64 {
    let (_, inv_sqrt) = sqrt_and_inv_sqrt(&candidate.to_matrix());
    let mut tangent = Matrix3::zeros();
    for (s, w) in set.iter() {
        tangent += sym_log(&(inv_sqrt * s.to_tensor().to_matrix() * inv_sqrt)) * w;
    }
    tangent.norm()
}

fn sqrt_and_inv_sqrt(m: &Matrix3<f64>) -> (Matrix3<f64>, Matrix3<f64>) {
    let e = symmetric_eigen(symmetrized(m));
    let u = e.vectors;
    let d = Vector3::from(e.values.map(f64::sqrt));
    let sqrt = u * Matrix3::from_diagonal(&d) * u.transpose();
    let inv_sqrt = u * Matrix3::from_diagonal(&d.map(|x| 1.0 / x)) * u.transpose();
    (sqrt, inv_sqrt)
}

/// Weighted mean of the spectral form's eigenvalue log-anisotropy; used by
/// callers to check the commutation property.
pub fn weighted_hilbert_anisotropy(set: &WeightedTensorSet) -> f64 {
    set.iter().map(|(s, w)| w * hilbert_anisotropy(s.eigenvalues())).sum()
}

/// `exp(Σ wᵢ log det Sᵢ)`.
pub fn geometric_mean_determinant(set: &WeightedTensorSet) -> f64 {
    set.iter()
        .map(|(s, w)| w * s.log_eigenvalues().iter().sum::<f64>())
        .sum::<f64>()
        .exp()
}
