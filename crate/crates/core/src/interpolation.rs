//! Curve, grid and field interpolation through weighted means.

use rayon::prelude::*;

use crate::error::{Result, TensorError};
use crate::field::TensorField;
use crate::means::{mean_affine_invariant, mean_log_euclidean, mean_n, mean_pair, KarcherOptions, WeightedTensorSet};
use crate::metrics::{KParams, MetricKind};
use crate::tensor::{compose, spectral_decompose, DiffusionTensor, SpectralForm};

/// Environment variable capping the worker count of parallel resampling.
pub const THREADS_ENV: &str = "SPECTRAL_TENSOR_THREADS";

/// Weights of the eight unit-cube corners at a point. Corner `α` is stored
/// at index `α1 + 2·α2 + 4·α3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridWeights {
    pub weights: [f64; 8],
}

impl GridWeights {
    pub fn corner(index: usize) -> [u8; 3] {
        [(index & 1) as u8, ((index >> 1) & 1) as u8, ((index >> 2) & 1) as u8]
    }

    pub fn get(&self, alpha: [u8; 3]) -> f64 {
        self.weights[alpha[0] as usize + 2 * alpha[1] as usize + 4 * alpha[2] as usize]
    }
}

/// `w_α(x) = Π (1 − α_i + (−1)^{1−α_i} x_i)`, i.e. `x_i` for `α_i = 1`
/// and `1 − x_i` for `α_i = 0`.
pub fn trilinear_weights(x: [f64; 3]) -> Result<GridWeights> {
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(TensorError::OutOfRange { value: *v });
    }
    let mut weights = [0.0; 8];
    for (idx, w) in weights.iter_mut().enumerate() {
        let alpha = GridWeights::corner(idx);
        *w = (0..3)
            .map(|i| if alpha[i] == 1 { x[i] } else { 1.0 - x[i] })
            .product();
    }
    Ok(GridWeights { weights })
}

fn two_point_mean(
    s1: &SpectralForm,
    s2: &SpectralForm,
    t: f64,
    metric: MetricKind,
) -> Result<DiffusionTensor> {
    let (w1, w2) = (1.0 - t, t);
    match metric {
        MetricKind::SpectralQuaternion => Ok(compose(&mean_pair(s1, s2, w1, w2)?)),
        MetricKind::LogEuclidean => {
            if t == 0.0 {
                return Ok(compose(s1));
            }
            if t == 1.0 {
                return Ok(compose(s2));
            }
            Ok(mean_log_euclidean(&WeightedTensorSet::new(vec![*s1, *s2], vec![w1, w2])?))
        }
        MetricKind::AffineInvariant => {
            if t == 0.0 {
                return Ok(compose(s1));
            }
            if t == 1.0 {
                return Ok(compose(s2));
            }
            mean_affine_invariant(
                &WeightedTensorSet::new(vec![*s1, *s2], vec![w1, w2])?,
                KarcherOptions::default(),
            )
        }
        MetricKind::SpectralRotation => Err(TensorError::UnsupportedMetric("spectral-rot")),
    }
}

/// Samples `t = i/(steps − 1)` of the weighted mean `((1 − t)·S1, t·S2)`.
pub fn interp_curve(
    s1: &SpectralForm,
    s2: &SpectralForm,
    steps: usize,
    metric: MetricKind,
) -> Result<Vec<DiffusionTensor>> {
    if steps < 2 {
        return Err(TensorError::InvalidParameter("curve needs at least 2 steps".into()));
    }
    if metric == MetricKind::SpectralRotation {
        return Err(TensorError::UnsupportedMetric("spectral-rot"));
    }
    (0..steps)
        .map(|i| two_point_mean(s1, s2, i as f64 / (steps - 1) as f64, metric))
        .collect()
}

/// Spectral-quaternion curve samples kept in spectral form.
pub fn interp_curve_spectral(s1: &SpectralForm, s2: &SpectralForm, steps: usize) -> Result<Vec<SpectralForm>> {
    if steps < 2 {
        return Err(TensorError::InvalidParameter("curve needs at least 2 steps".into()));
    }
    (0..steps)
        .map(|i| {
            let t = i as f64 / (steps - 1) as f64;
            mean_pair(s1, s2, 1.0 - t, t)
        })
        .collect()
}

/// Weighted mean of cell corners at local coordinates `x`.
///
/// `corners` holds 8 (cube, corner order of [`GridWeights`]), 4 (square,
/// the `z = 0` face; `x[2]` is ignored) or 2 (segment, `x[0]` only) tensors.
/// A segment uses the two-tensor mean, squares and cubes the N-tensor mean.
pub fn interpolate_grid(
    corners: &[SpectralForm],
    x: [f64; 3],
    metric: MetricKind,
    p: &KParams,
) -> Result<DiffusionTensor> {
    let point = match corners.len() {
        8 => x,
        4 => [x[0], x[1], 0.0],
        2 => [x[0], 0.0, 0.0],
        n => {
            return Err(TensorError::DimensionMismatch(format!(
                "grid interpolation needs 2, 4 or 8 corners, got {n}"
            )))
        }
    };
    let gw = trilinear_weights(point)?;
    let weights = &gw.weights[..corners.len()];
    if let Some(i) = weights.iter().position(|&w| w == 1.0) {
        return Ok(compose(&corners[i]));
    }
    if corners.len() == 2 {
        return two_point_mean(&corners[0], &corners[1], point[0], metric);
    }
    let set = WeightedTensorSet::new(corners.to_vec(), weights.to_vec())?;
    match metric {
        MetricKind::SpectralQuaternion => Ok(compose(&mean_n(&set, p))),
        MetricKind::LogEuclidean => Ok(mean_log_euclidean(&set)),
        MetricKind::AffineInvariant => mean_affine_invariant(&set, KarcherOptions::default()),
        MetricKind::SpectralRotation => Err(TensorError::UnsupportedMetric("spectral-rot")),
    }
}

/// Position of output sample `i` on the input axis, as (cell, fraction).
fn axis_position(i: usize, n_in: usize, n_out: usize) -> (usize, f64) {
    if n_in == 1 {
        return (0, 0.0);
    }
    let pos = if n_out == 1 {
        (n_in - 1) as f64 / 2.0
    } else {
        (i * (n_in - 1)) as f64 / (n_out - 1) as f64
    };
    let cell = (pos.floor() as usize).min(n_in - 2);
    let frac = (pos - cell as f64).clamp(0.0, 1.0);
    (cell, frac)
}

/// Resamples `f` onto `new_dims` voxels spanning the same extent (first and
/// last samples land on the first and last input voxels). Each output voxel
/// is the weighted mean of its enclosing input cell; axes with a single input
/// voxel are not interpolated.
pub fn resample_field(f: &TensorField, new_dims: [usize; 3], metric: MetricKind, p: &KParams) -> Result<TensorField> {
    if new_dims.iter().any(|&d| d == 0) {
        return Err(TensorError::DimensionMismatch(format!("dimensions must be positive, got {new_dims:?}")));
    }
    if metric == MetricKind::SpectralRotation {
        return Err(TensorError::UnsupportedMetric("spectral-rot"));
    }
    let dims = f.dims();
    let forms: Vec<SpectralForm> = with_pool(|| f.voxels().par_iter().map(spectral_decompose).collect());
    let active: Vec<usize> = (0..3).filter(|&a| dims[a] > 1).collect();
    let total = new_dims[0] * new_dims[1] * new_dims[2];

    let voxel = |out_index: usize| -> Result<DiffusionTensor> {
        let ijk = [
            out_index % new_dims[0],
            (out_index / new_dims[0]) % new_dims[1],
            out_index / (new_dims[0] * new_dims[1]),
        ];
        let pos: [(usize, f64); 3] = [0, 1, 2].map(|a| axis_position(ijk[a], dims[a], new_dims[a]));
        if pos.iter().all(|&(_, frac)| frac == 0.0 || frac == 1.0) {
            let at = pos.map(|(cell, frac)| cell + (frac == 1.0) as usize);
            return Ok(*f.get(at[0], at[1], at[2]));
        }
        let n_corners = 1usize << active.len();
        let corners: Vec<SpectralForm> = (0..n_corners)
            .map(|c| {
                let mut at = [pos[0].0, pos[1].0, pos[2].0];
                for (bit, &axis) in active.iter().enumerate() {
                    at[axis] += (c >> bit) & 1;
                }
                forms[f.index(at[0], at[1], at[2])]
            })
            .collect();
        let mut x = [0.0; 3];
        for (slot, &axis) in active.iter().enumerate() {
            x[slot] = pos[axis].1;
        }
        interpolate_grid(&corners, x, metric, p).map_err(|e| e.at_voxel(out_index))
    };

    let voxels: Vec<Result<DiffusionTensor>> = with_pool(|| (0..total).into_par_iter().map(voxel).collect());
    let voxels = voxels.into_iter().collect::<Result<Vec<_>>>()?;

    let spacing = [0, 1, 2].map(|a| {
        let s = f.spacing()[a];
        if dims[a] > 1 && new_dims[a] > 1 {
            s * (dims[a] - 1) as f64 / (new_dims[a] - 1) as f64
        } else {
            s
        }
    });
    TensorField::new(new_dims, spacing, voxels)
}

/// Runs `op` on a pool capped by `SPECTRAL_TENSOR_THREADS` when set.
pub fn with_pool<T: Send>(op: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(op),
        None => op(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::UnitQuaternion;

    #[test]
    fn corner_weights() {
        let w = trilinear_weights([0.0, 0.0, 0.0]).unwrap();
        assert_eq!(w.weights, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let w = trilinear_weights([0.5, 0.5, 0.5]).unwrap();
        assert!(w.weights.iter().all(|&v| v == 0.125));
        let w = trilinear_weights([0.25, 0.0, 0.0]).unwrap();
        assert_eq!(w.get([0, 0, 0]), 0.75);
        assert_eq!(w.get([1, 0, 0]), 0.25);
        assert_eq!(w.weights.iter().filter(|&&v| v != 0.0).count(), 2);
    }

    #[test]
    fn out_of_range_coordinates() {
        assert!(matches!(trilinear_weights([1.1, 0.0, 0.0]), Err(TensorError::OutOfRange { .. })));
        assert!(matches!(trilinear_weights([0.0, -1e-9, 0.0]), Err(TensorError::OutOfRange { .. })));
        assert!(trilinear_weights([0.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn curve_rejects_rotation_baseline() {
        let s = spectral_decompose(&DiffusionTensor::IDENTITY);
        assert!(matches!(
            interp_curve(&s, &s, 5, MetricKind::SpectralRotation),
            Err(TensorError::UnsupportedMetric(_))
        ));
        assert!(interp_curve(&s, &s, 1, MetricKind::LogEuclidean).is_err());
    }

    #[test]
    fn grid_needs_supported_corner_count() {
        let s = spectral_decompose(&DiffusionTensor::IDENTITY);
        let r = interpolate_grid(&[s, s, s], [0.5; 3], MetricKind::LogEuclidean, &KParams::default());
        assert!(matches!(r, Err(TensorError::DimensionMismatch(_))));
    }

    #[test]
    fn axis_positions() {
        assert_eq!(axis_position(0, 2, 11), (0, 0.0));
        assert_eq!(axis_position(10, 2, 11), (0, 1.0));
        assert_eq!(axis_position(3, 4, 4), (2, 1.0));
        assert_eq!(axis_position(2, 4, 4), (2, 0.0));
        assert_eq!(axis_position(0, 3, 1), (1, 0.0));
        assert_eq!(axis_position(5, 1, 9), (0, 0.0));
    }

    #[test]
    fn constant_field_stays_constant() {
        let q = UnitQuaternion::from_axis_angle([1.0, 2.0, 3.0], 0.4).unwrap();
        let s = SpectralForm::new([3.0, 1.0, 0.5], q).unwrap().to_tensor();
        let f = TensorField::constant([2, 2, 2], [1.0; 3], s).unwrap();
        for metric in [MetricKind::SpectralQuaternion, MetricKind::LogEuclidean] {
            let g = resample_field(&f, [3, 4, 2], metric, &KParams::default()).unwrap();
            for v in g.voxels() {
                let err = crate::tensor::relative_frobenius_error(v, &s);
                assert!(err < 1e-13, "{metric}: {err}");
            }
        }
    }
}
