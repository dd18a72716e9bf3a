//! Random tensor generation, distance timing and distance sweeps.

use std::hint::black_box;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Result, TensorError};
use crate::metrics::{distance, KParams, MetricKind};
use crate::quaternion::{quat_to_rotation, UnitQuaternion};
use crate::tensor::DiffusionTensor;

pub const DEFAULT_DOF: usize = 5;
const MAX_RESAMPLES: usize = 10;
pub const SAMPLER_DESCRIPTION: &str = "ChaCha8 stream seeded from u64; ziggurat standard normals";

/// `n` Wishart draws `Σ_{j<dof} x_j x_jᵀ` with `x_j ~ N(0, scale)`.
/// The same seed always yields the same sequence.
pub fn wishart_sample(seed: u64, n: usize, dof: usize, scale: &DiffusionTensor) -> Result<Vec<DiffusionTensor>> {
    if dof < 3 {
        return Err(TensorError::InvalidParameter(format!("Wishart dof must be >= 3, got {dof}")));
    }
    let chol = scale
        .to_matrix()
        .cholesky()
        .ok_or(TensorError::NotPositiveDefinite { min_eigenvalue: 0.0 })?
        .l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(draw_one(&mut rng, &chol, dof)?);
    }
    Ok(out)
}

fn draw_one(rng: &mut ChaCha8Rng, chol: &Matrix3<f64>, dof: usize) -> Result<DiffusionTensor> {
    for _ in 0..MAX_RESAMPLES {
        let mut acc = Matrix3::zeros();
        for _ in 0..dof {
            let z = Vector3::new(
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            );
            let x = chol * z;
            acc += x * x.transpose();
        }
        if let Ok(t) = DiffusionTensor::from_matrix(&acc) {
            return Ok(t);
        }
    }
    Err(TensorError::RankDeficient {
        attempts: MAX_RESAMPLES,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricTiming {
    pub metric: MetricKind,
    /// Seconds for `n` distance evaluations (fastest repetition).
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub n: usize,
    pub seed: u64,
    pub dof: usize,
    pub repetitions: usize,
    pub sampler: &'static str,
    /// Components of the first sample, the fixed reference.
    pub reference: [f64; 6],
    /// Both spectral measures decompose both tensors inside every call.
    pub decomposition: &'static str,
    pub timings: Vec<MetricTiming>,
}

impl BenchReport {
    pub fn seconds(&self, metric: MetricKind) -> f64 {
        self.timings
            .iter()
            .find(|t| t.metric == metric)
            .map(|t| t.seconds)
            .unwrap_or(f64::NAN)
    }
}

/// Times `n` distances from the first Wishart sample to every sample, for
/// each metric on the identical precomputed sample list.
pub fn bench_distances(seed: u64, n: usize, repetitions: usize) -> Result<BenchReport> {
    if n < 100 {
        return Err(TensorError::InvalidParameter(format!("benchmark needs n >= 100, got {n}")));
    }
    let repetitions = repetitions.max(1);
    let samples = wishart_sample(seed, n, DEFAULT_DOF, &DiffusionTensor::IDENTITY)?;
    let reference = samples[0];
    let p = KParams::default();
    let mut timings = Vec::new();
    for metric in MetricKind::ALL {
        let mut best = f64::INFINITY;
        for _ in 0..repetitions {
            let start = Instant::now();
            for s in &samples {
                let _ = black_box(distance(metric, black_box(&reference), black_box(s), &p));
            }
            best = best.min(start.elapsed().as_secs_f64());
        }
        timings.push(MetricTiming {
            metric,
            seconds: best.max(f64::MIN_POSITIVE),
        });
    }
    Ok(BenchReport {
        n,
        seed,
        dof: DEFAULT_DOF,
        repetitions,
        sampler: SAMPLER_DESCRIPTION,
        reference: reference.components(),
        decomposition: "inside loop",
        timings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Eigenvalues,
    Angle,
    Both,
}

impl std::str::FromStr for SweepMode {
    type Err = TensorError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "eigenvalues" => Ok(Self::Eigenvalues),
            "angle" => Ok(Self::Angle),
            "both" => Ok(Self::Both),
            _ => Err(TensorError::Parse(format!("unknown sweep mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// Sweep parameter in `[-1, 1]`; 0 is the central tensor.
    pub param: f64,
    pub angle_deg: f64,
    pub ai: f64,
    pub le: f64,
    pub spectral_rot: f64,
    pub sq: f64,
}

/// Eigenvalues of the central tensor of the sweeps.
pub const SWEEP_CENTER: [f64; 3] = [1.7, 0.5, 0.3];
/// Log-eigenvalue direction of the eigenvalue sweep at `param = 1`.
const SWEEP_LOG_DIRECTION: [f64; 3] = [0.5, 0.0, -0.5];
const SWEEP_MAX_ANGLE_DEG: f64 = 45.0;

/// Tensor of a sweep at parameter `s ∈ [-1, 1]`; the frame rotates about z.
pub fn sweep_tensor(mode: SweepMode, s: f64) -> (DiffusionTensor, f64) {
    let scale = matches!(mode, SweepMode::Eigenvalues | SweepMode::Both);
    let turn = matches!(mode, SweepMode::Angle | SweepMode::Both);
    let lambda: [f64; 3] = if scale {
        [0, 1, 2].map(|i| SWEEP_CENTER[i] * (s * SWEEP_LOG_DIRECTION[i]).exp())
    } else {
        SWEEP_CENTER
    };
    let angle_deg = if turn { s * SWEEP_MAX_ANGLE_DEG } else { 0.0 };
    let q = UnitQuaternion::from_axis_angle([0.0, 0.0, 1.0], angle_deg.to_radians()).expect("fixed axis");
    let d = DiffusionTensor::diagonal(lambda).expect("positive sweep eigenvalues");
    (d.rotated(&quat_to_rotation(&q)), angle_deg)
}

/// Distance of each swept tensor to the central one (`param = 0`), for all
/// four measures. Rows are at `param = -1 + 2i/(steps - 1)`, so an odd
/// `steps` includes the central row.
pub fn sweep_distances(mode: SweepMode, steps: usize, p: &KParams) -> Result<Vec<SweepRow>> {
    if steps < 3 {
        return Err(TensorError::InvalidParameter(format!("sweep needs at least 3 steps, got {steps}")));
    }
    let (center, _) = sweep_tensor(mode, 0.0);
    (0..steps)
        .map(|i| {
            let s = -1.0 + 2.0 * i as f64 / (steps - 1) as f64;
            let (t, angle_deg) = sweep_tensor(mode, s);
            Ok(SweepRow {
                param: s,
                angle_deg,
                ai: distance(MetricKind::AffineInvariant, &t, &center, p)?,
                le: distance(MetricKind::LogEuclidean, &t, &center, p)?,
                spectral_rot: distance(MetricKind::SpectralRotation, &t, &center, p)?,
                sq: distance(MetricKind::SpectralQuaternion, &t, &center, p)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = wishart_sample(7, 20, 5, &DiffusionTensor::IDENTITY).unwrap();
        let b = wishart_sample(7, 20, 5, &DiffusionTensor::IDENTITY).unwrap();
        assert_eq!(a, b);
        let c = wishart_sample(8, 20, 5, &DiffusionTensor::IDENTITY).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn low_dof_rejected() {
        assert!(wishart_sample(1, 5, 2, &DiffusionTensor::IDENTITY).is_err());
    }

    #[test]
    fn sweep_modes_parse() {
        assert_eq!("angle".parse::<SweepMode>().unwrap(), SweepMode::Angle);
        assert!("tilt".parse::<SweepMode>().is_err());
    }

    #[test]
    fn sweep_center_row_is_zero() {
        for mode in [SweepMode::Eigenvalues, SweepMode::Angle, SweepMode::Both] {
            let rows = sweep_distances(mode, 5, &KParams::default()).unwrap();
            let c = rows[2];
            assert_eq!(c.param, 0.0);
            for d in [c.ai, c.le, c.spectral_rot, c.sq] {
                assert!(d.abs() < 1e-12, "{mode:?}: {d}");
            }
        }
    }

    #[test]
    fn bench_needs_enough_samples() {
        assert!(bench_distances(1, 10, 1).is_err());
    }
}
