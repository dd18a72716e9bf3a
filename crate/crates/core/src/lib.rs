//! Diffusion tensor metrics, means and interpolation built on the spectral
//! decomposition `S = U Λ Uᵀ`, with the orientation `U` carried as a unit
//! quaternion.

pub mod anisotropy;
pub mod bench;
pub mod eigen;
pub mod error;
pub mod field;
pub mod format;
pub mod interpolation;
pub mod means;
pub mod metrics;
pub mod quaternion;
pub mod render;
pub mod tensor;

pub use anisotropy::{aniso_row, aniso_sweep, classical_index, hilbert_anisotropy, AnisoIndexKind, AnisoRow};
pub use bench::{bench_distances, sweep_distances, wishart_sample, BenchReport, SweepMode, SweepRow};
pub use error::{Result, TensorError};
pub use field::{read_field, read_tensors, write_field, TensorField};
pub use interpolation::{interp_curve, interpolate_grid, resample_field, trilinear_weights, GridWeights};
pub use means::{mean_affine_invariant, mean_log_euclidean, mean_n, mean_pair, KarcherOptions, WeightedTensorSet};
pub use metrics::{
    dist_affine_invariant, dist_log_euclidean, dist_spectral_quaternion, dist_spectral_rotation, distance, KParams,
    MetricKind,
};
pub use quaternion::{canonical_representative, orbit, quat_to_rotation, realign, rotation_to_quat, UnitQuaternion};
pub use tensor::{compose, spectral_decompose, DiffusionTensor, SpectralForm};
