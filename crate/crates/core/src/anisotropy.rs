//! Scalar anisotropy indices of an eigenvalue triple.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TensorError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnisoIndexKind {
    /// Hilbert anisotropy `log(λmax/λmin)`.
    HA,
    /// Fractional anisotropy.
    FA,
    /// Relative anisotropy.
    RA,
    /// Geodesic anisotropy (spread of the log-eigenvalues).
    GA,
}

impl AnisoIndexKind {
    pub const ALL: [AnisoIndexKind; 4] = [Self::HA, Self::FA, Self::RA, Self::GA];
}

impl fmt::Display for AnisoIndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::HA => "HA",
            Self::FA => "FA",
            Self::RA => "RA",
            Self::GA => "GA",
        };
        f.write_str(s)
    }
}

impl FromStr for AnisoIndexKind {
    type Err = TensorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ha" => Ok(Self::HA),
            "fa" => Ok(Self::FA),
            "ra" => Ok(Self::RA),
            "ga" => Ok(Self::GA),
            _ => Err(TensorError::Parse(format!("unknown anisotropy index `{s}`"))),
        }
    }
}

fn sorted_desc(l: [f64; 3]) -> [f64; 3] {
    let mut l = l;
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

/// `log(λmax / λmin)`. Invariant to scaling and to eigenvalue order.
pub fn hilbert_anisotropy(l: [f64; 3]) -> f64 {
    let l = sorted_desc(l);
    (l[0] / l[2]).ln()
}

pub fn classical_index(kind: AnisoIndexKind, l: [f64; 3]) -> f64 {
    let l = sorted_desc(l);
    match kind {
        AnisoIndexKind::HA => hilbert_anisotropy(l),
        AnisoIndexKind::FA => {
            let mean = (l[0] + l[1] + l[2]) / 3.0;
            let dev = deviation_norm(l, mean);
            let norm = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
            (1.5f64).sqrt() * dev / norm
        }
        AnisoIndexKind::RA => {
            let mean = (l[0] + l[1] + l[2]) / 3.0;
            deviation_norm(l, mean) / (3.0f64.sqrt() * mean)
        }
        AnisoIndexKind::GA => {
            if l[2] == 0.0 {
                return f64::INFINITY;
            }
            let logs = l.map(f64::ln);
            let mean = (logs[0] + logs[1] + logs[2]) / 3.0;
            deviation_norm(logs, mean)
        }
    }
}

fn deviation_norm(x: [f64; 3], mean: f64) -> f64 {
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>().sqrt()
}

/// Lower end of the sweep parameter; `t = 0` is a rank-2 tensor.
pub const SWEEP_T_MIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnisoRow {
    pub t: f64,
    pub ha: f64,
    pub fa: f64,
    pub ra: f64,
    pub ga: f64,
}

/// Indices of the tensor with eigenvalues `t, (1 − t)/2, (1 − t)/2`
/// (planar for small t, spherical at 1/3, linear as t → 1).
pub fn aniso_row(t: f64) -> AnisoRow {
    let side = (1.0 - t) / 2.0;
    let l = [t, side, side];
    AnisoRow {
        t,
        ha: classical_index(AnisoIndexKind::HA, l),
        fa: classical_index(AnisoIndexKind::FA, l),
        ra: classical_index(AnisoIndexKind::RA, l),
        ga: classical_index(AnisoIndexKind::GA, l),
    }
}

/// Rows at `t = linspace(1e-3, 1, steps)`. The last row (`t = 1`) is the
/// rank-1 limit where HA and GA are infinite.
pub fn aniso_sweep(steps: usize) -> Result<Vec<AnisoRow>, TensorError> {
    if steps < 2 {
        return Err(TensorError::InvalidParameter("aniso sweep needs at least 2 steps".into()));
    }
    let span = 1.0 - SWEEP_T_MIN;
    Ok((0..steps)
        .map(|i| {
            let t = if i + 1 == steps {
                1.0
            } else {
                SWEEP_T_MIN + span * i as f64 / (steps - 1) as f64
            };
            aniso_row(t)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_is_zero_for_all_kinds() {
        for k in AnisoIndexKind::ALL {
            assert_eq!(classical_index(k, [2.5, 2.5, 2.5]), 0.0);
        }
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_anisotropy([1.0, 1.0, 1.0]), 0.0);
        assert!((hilbert_anisotropy([4.0, 1.0, 1.0]) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(hilbert_anisotropy([4.0, 2.0, 1.0]), hilbert_anisotropy([8.0, 4.0, 2.0]));
        assert_eq!(hilbert_anisotropy([1.0, 4.0, 2.0]), hilbert_anisotropy([4.0, 2.0, 1.0]));
    }

    #[test]
    fn spherical_point_of_sweep() {
        let r = aniso_row(1.0 / 3.0);
        for v in [r.ha, r.fa, r.ra, r.ga] {
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn linear_limit() {
        // (1, 0, 0): FA = 1 and RA = √2 exactly.
        let l = [1.0, 1e-300, 1e-300];
        assert!((classical_index(AnisoIndexKind::FA, l) - 1.0).abs() < 1e-15);
        assert!((classical_index(AnisoIndexKind::RA, l) - 2f64.sqrt()).abs() < 1e-15);
        let last = aniso_sweep(10).unwrap().pop().unwrap();
        assert_eq!(last.t, 1.0);
        assert!(last.ha.is_infinite() && last.ga.is_infinite());
        assert!((last.fa - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fa_known_value() {
        // λ = (3, 0, 0) + 1: mean 2, deviations (2, -1, -1) → ‖·‖ = √6, ‖λ‖ = √18.
        let fa = classical_index(AnisoIndexKind::FA, [4.0, 1.0, 1.0]);
        assert!((fa - (1.5f64).sqrt() * 6f64.sqrt() / 18f64.sqrt()).abs() < 1e-15);
        let ra = classical_index(AnisoIndexKind::RA, [4.0, 1.0, 1.0]);
        assert!((ra - 6f64.sqrt() / (3f64.sqrt() * 2.0)).abs() < 1e-15);
    }

    #[test]
    fn sweep_rejects_single_step() {
        assert!(aniso_sweep(1).is_err());
        assert_eq!(aniso_sweep(2).unwrap().len(), 2);
    }
}
