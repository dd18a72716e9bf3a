//! Symmetric 3x3 eigendecomposition by cyclic Jacobi rotations.
//!
//! Eigenpairs come back sorted by descending eigenvalue with an orthonormal,
//! right-handed eigenvector frame (columns of `vectors`, `det = +1`).

use nalgebra::{Matrix3, Vector3};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues (descending) and eigenvector columns of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetricEigen3 {
    pub values: [f64; 3],
    pub vectors: Matrix3<f64>,
}

/// Decompose the symmetric matrix given by its six unique entries
/// `(m00, m01, m02, m11, m12, m22)`.
pub fn symmetric_eigen(m: [f64; 6]) -> SymmetricEigen3 {
    let mut a = [[m[0], m[1], m[2]], [m[1], m[3], m[4]], [m[2], m[4], m[5]]];
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    for _ in 0..MAX_SWEEPS {
        if a[0][1] == 0.0 && a[0][2] == 0.0 && a[1][2] == 0.0 {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            let app = a[p][p];
            let aqq = a[q][q];
            let g = 100.0 * apq.abs();
            // Off-diagonal entry below the precision of both diagonal entries.
            if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                continue;
            }
            let h = aqq - app;
            let t = if h.abs() + g == h.abs() {
                apq / h
            } else {
                let theta = 0.5 * h / apq;
                let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                if theta < 0.0 {
                    -t
                } else {
                    t
                }
            };
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;

            a[p][p] = app - t * apq;
            a[q][q] = aqq + t * apq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            let r = 3 - p - q;
            let arp = a[r][p];
            let arq = a[r][q];
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let diag = [a[0][0], a[1][1], a[2][2]];
    let mut order = [0usize, 1, 2];
    // Stable descending sort keeps the solver's frame for exact ties.
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let col = |k: usize| Vector3::new(v[0][k], v[1][k], v[2][k]);
    let e1 = col(order[0]).normalize();
    let c2 = col(order[1]);
    let e2 = (c2 - e1 * e1.dot(&c2)).normalize();
    let e3 = e1.cross(&e2);

    SymmetricEigen3 {
        values: [diag[order[0]], diag[order[1]], diag[order[2]]],
        vectors: Matrix3::from_columns(&[e1, e2, e3]),
    }
}

/// Six unique entries of a symmetric matrix, read from the upper triangle.
pub(crate) fn sym_components(m: &Matrix3<f64>) -> [f64; 6] {
    [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 1)], m[(1, 2)], m[(2, 2)]]
}

pub(crate) fn sym_matrix(c: [f64; 6]) -> Matrix3<f64> {
    Matrix3::new(c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5])
}

/// `U diag(d) Uᵀ`, returned as six symmetric components.
pub(crate) fn reconstruct(u: &Matrix3<f64>, d: [f64; 3]) -> [f64; 6] {
    let e = |i: usize, j: usize| -> f64 {
        u[(i, 0)] * d[0] * u[(j, 0)] + u[(i, 1)] * d[1] * u[(j, 1)] + u[(i, 2)] * d[2] * u[(j, 2)]
    };
    [e(0, 0), e(0, 1), e(0, 2), e(1, 1), e(1, 2), e(2, 2)]
}

/// Apply a scalar function to the spectrum of a symmetric matrix.
pub(crate) fn map_spectrum(m: [f64; 6], f: impl Fn(f64) -> f64) -> [f64; 6] {
    let eig = symmetric_eigen(m);
    let d = eig.values.map(f);
    reconstruct(&eig.vectors, d)
}
