//! Python bindings for the spectral-tensor library.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use spectral_tensor as st;

fn err(e: st::TensorError) -> PyErr {
    match e {
        st::TensorError::Io(_) | st::TensorError::NoConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn metric(name: &str) -> PyResult<st::MetricKind> {
    name.parse().map_err(err)
}

#[pyclass(name = "DiffusionTensor", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyTensor(st::DiffusionTensor);

#[pymethods]
impl PyTensor {
    /// Components `(dxx, dxy, dxz, dyy, dyz, dzz)`.
    #[new]
    fn new(components: [f64; 6]) -> PyResult<Self> {
        st::DiffusionTensor::new(components).map(Self).map_err(err)
    }

    #[staticmethod]
    fn diagonal(d: [f64; 3]) -> PyResult<Self> {
        st::DiffusionTensor::diagonal(d).map(Self).map_err(err)
    }

    #[getter]
    fn components(&self) -> [f64; 6] {
        self.0.components()
    }

    fn matrix(&self) -> [[f64; 3]; 3] {
        let m = self.0.to_matrix();
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
    }

    fn eigenvalues(&self) -> [f64; 3] {
        self.0.eigenvalues()
    }

    fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    fn spectral(&self) -> PySpectral {
        PySpectral(st::spectral_decompose(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("DiffusionTensor({:?})", self.0.components())
    }
}

#[pyclass(name = "UnitQuaternion", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyQuaternion(st::UnitQuaternion);

#[pymethods]
impl PyQuaternion {
    #[new]
    fn new(a: f64, v1: f64, v2: f64, v3: f64) -> PyResult<Self> {
        st::UnitQuaternion::new(a, v1, v2, v3).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_axis_angle(axis: [f64; 3], angle: f64) -> PyResult<Self> {
        st::UnitQuaternion::from_axis_angle(axis, angle).map(Self).map_err(err)
    }

    #[getter]
    fn components(&self) -> [f64; 4] {
        self.0.components()
    }

    fn orbit(&self) -> Vec<PyQuaternion> {
        st::orbit(&self.0).iter().map(|q| Self(*q)).collect()
    }

    fn canonical(&self) -> Self {
        Self(st::canonical_representative(&self.0))
    }

    fn chordal_distance(&self, other: &Self) -> f64 {
        self.0.chordal_distance(&other.0)
    }

    fn rotation(&self) -> [[f64; 3]; 3] {
        let m = st::quat_to_rotation(&self.0);
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
    }

    fn __repr__(&self) -> String {
        format!("UnitQuaternion({:?})", self.0.components())
    }
}

#[pyclass(name = "SpectralForm", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PySpectral(st::SpectralForm);

#[pymethods]
impl PySpectral {
    #[new]
    fn new(eigenvalues: [f64; 3], q: &PyQuaternion) -> PyResult<Self> {
        st::SpectralForm::new(eigenvalues, q.0).map(Self).map_err(err)
    }

    #[getter]
    fn eigenvalues(&self) -> [f64; 3] {
        self.0.eigenvalues()
    }

    #[getter]
    fn quaternion(&self) -> PyQuaternion {
        PyQuaternion(self.0.quaternion())
    }

    fn tensor(&self) -> PyTensor {
        PyTensor(st::compose(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("SpectralForm({:?}, {:?})", self.0.eigenvalues(), self.0.quaternion().components())
    }
}

#[pyclass(name = "KParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyKParams(st::KParams);

#[pymethods]
impl PyKParams {
    #[new]
    #[pyo3(signature = (slope = 3.0, offset = 7.0))]
    fn new(slope: f64, offset: f64) -> PyResult<Self> {
        st::KParams::new(slope, offset).map(Self).map_err(err)
    }

    #[getter]
    fn slope(&self) -> f64 {
        self.0.slope
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.0.offset
    }
}

fn params(k: Option<PyKParams>) -> st::KParams {
    k.map(|k| k.0).unwrap_or_default()
}

fn weighted(tensors: &[PyTensor], weights: Option<Vec<f64>>) -> PyResult<st::WeightedTensorSet> {
    let forms: Vec<_> = tensors.iter().map(|t| st::spectral_decompose(&t.0)).collect();
    match weights {
        Some(w) => st::WeightedTensorSet::normalized(forms, &w),
        None => st::WeightedTensorSet::uniform(forms),
    }
    .map_err(err)
}

/// Distance between two tensors; `metric` is one of ai, le, spectral-rot, sq.
#[pyfunction]
#[pyo3(signature = (a, b, metric = "sq", k = None))]
fn distance(a: &PyTensor, b: &PyTensor, metric: &str, k: Option<PyKParams>) -> PyResult<f64> {
    st::distance(self::metric(metric)?, &a.0, &b.0, &params(k)).map_err(err)
}

/// Weighted mean; weights are normalized and default to uniform.
#[pyfunction]
#[pyo3(signature = (tensors, weights = None, metric = "sq", k = None))]
fn mean(tensors: Vec<PyTensor>, weights: Option<Vec<f64>>, metric: &str, k: Option<PyKParams>) -> PyResult<PyTensor> {
    let set = weighted(&tensors, weights)?;
    let m = match self::metric(metric)? {
        st::MetricKind::SpectralQuaternion if set.len() == 2 => {
            let (t, w) = (set.tensors(), set.weights());
            st::mean_pair(&t[0], &t[1], w[0], w[1]).map_err(err)?.to_tensor()
        }
        st::MetricKind::SpectralQuaternion => st::mean_n(&set, &params(k)).to_tensor(),
        st::MetricKind::LogEuclidean => st::mean_log_euclidean(&set),
        st::MetricKind::AffineInvariant => {
            st::mean_affine_invariant(&set, st::KarcherOptions::default()).map_err(err)?
        }
        st::MetricKind::SpectralRotation => return Err(err(st::TensorError::UnsupportedMetric("spectral-rot"))),
    };
    Ok(PyTensor(m))
}

/// `steps` samples of the interpolation curve from `a` to `b`.
#[pyfunction]
#[pyo3(signature = (a, b, steps = 11, metric = "sq"))]
fn interp_curve(a: &PyTensor, b: &PyTensor, steps: usize, metric: &str) -> PyResult<Vec<PyTensor>> {
    let (fa, fb) = (st::spectral_decompose(&a.0), st::spectral_decompose(&b.0));
    let curve = st::interp_curve(&fa, &fb, steps, self::metric(metric)?).map_err(err)?;
    Ok(curve.into_iter().map(PyTensor).collect())
}

/// Anisotropy index (HA, FA, RA or GA) of a tensor.
#[pyfunction]
#[pyo3(signature = (t, index = "HA"))]
fn anisotropy(t: &PyTensor, index: &str) -> PyResult<f64> {
    let kind: st::AnisoIndexKind = index.parse().map_err(err)?;
    Ok(st::classical_index(kind, t.0.eigenvalues()))
}

/// Seeded Wishart samples with identity scale.
#[pyfunction]
#[pyo3(signature = (seed, n, dof = 5))]
fn wishart_sample(seed: u64, n: usize, dof: usize) -> PyResult<Vec<PyTensor>> {
    let s = st::wishart_sample(seed, n, dof, &st::DiffusionTensor::IDENTITY).map_err(err)?;
    Ok(s.into_iter().map(PyTensor).collect())
}

#[pymodule]
fn spectral_tensor_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensor>()?;
    m.add_class::<PyQuaternion>()?;
    m.add_class::<PySpectral>()?;
    m.add_class::<PyKParams>()?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(mean, m)?)?;
    m.add_function(wrap_pyfunction!(interp_curve, m)?)?;
    m.add_function(wrap_pyfunction!(anisotropy, m)?)?;
    m.add_function(wrap_pyfunction!(wishart_sample, m)?)?;
    Ok(())
}
