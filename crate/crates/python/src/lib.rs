//! Python module `tcdlr`.
//!
//! Tensors cross the boundary either as nested lists indexed `[i][j][k]` or as
//! raw little-endian `f64` bytes in storage order (slice-major, column-major
//! within a slice), which numpy reads with
//! `np.frombuffer(b).reshape(n3, n2, n1).transpose(2, 1, 0)`.

use std::time::Duration;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use tcdlr_core::harness::{self, SynthSpec};
use tcdlr_core::tproduct::DEFAULT_RANK_TOL;
use tcdlr_core::{
    Error, Mask3, Observation, RankInit, Shape, SolverConfig, SurrogateKind, SurrogateSpec, Tensor3,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for tcdlr_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn surrogate(kind: &str, p: f64, gamma: f64) -> PyResult<SurrogateSpec> {
    let kind: SurrogateKind = kind.parse().py()?;
    SurrogateSpec::new(kind, p, gamma).py()
}

fn index(shape: Shape, (i, j, k): (usize, usize, usize)) -> PyResult<()> {
    if i >= shape.n1 || j >= shape.n2 || k >= shape.n3 {
        return Err(PyIndexError::new_err(format!(
            "index ({i}, {j}, {k}) out of range for shape {shape}"
        )));
    }
    Ok(())
}

/// Dense real third-order tensor.
#[pyclass(name = "Tensor", module = "tcdlr", from_py_object)]
#[derive(Clone)]
struct PyTensor(Tensor3);

#[pymethods]
impl PyTensor {
    /// Zero tensor of shape `(n1, n2, n3)`.
    #[new]
    fn new(n1: usize, n2: usize, n3: usize) -> Self {
        PyTensor(Tensor3::zeros(Shape::new(n1, n2, n3)))
    }

    #[staticmethod]
    fn from_list(values: Vec<Vec<Vec<f64>>>) -> PyResult<Self> {
        let n1 = values.len();
        let n2 = values.first().map_or(0, Vec::len);
        let n3 = values.first().and_then(|r| r.first()).map_or(0, Vec::len);
        if values
            .iter()
            .any(|r| r.len() != n2 || r.iter().any(|t| t.len() != n3))
        {
            return Err(PyValueError::new_err("ragged nested list"));
        }
        Ok(PyTensor(Tensor3::from_fn(
            Shape::new(n1, n2, n3),
            |i, j, k| values[i][j][k],
        )))
    }

    /// Builds a tensor from storage-order `f64` bytes.
    #[staticmethod]
    fn from_bytes(shape: (usize, usize, usize), data: &[u8]) -> PyResult<Self> {
        if !data.len().is_multiple_of(8) {
            return Err(PyValueError::new_err("byte length is not a multiple of 8"));
        }
        let values = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Tensor3::from_vec(Shape::new(shape.0, shape.1, shape.2), values)
            .py()
            .map(PyTensor)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let bytes: Vec<u8> = self
            .0
            .as_slice()
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        PyBytes::new(py, &bytes)
    }

    fn tolist(&self) -> Vec<Vec<Vec<f64>>> {
        let (n1, n2, n3) = self.0.dims();
        (0..n1)
            .map(|i| {
                (0..n2)
                    .map(|j| (0..n3).map(|k| self.0[(i, j, k)]).collect())
                    .collect()
            })
            .collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        self.0.dims()
    }

    fn __getitem__(&self, idx: (usize, usize, usize)) -> PyResult<f64> {
        index(self.0.shape(), idx)?;
        Ok(self.0[idx])
    }

    fn __setitem__(&mut self, idx: (usize, usize, usize), value: f64) -> PyResult<()> {
        index(self.0.shape(), idx)?;
        self.0[idx] = value;
        Ok(())
    }

    fn __matmul__(&self, other: &PyTensor) -> PyResult<PyTensor> {
        tprod(self, other)
    }

    fn __add__(&self, other: &PyTensor) -> PyResult<PyTensor> {
        self.0.add(&other.0).py().map(PyTensor)
    }

    fn __sub__(&self, other: &PyTensor) -> PyResult<PyTensor> {
        self.0.sub(&other.0).py().map(PyTensor)
    }

    fn __mul__(&self, s: f64) -> PyTensor {
        PyTensor(self.0.scale(s))
    }

    fn __eq__(&self, other: &PyTensor) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Tensor{:?}", self.0.dims())
    }

    fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// t-transpose.
    fn t(&self) -> PyTensor {
        PyTensor(tcdlr_core::ttranspose(&self.0))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        harness::save_tensor(path, &self.0).py()
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        harness::load_tensor(path).py().map(PyTensor)
    }
}

/// Boolean observation mask.
#[pyclass(name = "Mask", module = "tcdlr", from_py_object)]
#[derive(Clone)]
struct PyMask(Mask3);

#[pymethods]
impl PyMask {
    #[new]
    #[pyo3(signature = (n1, n2, n3, value = false))]
    fn new(n1: usize, n2: usize, n3: usize, value: bool) -> Self {
        PyMask(Mask3::new(Shape::new(n1, n2, n3), value))
    }

    #[getter]
    fn shape(&self) -> (usize, usize, usize) {
        let s = self.0.shape();
        (s.n1, s.n2, s.n3)
    }

    fn count(&self) -> usize {
        self.0.count()
    }

    fn __getitem__(&self, idx: (usize, usize, usize)) -> PyResult<bool> {
        index(self.0.shape(), idx)?;
        Ok(self.0.get(idx.0, idx.1, idx.2))
    }

    fn __setitem__(&mut self, idx: (usize, usize, usize), value: bool) -> PyResult<()> {
        index(self.0.shape(), idx)?;
        self.0.set(idx.0, idx.1, idx.2, value);
        Ok(())
    }

    fn save(&self, path: &str) -> PyResult<()> {
        harness::save_mask(path, &self.0).py()
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        harness::load_mask(path).py().map(PyMask)
    }
}

#[pyfunction]
fn tprod(a: &PyTensor, b: &PyTensor) -> PyResult<PyTensor> {
    tcdlr_core::tprod(&a.0, &b.0).py().map(PyTensor)
}

/// Returns `(U, S, V)` with `A = U * S * V^T`.
#[pyfunction]
fn tsvd(a: &PyTensor) -> PyResult<(PyTensor, PyTensor, PyTensor)> {
    let t = tcdlr_core::tsvd(&a.0).py()?;
    Ok((PyTensor(t.u), PyTensor(t.s), PyTensor(t.v)))
}

#[pyfunction]
#[pyo3(signature = (a, tol = DEFAULT_RANK_TOL))]
fn tubal_rank(a: &PyTensor, tol: f64) -> PyResult<usize> {
    tcdlr_core::tubal_rank(&a.0, tol).py()
}

#[pyfunction]
fn tnn(a: &PyTensor) -> f64 {
    tcdlr_core::tnn(&a.0)
}

/// Scalar prox `argmin_x τ g(x) + (x − σ)²/2` over `x ≥ 0`.
#[pyfunction]
#[pyo3(signature = (sigma, tau, surrogate = "lp", p = 0.8, gamma = 1.0))]
fn prox(sigma: f64, tau: f64, surrogate: &str, p: f64, gamma: f64) -> PyResult<f64> {
    self::surrogate(surrogate, p, gamma)?.prox(sigma, tau).py()
}

#[pyfunction]
#[pyo3(signature = (y, tau, surrogate = "lp", p = 0.8, gamma = 1.0))]
fn gtsvt(y: &PyTensor, tau: f64, surrogate: &str, p: f64, gamma: f64) -> PyResult<PyTensor> {
    let g = self::surrogate(surrogate, p, gamma)?;
    tcdlr_core::gtsvt_full(&y.0, tau, &g).py().map(PyTensor)
}

/// Random tensor of tubal rank `rank` built from Gaussian factors.
#[pyfunction]
#[pyo3(signature = (n1, n2, n3, rank, seed = 0))]
fn synth(n1: usize, n2: usize, n3: usize, rank: usize, seed: u64) -> PyResult<PyTensor> {
    let spec = SynthSpec {
        n1,
        n2,
        n3,
        rank,
        sample_rate: 1.0,
        seed,
    };
    harness::gen_synthetic(&spec).py().map(PyTensor)
}

/// Uniform sampling; returns the projected tensor and its mask.
#[pyfunction]
#[pyo3(signature = (m, rate, seed = 0))]
fn sample(m: &PyTensor, rate: f64, seed: u64) -> PyResult<(PyTensor, PyMask)> {
    let obs = harness::sample_uniform(&m.0, rate, seed).py()?;
    Ok((PyTensor(obs.data().clone()), PyMask(obs.mask().clone())))
}

/// Result of a completion run.
#[pyclass(name = "Report", module = "tcdlr", get_all)]
struct PyReport {
    recovered: PyTensor,
    iterations: usize,
    converged: bool,
    ranks: Vec<usize>,
    seconds: f64,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report(iterations={}, converged={}, ranks={:?}, seconds={:.3})",
            self.iterations, self.converged, self.ranks, self.seconds
        )
    }
}

/// Completes `data` observed on `mask`. Estimates per-slice ranks unless
/// `fixed_rank` is set, in which case `k_init` is used throughout.
#[pyfunction]
#[pyo3(signature = (
    data, mask, surrogate = "lp", p = 0.8, gamma = 1.0, k_init = None, k_min = 25,
    k_max = None, fixed_rank = false, rho = 1.3, mu0 = 1e-4, mu_max = 1e14, eps = 1e-9,
    max_iters = 300, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    data: &PyTensor,
    mask: &PyMask,
    surrogate: &str,
    p: f64,
    gamma: f64,
    k_init: Option<usize>,
    k_min: usize,
    k_max: Option<usize>,
    fixed_rank: bool,
    rho: f64,
    mu0: f64,
    mu_max: f64,
    eps: f64,
    max_iters: usize,
    seed: u64,
) -> PyResult<PyReport> {
    let base = SolverConfig::default();
    let cfg = SolverConfig {
        surrogate: self::surrogate(surrogate, p, gamma)?,
        rho,
        mu0,
        mu_max,
        eps,
        max_iters,
        k_init: k_init.map_or(base.k_init.clone(), RankInit::Uniform),
        k_min,
        k_max,
        fixed_rank,
        seed,
        ..base
    };
    let obs = Observation::from_full(&data.0, mask.0.clone()).py()?;
    let rep = py.detach(|| tcdlr_core::solve(&obs, &cfg)).py()?;
    Ok(PyReport {
        ranks: rep.final_ranks().to_vec(),
        iterations: rep.iterations,
        converged: rep.converged(),
        seconds: rep.elapsed.as_secs_f64(),
        recovered: PyTensor(rep.recovered),
    })
}

#[pyfunction]
fn relerr(xhat: &PyTensor, m: &PyTensor) -> PyResult<f64> {
    harness::relerr(&xhat.0, &m.0).py()
}

#[pyfunction]
fn psnr(xhat: &PyTensor, m: &PyTensor) -> PyResult<f64> {
    harness::psnr(&xhat.0, &m.0).py()
}

#[pyfunction]
fn metrics(xhat: &PyTensor, m: &PyTensor) -> PyResult<String> {
    harness::Metrics::evaluate(&xhat.0, &m.0, Duration::ZERO, 0)
        .py()
        .map(|x| x.to_string())
}

#[pyfunction]
fn load_png(path: &str) -> PyResult<PyTensor> {
    harness::load_png(path).py().map(PyTensor)
}

#[pyfunction]
fn save_png(path: &str, t: &PyTensor) -> PyResult<()> {
    harness::save_png(path, &t.0).py()
}

#[pymodule]
pub fn tcdlr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensor>()?;
    m.add_class::<PyMask>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(tprod, m)?)?;
    m.add_function(wrap_pyfunction!(tsvd, m)?)?;
    m.add_function(wrap_pyfunction!(tubal_rank, m)?)?;
    m.add_function(wrap_pyfunction!(tnn, m)?)?;
    m.add_function(wrap_pyfunction!(prox, m)?)?;
    m.add_function(wrap_pyfunction!(gtsvt, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(relerr, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(load_png, m)?)?;
    m.add_function(wrap_pyfunction!(save_png, m)?)?;
    Ok(())
}
