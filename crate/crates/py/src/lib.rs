//! Python bindings for the muxcomm multiplex analysis library.
//!
//! Matrices cross the boundary as `list[list[float]]` with `float('inf')`
//! for unreachable path lengths. Vertices and layers use the original
//! integer labels from the dataset wherever a result names an edge;
//! matrix-shaped results are in compact 0-based index order (see
//! `MultiplexTensor.vertex_labels`).

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use muxcomm::dense::DenseMatrix;
use muxcomm::multiplex as mx;
use muxcomm::ranking as rk;
use muxcomm::spectral;
use muxcomm::tropical as tp;
use muxcomm::{communicability as cm, oracle};

fn to_py_err(e: muxcomm::Error) -> PyErr {
    match &e {
        muxcomm::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        muxcomm::Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix_to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> PyResult<DenseMatrix> {
    let r = rows.len();
    if r == 0 {
        return Err(PyValueError::new_err("matrix must be nonempty"));
    }
    let c = rows[0].len();
    let mut data = Vec::with_capacity(r * c);
    for row in rows {
        if row.len() != c {
            return Err(PyValueError::new_err("ragged matrix rows"));
        }
        data.extend_from_slice(row);
    }
    Ok(DenseMatrix::from_vec(r, c, data))
}

fn parse_directedness(undirected: bool) -> mx::Directedness {
    if undirected {
        mx::Directedness::Undirected
    } else {
        mx::Directedness::Directed
    }
}

fn parse_kmax(kmax: Option<usize>) -> tp::KMax {
    match kmax {
        Some(k) => tp::KMax::At(k),
        None => tp::KMax::Full,
    }
}

/// Third-order adjacency tensor of a multiplex network.
#[pyclass(frozen, name = "MultiplexTensor")]
struct PyMultiplexTensor {
    inner: mx::MultiplexTensor,
}

#[pymethods]
impl PyMultiplexTensor {
    /// Load an edge list. format: "multiplex" (layer src dst [w]) or
    /// "single" (src dst [w]).
    #[staticmethod]
    #[pyo3(signature = (path, format = "multiplex", undirected = false))]
    fn load(path: &str, format: &str, undirected: bool) -> PyResult<Self> {
        let fmt = match format {
            "multiplex" => mx::EdgeListFormat::Extended,
            "single" => mx::EdgeListFormat::SingleLayer,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown format '{other}', expected 'multiplex' or 'single'"
                )))
            }
        };
        let inner =
            mx::load_multiplex(path, fmt, parse_directedness(undirected)).map_err(to_py_err)?;
        Ok(PyMultiplexTensor { inner })
    }

    /// Build from (layer, src, dst, weight) tuples with integer labels.
    #[staticmethod]
    #[pyo3(signature = (edges, undirected = false))]
    fn from_edges(edges: Vec<(i64, i64, i64, f64)>, undirected: bool) -> PyResult<Self> {
        let inner = mx::MultiplexTensor::from_entries(&edges, parse_directedness(undirected))
            .map_err(to_py_err)?;
        Ok(PyMultiplexTensor { inner })
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.n_vertices()
    }

    #[getter]
    fn n_layers(&self) -> usize {
        self.inner.n_layers()
    }

    #[getter]
    fn n_entries(&self) -> usize {
        self.inner.n_entries()
    }

    #[getter]
    fn undirected(&self) -> bool {
        self.inner.is_undirected()
    }

    /// Original vertex labels in compact index order.
    #[getter]
    fn vertex_labels(&self) -> Vec<i64> {
        (0..self.inner.n_vertices())
            .map(|i| self.inner.vertex_label(i))
            .collect()
    }

    #[getter]
    fn layer_labels(&self) -> Vec<i64> {
        (0..self.inner.n_layers())
            .map(|i| self.inner.layer_label(i))
            .collect()
    }

    /// Stored entries as (layer, src, dst, weight) with original labels.
    fn entries(&self) -> Vec<(i64, i64, i64, f64)> {
        self.inner.labeled_entries()
    }

    /// Entrywise sum over layers, compact index order.
    fn aggregate(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&mx::aggregate(&self.inner))
    }

    /// New tensor with (layer, src, dst) targets updated; mode "add" or
    /// "scale". Undirected tensors get the symmetric update.
    fn apply_perturbation(
        &self,
        targets: Vec<(i64, i64, i64)>,
        mode: &str,
        amount: f64,
    ) -> PyResult<Self> {
        let mode = match mode {
            "add" => rk::PerturbMode::AddAbsolute(amount),
            "scale" => rk::PerturbMode::Scale(amount),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown mode '{other}', expected 'add' or 'scale'"
                )))
            }
        };
        let targets: Vec<rk::EdgeTarget> = targets
            .into_iter()
            .map(|(layer, src, dst)| rk::EdgeTarget { layer, src, dst })
            .collect();
        let inner = rk::apply_perturbation(&self.inner, &targets, mode).map_err(to_py_err)?;
        Ok(PyMultiplexTensor { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "MultiplexTensor(n_vertices={}, n_layers={}, n_entries={}, undirected={})",
            self.inner.n_vertices(),
            self.inner.n_layers(),
            self.inner.n_entries(),
            self.inner.is_undirected()
        )
    }
}

/// Supra-adjacency matrix B(γ).
#[pyclass(frozen, name = "SupraAdjacency")]
struct PySupraAdjacency {
    inner: mx::SupraAdjacency,
}

#[pymethods]
impl PySupraAdjacency {
    #[staticmethod]
    fn build(tensor: &PyMultiplexTensor, gamma: f64) -> PyResult<Self> {
        let g = mx::CouplingParameter::new(gamma).map_err(to_py_err)?;
        Ok(PySupraAdjacency {
            inner: mx::build_supra(&tensor.inner, &g),
        })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.inner.to_dense())
    }

    /// Perron root and vectors by two-sided power iteration.
    #[pyo3(signature = (tol = 1e-12, max_iter = 100_000))]
    fn perron(&self, tol: f64, max_iter: usize) -> PyResult<PyPerronTriple> {
        let triple = spectral::perron(&self.inner, tol, max_iter).map_err(to_py_err)?;
        Ok(PyPerronTriple { inner: triple })
    }

    /// 1ᵀ exp₀(B) 1, dense below 1000 rows, Krylov above.
    #[pyo3(signature = (tol = None))]
    fn total_communicability(&self, tol: Option<f64>) -> PyResult<f64> {
        cm::total_communicability(&self.inner, tol).map_err(to_py_err)
    }

    /// ln of the total communicability; finite where the linear value
    /// overflows.
    #[pyo3(signature = (tol = None))]
    fn total_communicability_ln(&self, tol: Option<f64>) -> PyResult<f64> {
        cm::total_communicability_ln(&self.inner, tol).map_err(to_py_err)
    }

    /// Full communicability report as a dict (tc, Pc, structured variant,
    /// condition numbers, bounds, log forms).
    #[pyo3(signature = (tol = None))]
    fn communicability_report<'py>(
        &self,
        py: Python<'py>,
        tol: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let triple = spectral::perron(
            &self.inner,
            spectral::DEFAULT_TOL,
            spectral::DEFAULT_MAX_ITER,
        )
        .map_err(to_py_err)?;
        let pattern = self.inner.intra_layer_pattern();
        let rep =
            cm::communicability_report(&self.inner, &pattern, &triple, tol).map_err(to_py_err)?;
        let d = PyDict::new(py);
        d.set_item("size", rep.size)?;
        d.set_item("tc", rep.tc)?;
        d.set_item("pc", rep.pc)?;
        d.set_item("pc_struct", rep.pc_struct)?;
        d.set_item("rho", rep.rho)?;
        d.set_item("kappa", rep.kappa)?;
        d.set_item("kappa_struct", rep.kappa_struct)?;
        d.set_item("bound_lo", rep.bound_lo)?;
        d.set_item("bound_hi", rep.bound_hi)?;
        d.set_item("bound_hi_struct", rep.bound_hi_struct)?;
        d.set_item("approx_ratio", rep.approx_ratio)?;
        d.set_item("ln_tc", rep.ln_tc)?;
        d.set_item("ln_pc", rep.ln_pc)?;
        d.set_item("ln_pc_struct", rep.ln_pc_struct)?;
        d.set_item("violations", rep.violations.clone())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "SupraAdjacency(size={}, gamma={})",
            self.inner.size(),
            self.inner.gamma()
        )
    }
}

/// Shortest lengths over paths with at most K intra-layer edges.
#[pyclass(frozen, name = "PathLengthMatrix")]
struct PyPathLengthMatrix {
    inner: tp::PathLengthMatrix,
}

#[pymethods]
impl PyPathLengthMatrix {
    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    /// Smallest K whose lengths equal the stabilized ones, if known.
    #[getter]
    fn stabilized_at(&self) -> Option<usize> {
        self.inner.stabilized_at()
    }

    /// Length matrix in compact index order; unreachable pairs are inf.
    fn lengths(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.inner.lengths_dense())
    }

    /// Last-edge layers (0-based) of the known shortest paths i -> j.
    fn last_layers(&self, i: usize, j: usize) -> Vec<usize> {
        self.inner.last_layers(i, j)
    }

    fn __repr__(&self) -> String {
        format!(
            "PathLengthMatrix(k={}, n={}, gamma={})",
            self.inner.k(),
            self.inner.n(),
            self.inner.gamma()
        )
    }
}

/// Entrywise reciprocals of a path-length matrix.
#[pyclass(frozen, name = "EfficiencyMatrix")]
struct PyEfficiencyMatrix {
    inner: muxcomm::efficiency::EfficiencyMatrix,
}

#[pymethods]
impl PyEfficiencyMatrix {
    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(self.inner.matrix())
    }

    /// Perron root and vectors of the efficiency matrix.
    #[pyo3(signature = (tol = 1e-12, max_iter = 100_000))]
    fn perron(&self, tol: f64, max_iter: usize) -> PyResult<PyPerronTriple> {
        let triple = spectral::perron(self.inner.matrix(), tol, max_iter).map_err(to_py_err)?;
        Ok(PyPerronTriple { inner: triple })
    }
}

/// Perron root with unit right/left Perron vectors.
#[pyclass(frozen, name = "PerronTriple")]
struct PyPerronTriple {
    inner: spectral::PerronTriple,
}

#[pymethods]
impl PyPerronTriple {
    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x.clone()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.clone()
    }

    #[getter]
    fn residual_right(&self) -> f64 {
        self.inner.residual_right
    }

    #[getter]
    fn residual_left(&self) -> f64 {
        self.inner.residual_left
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn irreducible(&self) -> bool {
        self.inner.irreducible
    }

    /// κ(ρ) = 1 / yᵀx.
    fn condition_number(&self) -> PyResult<f64> {
        spectral::condition_number(&self.inner).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "PerronTriple(rho={}, iterations={}, residuals=({:.3e}, {:.3e}))",
            self.inner.rho,
            self.inner.iterations,
            self.inner.residual_right,
            self.inner.residual_left
        )
    }
}

/// Multiplex K-path length matrix (kmax=None runs to the N−1 bound with
/// early stop at the fixed point).
#[pyfunction]
#[pyo3(signature = (tensor, gamma, kmax = None))]
fn path_length_matrix(
    tensor: &PyMultiplexTensor,
    gamma: f64,
    kmax: Option<usize>,
) -> PyResult<PyPathLengthMatrix> {
    let g = mx::CouplingParameter::new(gamma).map_err(to_py_err)?;
    let inner = tp::path_length_matrix(&tensor.inner, &g, parse_kmax(kmax)).map_err(to_py_err)?;
    Ok(PyPathLengthMatrix { inner })
}

#[pyfunction]
fn efficiency_matrix(p: &PyPathLengthMatrix) -> PyEfficiencyMatrix {
    PyEfficiencyMatrix {
        inner: muxcomm::efficiency::efficiency_matrix(&p.inner),
    }
}

/// Normalized sum of reciprocal path lengths.
#[pyfunction]
fn global_k_efficiency(q: &PyEfficiencyMatrix) -> PyResult<f64> {
    muxcomm::efficiency::global_k_efficiency(&q.inner).map_err(to_py_err)
}

/// (h_in, h_out): column and row sums of the efficiency matrix.
#[pyfunction]
fn harmonic_centralities(q: &PyEfficiencyMatrix) -> (Vec<f64>, Vec<f64>) {
    muxcomm::efficiency::harmonic_centralities(&q.inner)
}

/// Min-plus matrix product with inf absorbing under +.
#[pyfunction]
fn minplus_multiply(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let a = rows_to_matrix(&a)?;
    let b = rows_to_matrix(&b)?;
    let c = tp::minplus_multiply(&a, &b).map_err(to_py_err)?;
    Ok(matrix_to_rows(&c))
}

/// Perron triple of an arbitrary nonnegative square matrix.
#[pyfunction]
#[pyo3(signature = (matrix, tol = 1e-12, max_iter = 100_000))]
fn perron(matrix: Vec<Vec<f64>>, tol: f64, max_iter: usize) -> PyResult<PyPerronTriple> {
    let m = rows_to_matrix(&matrix)?;
    let triple = spectral::perron(&m, tol, max_iter).map_err(to_py_err)?;
    Ok(PyPerronTriple { inner: triple })
}

/// Pc = exp₀(ρ) ||x||₁ ||y||₁.
#[pyfunction]
fn perron_communicability(t: &PyPerronTriple) -> f64 {
    cm::perron_communicability(&t.inner)
}

/// Exact minimum walk cost over (vertex, layer) states; small instances
/// only.
#[pyfunction]
fn exact_k_path_lengths(
    tensor: &PyMultiplexTensor,
    gamma: f64,
    k: usize,
) -> PyResult<Vec<Vec<f64>>> {
    let g = mx::CouplingParameter::new(gamma).map_err(to_py_err)?;
    let m = oracle::exact_k_path_lengths(&tensor.inner, &g, k).map_err(to_py_err)?;
    Ok(matrix_to_rows(&m))
}

fn recommendations_to_py<'py>(
    py: Python<'py>,
    recs: Vec<rk::EdgeRecommendation>,
) -> PyResult<Bound<'py, PyList>> {
    let out = PyList::empty(py);
    for r in recs {
        let d = PyDict::new(py);
        d.set_item(
            "approach",
            match r.approach {
                rk::Approach::Efficiency => "efficiency",
                rk::Approach::Popularity => "popularity",
            },
        )?;
        d.set_item("vertex_pair", r.vertex_pair)?;
        d.set_item("layers", r.layers.clone())?;
        d.set_item("score", r.score)?;
        d.set_item("rank", r.rank)?;
        d.set_item("selected_by", r.provenance.matrix.clone())?;
        out.append(d)?;
    }
    Ok(out)
}

/// Intra-layer edges whose strengthening most improves the K-efficiency,
/// by Perron sensitivity of P^K_{−1} on the aggregate pattern.
#[pyfunction]
#[pyo3(signature = (tensor, gamma, kmax = None, top = 1))]
fn rank_edges_efficiency<'py>(
    py: Python<'py>,
    tensor: &PyMultiplexTensor,
    gamma: f64,
    kmax: Option<usize>,
    top: usize,
) -> PyResult<Bound<'py, PyList>> {
    let g = mx::CouplingParameter::new(gamma).map_err(to_py_err)?;
    let recs =
        rk::rank_edges_efficiency(&tensor.inner, &g, parse_kmax(kmax), top).map_err(to_py_err)?;
    recommendations_to_py(py, recs)
}

/// Intra-layer edges whose strengthening most improves the total
/// communicability, by weighted projected-Wilkinson importance.
#[pyfunction]
#[pyo3(signature = (tensor, gamma, top = 1, weighted = true))]
fn rank_edges_popularity<'py>(
    py: Python<'py>,
    tensor: &PyMultiplexTensor,
    gamma: f64,
    top: usize,
    weighted: bool,
) -> PyResult<Bound<'py, PyList>> {
    let g = mx::CouplingParameter::new(gamma).map_err(to_py_err)?;
    let variant = if weighted {
        rk::ImportanceVariant::Weighted
    } else {
        rk::ImportanceVariant::Unweighted
    };
    let recs =
        rk::rank_edges_popularity_with(&tensor.inner, &g, top, variant).map_err(to_py_err)?;
    recommendations_to_py(py, recs)
}

/// e(γ), tc(γ), ρ(B), ρ(P_{−1}) for both tensors plus deltas.
#[pyfunction]
#[pyo3(signature = (before, after, gamma, kmax = None))]
fn compare_measures<'py>(
    py: Python<'py>,
    before: &PyMultiplexTensor,
    after: &PyMultiplexTensor,
    gamma: f64,
    kmax: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let g = mx::CouplingParameter::new(gamma).map_err(to_py_err)?;
    let cmp = rk::compare_measures(&before.inner, &after.inner, &g, parse_kmax(kmax))
        .map_err(to_py_err)?;
    let side = |py: Python<'py>, m: &rk::Measures| -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("global_efficiency", m.global_efficiency)?;
        d.set_item("total_communicability", m.total_communicability)?;
        d.set_item("rho_supra", m.rho_supra)?;
        d.set_item("rho_efficiency", m.rho_efficiency)?;
        d.set_item("stabilized_at", m.stabilized_at)?;
        Ok(d)
    };
    let out = PyDict::new(py);
    out.set_item("before", side(py, &cmp.before)?)?;
    out.set_item("after", side(py, &cmp.after)?)?;
    let delta = PyDict::new(py);
    delta.set_item("global_efficiency", cmp.delta.global_efficiency)?;
    delta.set_item("total_communicability", cmp.delta.total_communicability)?;
    delta.set_item("rho_supra", cmp.delta.rho_supra)?;
    delta.set_item("rho_efficiency", cmp.delta.rho_efficiency)?;
    out.set_item("delta", delta)?;
    Ok(out)
}

#[pymodule]
fn muxcomm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyMultiplexTensor>()?;
    m.add_class::<PySupraAdjacency>()?;
    m.add_class::<PyPathLengthMatrix>()?;
    m.add_class::<PyEfficiencyMatrix>()?;
    m.add_class::<PyPerronTriple>()?;
    m.add_function(wrap_pyfunction!(path_length_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(global_k_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_centralities, m)?)?;
    m.add_function(wrap_pyfunction!(minplus_multiply, m)?)?;
    m.add_function(wrap_pyfunction!(perron, m)?)?;
    m.add_function(wrap_pyfunction!(perron_communicability, m)?)?;
    m.add_function(wrap_pyfunction!(exact_k_path_lengths, m)?)?;
    m.add_function(wrap_pyfunction!(rank_edges_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(rank_edges_popularity, m)?)?;
    m.add_function(wrap_pyfunction!(compare_measures, m)?)?;
    Ok(())
}
