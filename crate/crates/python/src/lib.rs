//! Python bindings for `reldrift`.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyFileNotFoundError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use reldrift::{
    BaselineProfile, CsvOptions, DataTable, DiscoveryParams, DriftReport, SweepConfig, SweepResult,
    UnfairRoles,
};

create_exception!(pyreldrift, ReldriftError, PyValueError);

fn to_py(e: reldrift::Error) -> PyErr {
    match e {
        reldrift::Error::FileNotFound(p) => PyFileNotFoundError::new_err(p.display().to_string()),
        reldrift::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => ReldriftError::new_err(other.to_string()),
    }
}

fn params(k: usize, l: u32, r2_threshold: f64) -> DiscoveryParams {
    DiscoveryParams { k, l, r2_threshold }
}

#[pyclass(name = "DataTable", module = "pyreldrift", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataTable {
    inner: DataTable,
}

#[pymethods]
impl PyDataTable {
    #[new]
    fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> PyResult<Self> {
        DataTable::new(names, columns)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    fn column(&self, name: &str) -> PyResult<Vec<f64>> {
        self.inner.column_by_name(name).map(<[f64]>::to_vec).map_err(to_py)
    }

    fn with_column(&self, name: &str, values: Vec<f64>) -> PyResult<Self> {
        self.inner
            .with_column(name, values)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (n, c) in self.inner.names().iter().zip(self.inner.columns()) {
            d.set_item(n, c.clone())?;
        }
        Ok(d)
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_csv(&path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "DataTable({} rows, columns={:?})",
            self.inner.n_rows(),
            self.inner.names()
        )
    }
}

#[pyclass(name = "Profile", module = "pyreldrift", frozen, skip_from_py_object)]
struct PyProfile {
    inner: BaselineProfile,
}

#[pymethods]
impl PyProfile {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        reldrift::load_profile(&path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        BaselineProfile::from_json(text)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        reldrift::save_profile(&self.inner, &path).map_err(to_py)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[getter]
    fn n_strong(&self) -> usize {
        self.inner.relations.strong.len()
    }

    #[getter]
    fn n_weak(&self) -> usize {
        self.inner.relations.weak.len()
    }

    /// One dict per relation: target, features, strong, r2, beta, formula.
    fn relations<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .relations
            .iter()
            .zip(&self.inner.baseline_bic)
            .map(|((rel, strong), bic)| {
                let d = PyDict::new(py);
                d.set_item("target", &rel.target)?;
                d.set_item("features", rel.features.clone())?;
                d.set_item("strong", strong)?;
                d.set_item("r2", rel.fit.r2)?;
                d.set_item("beta", rel.fit.beta.clone())?;
                d.set_item("sigma2", rel.fit.sigma2)?;
                d.set_item("bic_baseline", *bic)?;
                d.set_item("formula", rel.formula())?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile({} strong, {} weak)",
            self.inner.relations.strong.len(),
            self.inner.relations.weak.len()
        )
    }
}

#[pyclass(name = "DriftReport", module = "pyreldrift", frozen, skip_from_py_object)]
struct PyDriftReport {
    inner: DriftReport,
}

#[pymethods]
impl PyDriftReport {
    #[getter]
    fn any_strong_drift(&self) -> bool {
        self.inner.any_strong_drift
    }

    #[getter]
    fn skipped(&self) -> Vec<String> {
        self.inner.skipped.clone()
    }

    fn findings<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .findings
            .iter()
            .map(|f| {
                let d = PyDict::new(py);
                d.set_item("target", &f.target)?;
                d.set_item("features", f.features.clone())?;
                d.set_item("strong", f.strong)?;
                d.set_item("r2_baseline", f.r2_baseline)?;
                d.set_item("bic_baseline", f.bic_baseline)?;
                d.set_item("bic_field", f.bic_field)?;
                d.set_item("two_ln_bf", f.two_ln_bf)?;
                d.set_item("bf", f.bf)?;
                d.set_item("grade", format!("{:?}", f.grade))?;
                d.set_item("decision", format!("{:?}", f.decision))?;
                Ok(d)
            })
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv().map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py)
    }
}

#[pyclass(name = "SweepResult", module = "pyreldrift", frozen, skip_from_py_object)]
struct PySweepResult {
    inner: SweepResult,
}

#[pymethods]
impl PySweepResult {
    /// `(param, median 2 ln BF)` pairs for one target.
    fn series(&self, target: &str) -> Vec<(f64, f64)> {
        self.inner.series(target)
    }

    /// Spearman correlation of the median series against the parameter, per target.
    fn monotonicity(&self) -> Vec<(String, Option<f64>)> {
        self.inner.monotonicity()
    }

    fn per_seed_csv(&self) -> PyResult<String> {
        self.inner.per_seed_csv().map_err(to_py)
    }

    fn aggregated_csv(&self) -> PyResult<String> {
        self.inner.aggregated_csv().map_err(to_py)
    }

    fn correlations_csv(&self) -> PyResult<String> {
        self.inner.correlations_csv().map_err(to_py)
    }

    fn write_csvs(&self, out_dir: PathBuf) -> PyResult<()> {
        self.inner.write_csvs(&out_dir).map_err(to_py)
    }
}

#[pyfunction]
#[pyo3(signature = (path, drop_incomplete = false, columns = None))]
fn load_csv(path: PathBuf, drop_incomplete: bool, columns: Option<Vec<String>>) -> PyResult<PyDataTable> {
    let opts = CsvOptions {
        drop_incomplete_rows: drop_incomplete,
        select_columns: columns,
    };
    reldrift::load_csv(&path, &opts)
        .map(|inner| PyDataTable { inner })
        .map_err(to_py)
}

#[pyfunction]
fn split_rows(table: &PyDataTable, fraction: f64, seed: u64) -> PyResult<(PyDataTable, PyDataTable)> {
    let s = reldrift::split_rows(&table.inner, fraction, seed).map_err(to_py)?;
    Ok((PyDataTable { inner: s.baseline }, PyDataTable { inner: s.field }))
}

#[pyfunction]
#[pyo3(signature = (table, k = 2, l = 2, r2_threshold = 0.9, created_at = None))]
fn build_profile(
    table: &PyDataTable,
    k: usize,
    l: u32,
    r2_threshold: f64,
    created_at: Option<String>,
) -> PyResult<PyProfile> {
    reldrift::build_profile(&table.inner, params(k, l, r2_threshold), created_at)
        .map(|inner| PyProfile { inner })
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (profile, table, threshold = reldrift::DEFAULT_THRESHOLD_2LNBF))]
fn score_drift(profile: &PyProfile, table: &PyDataTable, threshold: f64) -> PyResult<PyDriftReport> {
    reldrift::score_drift(&profile.inner, &table.inner, threshold)
        .map(|inner| PyDriftReport { inner })
        .map_err(to_py)
}

/// Least squares on a row-major design; returns beta, sigma2, r2, dim, n_train.
#[pyfunction]
fn fit_ols<'py>(py: Python<'py>, design: Vec<Vec<f64>>, target: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let n = design.len();
    let p = design.first().map_or(0, Vec::len);
    if design.iter().any(|r| r.len() != p) {
        return Err(ReldriftError::new_err("design rows have unequal lengths"));
    }
    let x = nalgebra::DMatrix::from_fn(n, p, |i, j| design[i][j]);
    let fit = reldrift::fit_ols(&x, &target).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("beta", fit.beta)?;
    d.set_item("sigma2", fit.sigma2)?;
    d.set_item("r2", fit.r2)?;
    d.set_item("dim", fit.dim)?;
    d.set_item("n_train", fit.n_train)?;
    Ok(d)
}

/// Returns `(bf, two_ln_bf)` for BIC values of the two models.
#[pyfunction]
fn bayes_factor(bic_1: f64, bic_2: f64) -> (f64, f64) {
    let b = reldrift::bayes_factor(bic_1, bic_2);
    (b.bf, b.two_ln_bf)
}

#[pyfunction]
fn enumerate_terms(k: usize, l: u32) -> Vec<Vec<u32>> {
    reldrift::enumerate_terms(k, l).into_iter().map(|t| t.0).collect()
}

#[pyfunction]
fn permute_rows(table: &PyDataTable, r: f64, seed: u64) -> PyResult<PyDataTable> {
    reldrift::permute_rows(&table.inner, r, seed)
        .map(|inner| PyDataTable { inner })
        .map_err(to_py)
}

#[pyfunction]
fn gen_unfair_target(
    table: &PyDataTable,
    target: String,
    relevant: Vec<String>,
    sensitive: Vec<String>,
    u: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let roles = UnfairRoles {
        target,
        relevant,
        sensitive,
    };
    reldrift::gen_unfair_target(&table.inner, &roles, u, seed).map_err(to_py)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (table, r_values, seeds, k = 2, l = 2, r2_threshold = 0.9, threshold = reldrift::DEFAULT_THRESHOLD_2LNBF))]
fn permutation_sweep(
    py: Python<'_>,
    table: &PyDataTable,
    r_values: Vec<f64>,
    seeds: Vec<u64>,
    k: usize,
    l: u32,
    r2_threshold: f64,
    threshold: f64,
) -> PyResult<PySweepResult> {
    let config = SweepConfig {
        params: params(k, l, r2_threshold),
        threshold_2lnbf: threshold,
    };
    py.detach(|| reldrift::run_permutation_sweep(&table.inner, config, &r_values, &seeds))
        .map(|inner| PySweepResult { inner })
        .map_err(to_py)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (table, target, relevant, sensitive, u_values, seeds, k = 2, l = 2, r2_threshold = 0.9, threshold = reldrift::DEFAULT_THRESHOLD_2LNBF))]
fn unfairness_sweep(
    py: Python<'_>,
    table: &PyDataTable,
    target: String,
    relevant: Vec<String>,
    sensitive: Vec<String>,
    u_values: Vec<f64>,
    seeds: Vec<u64>,
    k: usize,
    l: u32,
    r2_threshold: f64,
    threshold: f64,
) -> PyResult<PySweepResult> {
    let roles = UnfairRoles {
        target,
        relevant,
        sensitive,
    };
    let config = SweepConfig {
        params: params(k, l, r2_threshold),
        threshold_2lnbf: threshold,
    };
    py.detach(|| reldrift::run_unfairness_sweep(&table.inner, &roles, config, &u_values, &seeds))
        .map(|inner| PySweepResult { inner })
        .map_err(to_py)
}

#[pyfunction]
fn planted_relation(n: usize, seed: u64) -> PyDataTable {
    PyDataTable {
        inner: reldrift::synthetic::planted_relation(n, seed),
    }
}

#[pyfunction]
fn loan_like(n: usize, seed: u64) -> PyDataTable {
    PyDataTable {
        inner: reldrift::synthetic::loan_like(n, seed),
    }
}

#[pymodule]
fn pyreldrift(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ReldriftError", m.py().get_type::<ReldriftError>())?;
    m.add("DEFAULT_THRESHOLD_2LNBF", reldrift::DEFAULT_THRESHOLD_2LNBF)?;
    m.add_class::<PyDataTable>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PyDriftReport>()?;
    m.add_class::<PySweepResult>()?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(split_rows, m)?)?;
    m.add_function(wrap_pyfunction!(build_profile, m)?)?;
    m.add_function(wrap_pyfunction!(score_drift, m)?)?;
    m.add_function(wrap_pyfunction!(fit_ols, m)?)?;
    m.add_function(wrap_pyfunction!(bayes_factor, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_terms, m)?)?;
    m.add_function(wrap_pyfunction!(permute_rows, m)?)?;
    m.add_function(wrap_pyfunction!(gen_unfair_target, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(unfairness_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(planted_relation, m)?)?;
    m.add_function(wrap_pyfunction!(loan_like, m)?)?;
    Ok(())
}
