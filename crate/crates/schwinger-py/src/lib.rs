//! Python bindings. Results come back as plain dicts and lists, built from
//! the serde form of the Rust types.
#![allow(non_snake_case)]

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use schwinger::bounds::{
    correlation_matrix, entanglement_spectrum, fcs_distribution, ground_bound, resource_estimate, DiracParams,
    ResourceConstants, ResourceMode,
};
use schwinger::cli::selftest::run_selftest;
use schwinger::dynamics::{run_quench, EvolutionSpec, QuenchScenario};
use schwinger::interface::{encode_path, verify_equivalence};
use schwinger::lattice::{
    bits_to_occupations, build_hamiltonian, enumerate_basis, lowest_levels, measure, Gauge, GaugeConfig,
    LatticeParams, Observable,
};
use schwinger::linalg::LanczosOptions;
use serde::Serialize;

fn err(e: schwinger::Error) -> PyErr {
    match e {
        schwinger::Error::Validation(m) => PyValueError::new_err(m),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_gauge(gauge: &str) -> PyResult<Gauge> {
    match gauge {
        "complex" => Ok(Gauge::Complex),
        "real" => Ok(Gauge::Real),
        _ => Err(PyValueError::new_err(format!("unknown gauge {gauge:?}, expected 'complex' or 'real'"))),
    }
}

/// Staggered lattice in the Gauss-law sector with field cutoff `W`.
#[pyclass(frozen)]
struct Lattice {
    params: LatticeParams,
}

#[pymethods]
impl Lattice {
    #[new]
    #[pyo3(signature = (L, W, am, aq = 1.0, theta = 0.0))]
    fn new(L: usize, W: u32, am: f64, aq: f64, theta: f64) -> PyResult<Self> {
        let params = LatticeParams::dimensionless(L, W, am, aq, theta);
        params.validate().map_err(err)?;
        Ok(Lattice { params })
    }

    #[getter]
    fn L(&self) -> usize {
        self.params.size
    }
    #[getter]
    fn W(&self) -> u32 {
        self.params.cutoff
    }

    fn dimension(&self) -> PyResult<usize> {
        Ok(enumerate_basis(&self.params).map_err(err)?.len())
    }

    /// Occupation strings of the sector basis, in basis order.
    #[pyo3(signature = (limit = None))]
    fn basis(&self, limit: Option<usize>) -> PyResult<Vec<Vec<u8>>> {
        let b = enumerate_basis(&self.params).map_err(err)?;
        let n = limit.unwrap_or(b.len()).min(b.len());
        Ok((0..n).map(|i| bits_to_occupations(b.bits(i), self.params.sites())).collect())
    }

    /// Lowest levels and the ground-state field profile.
    #[pyo3(signature = (levels = 1, gauge = "complex", tol = 1e-10))]
    fn ground_state(&self, py: Python<'_>, levels: usize, gauge: &str, tol: f64) -> PyResult<Py<PyAny>> {
        let b = enumerate_basis(&self.params).map_err(err)?;
        let h = build_hamiltonian(&self.params, &b, parse_gauge(gauge)?).map_err(err)?;
        let opts = LanczosOptions { tol, ..Default::default() };
        let pairs = py.detach(|| lowest_levels(&h, levels, &opts)).map_err(err)?;
        let fields = measure(&pairs.states[0], &b, Observable::FieldProfile).map_err(err)?;
        #[derive(Serialize)]
        struct Out {
            dimension: usize,
            energies: Vec<f64>,
            field_profile: Vec<f64>,
        }
        to_py(py, &Out { dimension: b.len(), energies: pairs.energies, field_profile: fields })
    }

    fn verify_equivalence(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let r = verify_equivalence(&self.params).map_err(err)?;
        to_py(py, &r)
    }

    /// String quench with pair separation `d`; returns the full record.
    #[pyo3(signature = (d, t_final, dt))]
    fn quench(&self, py: Python<'_>, d: usize, t_final: f64, dt: f64) -> PyResult<Py<PyAny>> {
        let rec = py
            .detach(|| run_quench(&QuenchScenario::String { d }, &self.params, &EvolutionSpec::new(t_final, dt)))
            .map_err(err)?;
        to_py(py, &rec)
    }

    fn __repr__(&self) -> String {
        let p = &self.params;
        format!("Lattice(L={}, W={}, am={}, aq={}, theta={})", p.size, p.cutoff, p.am(), p.aq(), p.theta)
    }
}

/// Interface path of an occupation string such as "1010".
#[pyfunction]
fn encode(py: Python<'_>, occupations: &str) -> PyResult<Py<PyAny>> {
    let occ: Vec<u8> = occupations
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(PyValueError::new_err(format!("occupation string may only contain 0 and 1, got {c:?}"))),
        })
        .collect::<PyResult<_>>()?;
    let cfg = GaugeConfig::from_occupations(&occ).map_err(err)?;
    to_py(py, &encode_path(&cfg))
}

/// Half-chain number fluctuations of the free massive chain against the
/// envelope bound, for `W = 0..=w_max`.
#[pyfunction]
#[pyo3(signature = (am, L, w_max = 20))]
fn ground_bounds(py: Python<'_>, am: f64, L: usize, w_max: usize) -> PyResult<Py<PyAny>> {
    let c = correlation_matrix(&DiracParams::new(L, am, 0.0)).map_err(err)?;
    let es = entanglement_spectrum(&c, L).map_err(err)?;
    let fcs = fcs_distribution(&es).map_err(err)?;
    let lambda = es
        .envelope_lambda()
        .ok_or_else(|| PyRuntimeError::new_err("entanglement spectrum has no reliable levels"))?;
    let rows = (0..=w_max).map(|w| ground_bound(&fcs, lambda, w, 2 * L)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    to_py(py, &rows)
}

#[pyfunction]
#[pyo3(signature = (epsilon, mode = "T0"))]
fn resources(py: Python<'_>, epsilon: f64, mode: &str) -> PyResult<Py<PyAny>> {
    let mode = match mode {
        "T0" => ResourceMode::T0,
        "finiteT" => ResourceMode::FiniteT,
        _ => return Err(PyValueError::new_err(format!("unknown mode {mode:?}, expected 'T0' or 'finiteT'"))),
    };
    to_py(py, &resource_estimate(epsilon, mode, &ResourceConstants::default()).map_err(err)?)
}

/// The built-in check table.
#[pyfunction]
fn selftest(py: Python<'_>) -> PyResult<Py<PyAny>> {
    to_py(py, &run_selftest().map_err(err)?)
}

#[pymodule]
pub fn pyschwinger(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lattice>()?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(ground_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(resources, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
