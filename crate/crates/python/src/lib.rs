//! Python bindings: hulls, configurations, coefficient schemes, finite
//! sections and their spectra, and the scenario runner.

use std::path::PathBuf;
use std::sync::Arc;

use hullspec::dynamics::{self, catalog, SubshiftSpec};
use hullspec::experiment::{self, RunOptions};
use hullspec::group::{GroupElement, GroupSpec, Window};
use hullspec::operators::{self, Boundary, CoefficientScheme, FiniteSection};
use hullspec::spectral::{self, GridSpec, SigmaMinSolver};
use hullspec::HullError;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: HullError) -> PyErr {
    match e {
        HullError::Resource(_) | HullError::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn boundary(name: &str) -> PyResult<Boundary> {
    match name {
        "truncate" => Ok(Boundary::Truncate),
        "periodic" => Ok(Boundary::Periodic),
        other => Err(PyValueError::new_err(format!("boundary {other:?}: expected truncate or periodic"))),
    }
}

fn element(group: GroupSpec, coords: &[i64]) -> PyResult<GroupElement> {
    group.element(coords).map_err(err)
}

#[pyclass(frozen, module = "hullspec_py")]
struct Hull {
    inner: SubshiftSpec,
}

#[pymethods]
impl Hull {
    /// A catalog hull: fibonacci, thue_morse, period_q, full_pm1, halfplane_ab.
    #[new]
    #[pyo3(signature = (name, q = 2, rank = 1))]
    fn new(name: &str, q: usize, rank: u8) -> PyResult<Self> {
        Ok(Hull { inner: catalog::by_name(name, q, rank).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn group(&self) -> String {
        self.inner.group().to_string()
    }

    #[getter]
    fn letters(&self) -> Vec<String> {
        self.inner.alphabet().names().to_vec()
    }

    fn reference(&self) -> PyResult<Configuration> {
        Ok(Configuration { inner: self.inner.reference().map_err(err)? })
    }

    fn sample(&self, seed: u64) -> PyResult<Configuration> {
        Ok(Configuration { inner: self.inner.sample(seed).map_err(err)? })
    }

    /// Seeded configuration drawn letter by letter (ignores the hull's rules).
    fn explicit(&self, seed: u64) -> Configuration {
        Configuration {
            inner: dynamics::Configuration::hashed(self.inner.group(), self.inner.alphabet().clone(), seed),
        }
    }

    /// Number of legal patterns on ball(radius).
    fn legal_pattern_count(&self, radius: u32) -> PyResult<usize> {
        let w = Arc::new(Window::ball(self.inner.group(), radius).map_err(err)?);
        Ok(self.inner.legal_patterns(&w).map_err(err)?.len())
    }

    fn certify_minimal<'py>(&self, py: Python<'py>, n: u64, big_n: u64) -> PyResult<Bound<'py, PyAny>> {
        let report = dynamics::certify_minimal(&self.inner, n, big_n).map_err(err)?;
        to_dict(py, &report)
    }

    fn certify_pseudoergodic<'py>(
        &self,
        py: Python<'py>,
        config: &Configuration,
        n: u64,
        radius: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let report = dynamics::certify_pseudoergodic(&config.inner, &self.inner, n, radius).map_err(err)?;
        to_dict(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("Hull({:?} on {})", self.inner.name(), self.inner.group())
    }
}

#[pyclass(frozen, module = "hullspec_py")]
struct Configuration {
    inner: dynamics::Configuration,
}

#[pymethods]
impl Configuration {
    #[getter]
    fn id(&self) -> String {
        self.inner.id()
    }

    /// Letter name at the group element with these coordinates.
    fn letter(&self, coords: Vec<i64>) -> PyResult<String> {
        let g = element(self.inner.group(), &coords)?;
        let l = self.inner.evaluate(&g).map_err(err)?;
        Ok(self.inner.alphabet().name(l).to_string())
    }

    fn value(&self, coords: Vec<i64>) -> PyResult<f64> {
        self.inner.value(&element(self.inner.group(), &coords)?).map_err(err)
    }

    /// shift(ω, g)(h) = ω(h·g).
    fn shift(&self, coords: Vec<i64>) -> PyResult<Configuration> {
        let g = element(self.inner.group(), &coords)?;
        Ok(Configuration { inner: self.inner.shift(&g).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("Configuration({})", self.inner.id())
    }
}

#[pyclass(frozen, module = "hullspec_py")]
struct Scheme {
    inner: CoefficientScheme,
}

#[pymethods]
impl Scheme {
    /// A catalog scheme over the hull's group and alphabet; `values`
    /// overrides the letter values.
    #[new]
    #[pyo3(signature = (name, hull, values = None, block_dim = 1))]
    fn new(name: &str, hull: &Hull, values: Option<Vec<f64>>, block_dim: usize) -> PyResult<Self> {
        let mut alphabet = hull.inner.alphabet().clone();
        if let Some(v) = values {
            alphabet = Arc::new(alphabet.with_values(v).map_err(err)?);
        }
        let inner = operators::by_name(name, hull.inner.group(), alphabet, block_dim).map_err(err)?;
        Ok(Scheme { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    fn norm_upper_bound(&self) -> f64 {
        self.inner.norm_upper_bound()
    }

    /// Section on the window of `size` sites (an interval on ℤ, a block otherwise).
    #[pyo3(signature = (config, size, boundary = "truncate"))]
    fn section(&self, config: &Configuration, size: u64, boundary: &str) -> PyResult<Section> {
        let b = self::boundary(boundary)?;
        let w = Arc::new(spectral::window_for_size(self.inner.group(), size).map_err(err)?);
        Ok(Section { inner: operators::section(&self.inner, &config.inner, &w, b).map_err(err)? })
    }

    fn ball_section(&self, config: &Configuration, radius: u32) -> PyResult<Section> {
        let w = Arc::new(Window::ball(self.inner.group(), radius).map_err(err)?);
        Ok(Section { inner: operators::section(&self.inner, &config.inner, &w, Boundary::Truncate).map_err(err)? })
    }

    fn verify_equivariance(&self, config: &Configuration, g: Vec<i64>, radius: u32) -> PyResult<bool> {
        let group = self.inner.group();
        let w = Window::ball(group, radius).map_err(err)?;
        self.inner.verify_equivariance(&config.inner, &element(group, &g)?, &w).map_err(err)
    }

    fn floquet_oracle(&self, config: &Configuration, theta_samples: usize) -> PyResult<Vec<Complex64>> {
        Ok(spectral::floquet_oracle(&self.inner, &config.inner, theta_samples).map_err(err)?.points)
    }

    fn __repr__(&self) -> String {
        format!("Scheme({:?})", self.inner.name())
    }
}

#[pyclass(frozen, module = "hullspec_py")]
struct Section {
    inner: FiniteSection,
}

#[pymethods]
impl Section {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Row-major entries.
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = &self.inner.matrix;
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn eigenvalues(&self, py: Python<'_>) -> PyResult<Vec<Complex64>> {
        py.detach(|| spectral::eigenvalues(&self.inner).map(|s| s.points)).map_err(err)
    }

    /// σ_min(zI − M).
    fn sigma_min(&self, z: Complex64) -> PyResult<f64> {
        SigmaMinSolver::new(&self.inner.matrix).and_then(|s| s.at(z)).map_err(err)
    }

    /// σ_min over the grid nodes, row by row in im.
    fn pseudospectrum(
        &self,
        py: Python<'_>,
        re: (f64, f64),
        im: (f64, f64),
        resolution: (usize, usize),
    ) -> PyResult<Vec<f64>> {
        let spec = GridSpec::new(re, im, resolution.0, resolution.1);
        py.detach(|| spectral::section_grid(&self.inner, &spec).map(|g| g.sigma_min)).map_err(err)
    }

    fn to_fsec(&self) -> Vec<u8> {
        self.inner.to_fsec()
    }
}

#[pyfunction]
fn hausdorff_distance(p: Vec<Complex64>, q: Vec<Complex64>) -> PyResult<f64> {
    spectral::hausdorff_distance(&p, &q).map_err(err)
}

/// Runs a scenario; returns (status, exit code, output directory).
#[pyfunction]
#[pyo3(signature = (name, config, out = None, threads = None, svg = false))]
fn run_scenario(
    py: Python<'_>,
    name: &str,
    config: PathBuf,
    out: Option<PathBuf>,
    threads: Option<usize>,
    svg: bool,
) -> PyResult<(String, i32, String)> {
    let opts = RunOptions { out_dir: out, threads, svg, tolerances: None };
    let outcome = py.detach(|| experiment::run_file(name, &config, &opts)).map_err(err)?;
    let status = format!("{:?}", outcome.status).to_lowercase();
    Ok((status, outcome.exit_code(), outcome.out_dir.display().to_string()))
}

#[pymodule]
fn hullspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Hull>()?;
    m.add_class::<Configuration>()?;
    m.add_class::<Scheme>()?;
    m.add_class::<Section>()?;
    m.add_function(wrap_pyfunction!(hausdorff_distance, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add("SCENARIOS", experiment::SCENARIOS.to_vec())?;
    Ok(())
}
