//! Python bindings: parameters and constants, fields, the PDE solver, the
//! particle ensemble, oracles and the command runner.

use fsplab::config::RunConfig;
use fsplab::degiorgi::{ladyzhenskaya_iterate, z_transform};
use fsplab::field::{integrate, support_radius, Grid, Region, ScalarField, SUPPORT_THRESHOLD};
use fsplab::oracle::{sample_heat_kernel, BarenblattSpec};
use fsplab::params::{derive_constants, validate_params};
use fsplab::run::execute;
use fsplab::solver::{solve as solve_pde, SolverConfig, SolverMode};
use fsplab::walkers::{advance, estimate_density, AdvanceOptions, JumpDistribution, JumpLaw, WeightRule};
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Model parameters. Keyword arguments override the defaults.
#[pyclass(name = "ModelParams", module = "fsplab_py")]
#[derive(Clone)]
struct PyParams {
    inner: fsplab::params::ModelParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut p = fsplab::params::ModelParams::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                if key == "dim" {
                    p.dim = v.extract()?;
                    continue;
                }
                let x: f64 = v.extract()?;
                match key.as_str() {
                    "alpha" => p.alpha = x,
                    "beta" => p.beta = x,
                    "k1" => p.k1 = x,
                    "k2" => p.k2 = x,
                    "c1" => p.c1 = x,
                    "theta" => p.theta = x,
                    "p" => p.p = x,
                    "epsilon_reg" => p.epsilon_reg = x,
                    "r0" => p.r0 = x,
                    "r" => p.r = x,
                    "c_cut" => p.c_cut = x,
                    "sobolev_cg" => p.sobolev_cg = x,
                    "poincare_cp" => p.poincare_cp = x,
                    "domain_half_width" => p.domain_half_width = x,
                    other => return Err(PyKeyError::new_err(format!("unknown parameter `{other}`"))),
                }
            }
        }
        Ok(Self { inner: p })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }
    #[getter]
    fn epsilon_reg(&self) -> f64 {
        self.inner.epsilon_reg
    }
    #[getter]
    fn eps0(&self) -> f64 {
        self.inner.eps0()
    }

    /// Violated conditions as strings; empty when everything holds.
    fn validate(&self) -> Vec<String> {
        validate_params(&self.inner).violations.iter().map(ToString::to_string).collect()
    }

    /// Derived constants as a `{name: value}` dict.
    #[pyo3(signature = (n_max = 8, t_horizon = 1.0))]
    fn constants<'py>(&self, py: Python<'py>, n_max: usize, t_horizon: f64) -> PyResult<Bound<'py, PyDict>> {
        let c = derive_constants(&self.inner, n_max, t_horizon).map_err(value_err)?;
        let d = PyDict::new(py);
        for (k, v) in c.rows() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Nodal field on a uniform 1D or 2D grid.
#[pyclass(name = "Field", module = "fsplab_py")]
#[derive(Clone)]
struct PyField {
    inner: ScalarField,
}

#[pymethods]
impl PyField {
    /// Zero field on `[-half_width, half_width]^dim` with spacing `h`.
    #[staticmethod]
    fn centered(dim: usize, half_width: f64, h: f64) -> PyResult<Self> {
        let g = Grid::centered_box(dim, half_width, h).map_err(value_err)?;
        Ok(Self { inner: ScalarField::zeros(g) })
    }

    /// 1D field with nodes `x0 + i h`.
    #[staticmethod]
    fn line(values: Vec<f64>, h: f64, x0: f64) -> PyResult<Self> {
        let g = Grid::line(values.len(), h, x0).map_err(value_err)?;
        Ok(Self { inner: ScalarField::from_values(g, values).map_err(value_err)? })
    }

    /// Same grid, new values (row-major, x fastest).
    fn with_values(&self, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: ScalarField::from_values(self.inner.grid().clone(), values).map_err(value_err)? })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// Node coordinates, `[x]` in 1D and `[x, y]` in 2D.
    fn coords(&self) -> Vec<Vec<f64>> {
        let g = self.inner.grid();
        (0..g.len()).map(|k| g.coords(k)[..g.dim()].to_vec()).collect()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.grid().h()
    }

    fn max(&self) -> f64 {
        self.inner.max()
    }

    fn integral(&self) -> f64 {
        integrate(&self.inner, Region::Full)
    }

    #[pyo3(signature = (threshold = SUPPORT_THRESHOLD))]
    fn support_radius(&self, threshold: f64) -> f64 {
        support_radius(&self.inner, threshold)
    }

    /// `u^((theta+alpha+beta+1)/(beta+2))`.
    fn z_transform(&self, params: &PyParams) -> Self {
        Self { inner: z_transform(&self.inner, &params.inner) }
    }

    fn __len__(&self) -> usize {
        self.inner.grid().len()
    }
}

#[pyclass(name = "Trajectory", module = "fsplab_py")]
struct PyTrajectory {
    inner: fsplab::solver::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.snapshots.iter().map(|s| s.time).collect()
    }

    #[getter]
    fn step_count(&self) -> usize {
        self.inner.step_count
    }

    #[getter]
    fn halted_at(&self) -> Option<f64> {
        self.inner.halted_at
    }

    fn snapshot(&self, k: usize) -> PyResult<PyField> {
        self.inner
            .snapshots
            .get(k)
            .map(|s| PyField { inner: s.field.clone() })
            .ok_or_else(|| PyValueError::new_err(format!("snapshot {k} out of range")))
    }

    fn final_field(&self) -> PyField {
        PyField { inner: self.inner.final_field().clone() }
    }

    /// `(time, radius)` pairs including `t = 0`.
    #[pyo3(signature = (threshold = SUPPORT_THRESHOLD))]
    fn support_radii(&self, threshold: f64) -> Vec<(f64, f64)> {
        self.inner.support_radii(threshold)
    }

    fn mass_history(&self) -> Vec<(f64, f64)> {
        self.inner.mass_history.clone()
    }
}

/// Explicit solve of the degenerate equation (`mode="einstein"`) or the
/// porous medium equation (`mode="pme"`).
#[pyfunction]
#[pyo3(signature = (u0, params, t_end, snapshots = 1, mode = "einstein", pme_m = 2.0, cfl_safety = 0.25))]
fn solve(
    py: Python<'_>,
    u0: &PyField,
    params: &PyParams,
    t_end: f64,
    snapshots: usize,
    mode: &str,
    pme_m: f64,
    cfl_safety: f64,
) -> PyResult<PyTrajectory> {
    let mut cfg = SolverConfig::new(params.inner.clone(), t_end).with_uniform_snapshots(snapshots);
    cfg.mode = match mode {
        "einstein" => SolverMode::EinsteinDegenerate,
        "pme" => SolverMode::PorousMediumValidation,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    cfg.pme_m = pme_m;
    cfg.cfl_safety = cfl_safety;
    let u0 = u0.inner.clone();
    let traj = py
        .allow_threads(|| solve_pde(&u0, &cfg))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(PyTrajectory { inner: traj })
}

/// Weighted particle ensemble driven by the local waiting-time law.
#[pyclass(name = "Ensemble", module = "fsplab_py")]
struct PyEnsemble {
    inner: fsplab::walkers::Ensemble,
}

#[pymethods]
impl PyEnsemble {
    #[staticmethod]
    #[pyo3(signature = (dim, n, x0, mass = 1.0, seed = 0))]
    fn point_source(dim: usize, n: usize, x0: Vec<f64>, mass: f64, seed: u64) -> PyResult<Self> {
        if x0.len() < dim {
            return Err(PyValueError::new_err("x0 needs one coordinate per dimension"));
        }
        Ok(Self { inner: fsplab::walkers::Ensemble::point_source(dim, n, &x0, mass, seed) })
    }

    #[staticmethod]
    #[pyo3(signature = (field, n, seed = 0))]
    fn from_field(field: &PyField, n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: fsplab::walkers::Ensemble::from_field(&field.inner, n, seed).map_err(value_err)? })
    }

    /// Advance to `t_end` using `grid` (a Field) as histogram and domain.
    /// Returns the number of jumps.
    #[pyo3(signature = (params, t_end, grid, tau_ref = 0.01, conserved = false))]
    fn advance(
        &mut self,
        py: Python<'_>,
        params: &PyParams,
        t_end: f64,
        grid: &PyField,
        tau_ref: f64,
        conserved: bool,
    ) -> PyResult<u64> {
        let p = &params.inner;
        let law = JumpLaw::einstein(JumpDistribution::GaussianIsotropic, p, tau_ref, &vec![0.0; p.dim])
            .map_err(value_err)?;
        let mut opts = AdvanceOptions::new(grid.inner.grid().clone(), tau_ref);
        if conserved {
            opts.weight_rule = WeightRule::Conserved;
        }
        let ens = &mut self.inner;
        let rep = py.allow_threads(|| advance(ens, &law, p, t_end, &opts)).map_err(value_err)?;
        Ok(rep.jumps)
    }

    /// Histogram density on the grid of `grid`.
    fn density(&self, grid: &PyField) -> PyField {
        PyField { inner: estimate_density(&self.inner, grid.inner.grid()).field }
    }

    /// Weighted `(mean, variance)` along `axis`.
    #[pyo3(signature = (axis = 0))]
    fn moments(&self, axis: usize) -> (f64, f64) {
        self.inner.moments(axis)
    }

    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    #[getter]
    fn sim_time(&self) -> f64 {
        self.inner.sim_time
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Barenblatt solution of `u_t = Laplacian(u^m)` shifted by `t_offset`.
#[pyclass(name = "Barenblatt", module = "fsplab_py")]
struct PyBarenblatt {
    inner: BarenblattSpec,
}

#[pymethods]
impl PyBarenblatt {
    #[new]
    #[pyo3(signature = (m, dim = 1, constant = 1.0, t_offset = 1.0))]
    fn new(m: f64, dim: usize, constant: f64, t_offset: f64) -> PyResult<Self> {
        Ok(Self { inner: BarenblattSpec::with_constant(m, dim, constant, t_offset).map_err(value_err)? })
    }

    fn sample(&self, grid: &PyField, t: f64) -> PyResult<PyField> {
        Ok(PyField { inner: self.inner.sample(grid.inner.grid(), t).map_err(value_err)? })
    }

    fn support_radius(&self, t: f64) -> PyResult<f64> {
        self.inner.support_radius(t).map_err(value_err)
    }

    #[getter]
    fn exponent(&self) -> f64 {
        self.inner.a()
    }
}

/// Heat kernel with diffusivity `d` at time `t` sampled on the grid of `grid`.
#[pyfunction]
fn heat_kernel(grid: &PyField, t: f64, d: f64) -> PyResult<PyField> {
    Ok(PyField { inner: sample_heat_kernel(grid.inner.grid(), t, d).map_err(value_err)? })
}

/// Equality recursion `y_{n+1} = c b^n y_n^(1+eps)` with its closed-form bound.
/// Returns `(sequence, bounds, threshold)`.
#[pyfunction]
fn ladyzhenskaya(y0: f64, c: f64, b: f64, eps: f64, n: usize) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let run = ladyzhenskaya_iterate(y0, c, b, eps, n).map_err(value_err)?;
    Ok((run.sequence, run.bounds, run.threshold))
}

/// Run a command from TOML config text; returns `(exit_code, summary)`.
/// Configuration and numerical failures raise with the CLI exit status in
/// the message.
#[pyfunction]
#[pyo3(signature = (config, output_dir = None))]
fn run(py: Python<'_>, config: &str, output_dir: Option<String>) -> PyResult<(i32, String)> {
    let mut cfg = RunConfig::from_toml(config).map_err(value_err)?;
    if let Some(d) = output_dir {
        cfg.output_dir = d.into();
    }
    let out = py
        .allow_threads(|| execute(&cfg))
        .map_err(|e| PyRuntimeError::new_err(format!("exit {}: {e}", e.exit_code())))?;
    Ok((out.exit_code, out.summary))
}

#[pymodule]
fn fsplab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PyBarenblatt>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(ladyzhenskaya, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
