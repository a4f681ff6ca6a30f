//! Python bindings: densities, the jump rule, both solvers, the potential
//! and the scenario harness.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use supercool::boundary_analysis;
use supercool::grid_solver::{self, GridConfig};
use supercool::harness::{self, DensitySpec, ScenarioConfig};
use supercool::jump_rule::{self, ScanSpec};
use supercool::particle_sim::{self, Sampling};
use supercool::potential::{self, Margin};
use supercool::{HarnessError, SimError};

fn harness_err(e: HarnessError) -> PyErr {
    if e.exit_code() == 3 {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn sim_err(e: SimError) -> PyErr {
    harness_err(HarnessError::from(e))
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Unit-mass step density on `[breaks[0], breaks[-1]]`.
#[pyclass(frozen, skip_from_py_object, module = "supercool")]
#[derive(Clone)]
struct Density(supercool::Density);

#[pymethods]
impl Density {
    #[new]
    fn new(breaks: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        supercool::Density::piecewise_constant(breaks, values)
            .map(Density)
            .map_err(value_err)
    }

    /// Builds a density from a JSON family spec, e.g.
    /// `{"family": "power_gap", "c": 0.5, ...}`.
    #[staticmethod]
    fn from_spec(spec: &str, alpha: f64) -> PyResult<Self> {
        let spec: DensitySpec = serde_json::from_str(spec).map_err(value_err)?;
        spec.build(alpha).map(Density).map_err(harness_err)
    }

    #[getter]
    fn breaks(&self) -> Vec<f64> {
        self.0.breaks().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.0.support()
    }

    fn mass(&self) -> f64 {
        self.0.mass()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.0.pdf(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }

    fn quantile(&self, p: f64) -> f64 {
        self.0.quantile(p)
    }

    fn __repr__(&self) -> String {
        format!("Density(breaks={:?}, values={:?})", self.0.breaks(), self.0.values())
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "supercool")]
#[derive(Clone)]
struct JumpRecord {
    t: f64,
    lambda_minus: f64,
    lambda_plus: f64,
    mass: f64,
}

impl From<&supercool::JumpRecord> for JumpRecord {
    fn from(j: &supercool::JumpRecord) -> Self {
        JumpRecord {
            t: j.t,
            lambda_minus: j.lambda_minus,
            lambda_plus: j.lambda_plus,
            mass: j.mass,
        }
    }
}

#[pymethods]
impl JumpRecord {
    fn size(&self) -> f64 {
        self.lambda_plus - self.lambda_minus
    }

    fn __repr__(&self) -> String {
        format!(
            "JumpRecord(t={}, lambda_minus={}, lambda_plus={}, mass={})",
            self.t, self.lambda_minus, self.lambda_plus, self.mass
        )
    }
}

/// Sampled frontier path with its jump registry.
#[pyclass(frozen, skip_from_py_object, module = "supercool")]
#[derive(Clone)]
struct FrontierPath(supercool::FrontierPath);

#[pymethods]
impl FrontierPath {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }

    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.0.lambda.clone()
    }

    #[getter]
    fn jumps(&self) -> Vec<JumpRecord> {
        self.0.jumps.iter().map(JumpRecord::from).collect()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    fn lambda0(&self) -> f64 {
        self.0.lambda0()
    }

    fn value_at(&self, t: f64) -> f64 {
        self.0.value_at(t)
    }

    /// Freezing time `s(x)` at each point, `inf` where the frontier never
    /// passed.
    fn freezing_time(&self, x: Vec<f64>) -> Vec<f64> {
        boundary_analysis::freezing_time(&self.0, &x).s
    }

    /// Re-detects jumps as single-step increments above `threshold`.
    fn detect_jumps(&self, threshold: f64) -> Vec<JumpRecord> {
        boundary_analysis::detect_jumps(&self.0, threshold)
            .iter()
            .map(JumpRecord::from)
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Output of the grid solver.
#[pyclass(frozen, skip_from_py_object, module = "supercool")]
struct GridRun(grid_solver::GridRun);

#[pymethods]
impl GridRun {
    #[getter]
    fn path(&self) -> FrontierPath {
        FrontierPath(self.0.path.clone())
    }

    #[getter]
    fn x_grid(&self) -> Vec<f64> {
        self.0.field.x_grid.clone()
    }

    #[getter]
    fn t_grid(&self) -> Vec<f64> {
        self.0.field.t_grid.clone()
    }

    /// Temperature samples, one row per entry of `t_grid`.
    #[getter]
    fn field(&self) -> Vec<Vec<f64>> {
        self.0.field.values.clone()
    }

    #[getter]
    fn nu(&self) -> Vec<f64> {
        self.0.weight.nu.clone()
    }

    #[getter]
    fn max_mass_residual(&self) -> f64 {
        self.0.max_mass_residual
    }

    #[getter]
    fn surviving_mass(&self) -> f64 {
        self.0.surviving_mass
    }

    /// Remaining time integral `w(t, x)` on the sample grid.
    fn potential(&self) -> Vec<Vec<f64>> {
        potential::compute_w(&self.0.field).w
    }

    /// `(l1, max, complementarity)` of the obstacle residual.
    #[pyo3(signature = (margin_space=0.05, margin_time=0.05, eps_w=None))]
    fn obstacle_residual(&self, margin_space: f64, margin_time: f64, eps_w: Option<f64>) -> (f64, f64, f64) {
        let w = potential::compute_w(&self.0.field);
        let eps = eps_w.unwrap_or_else(|| potential::default_eps_w(self.0.config.dx, self.0.config.alpha));
        let margin = Margin {
            space: margin_space,
            time: margin_time,
        };
        let r = potential::obstacle_residual(&w, &self.0.weight, margin, eps);
        (r.l1, r.max, r.complementarity)
    }
}

/// Solves the initial jump from `lambda_minus` against the density's CDF.
/// Returns `(delta, absorbed_mass, total_freeze)`.
#[pyfunction]
#[pyo3(signature = (density, lambda_minus, alpha, h_scan=1e-3, x_max=None))]
fn continuum_jump(
    density: &Density,
    lambda_minus: f64,
    alpha: f64,
    h_scan: f64,
    x_max: Option<f64>,
) -> PyResult<(f64, f64, bool)> {
    let x_max = x_max.unwrap_or(density.0.support().1 + alpha + 1.0);
    let scan = ScanSpec::new(h_scan, x_max, true);
    let r = jump_rule::continuum_jump(|x| density.0.cdf(x), lambda_minus, alpha, &scan).map_err(value_err)?;
    Ok((r.delta, r.absorbed_mass, r.total_freeze))
}

/// Particle cascade on sorted alive positions; returns `(delta, absorbed)`.
#[pyfunction]
fn cascade_jump(alive_sorted: Vec<f64>, lambda_start: f64, k0: usize, alpha: f64, n_total: usize) -> PyResult<(f64, usize)> {
    let r = jump_rule::cascade_jump(&alive_sorted, lambda_start, k0, alpha, n_total).map_err(value_err)?;
    Ok((r.delta, r.absorbed_indices.len()))
}

/// Runs the particle system; returns the frontier path and the alive
/// fraction at `t_end`.
#[pyfunction]
#[pyo3(signature = (density, alpha, n, dt, t_end, seed=0, sampling="stratified", jump_threshold=0.01))]
#[allow(clippy::too_many_arguments)]
fn simulate_particles(
    py: Python<'_>,
    density: &Density,
    alpha: f64,
    n: usize,
    dt: f64,
    t_end: f64,
    seed: u64,
    sampling: &str,
    jump_threshold: f64,
) -> PyResult<(FrontierPath, f64)> {
    let sampling = match sampling {
        "stratified" => Sampling::Stratified,
        "uniform" => Sampling::Uniform,
        other => return Err(PyValueError::new_err(format!("unknown sampling {other:?}"))),
    };
    let d = density.0.clone();
    py.detach(move || {
        let e = particle_sim::init_ensemble(&d, n, seed, sampling)?.with_alpha(alpha);
        let (path, e) = particle_sim::run(e, t_end, dt, 1, jump_threshold)?;
        Ok((FrontierPath(path), e.alive_fraction()))
    })
    .map_err(sim_err)
}

/// Runs the implicit grid solver.
#[pyfunction]
#[pyo3(signature = (density, alpha, dx, dt, t_end, x_max, sample_every=1, jump_threshold=0.01))]
#[allow(clippy::too_many_arguments)]
fn solve_grid(
    py: Python<'_>,
    density: &Density,
    alpha: f64,
    dx: f64,
    dt: f64,
    t_end: f64,
    x_max: f64,
    sample_every: usize,
    jump_threshold: f64,
) -> PyResult<GridRun> {
    let cfg = GridConfig {
        alpha,
        t_end,
        dt,
        dx,
        x_max,
        sample_every,
        jump_threshold,
    };
    let d = density.0.clone();
    py.detach(move || grid_solver::run_grid(&d, &cfg))
        .map(GridRun)
        .map_err(sim_err)
}

/// Runs a scenario from its JSON config, writes the artifacts and returns
/// `summary.json` as a string.
#[pyfunction]
#[pyo3(signature = (config, output_dir=None))]
fn run_scenario(py: Python<'_>, config: &str, output_dir: Option<PathBuf>) -> PyResult<String> {
    let mut cfg = ScenarioConfig::from_json(config).map_err(harness_err)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    py.detach(move || harness::run_scenario(&cfg))
        .map(|o| o.summary.to_json())
        .map_err(harness_err)
}

/// Re-verifies a scenario directory and returns the summary JSON.
#[pyfunction]
fn verify_dir(py: Python<'_>, dir: PathBuf) -> PyResult<String> {
    py.detach(move || harness::verify_dir(&dir))
        .map(|s| s.to_json())
        .map_err(harness_err)
}

#[pymodule]
#[pyo3(name = "supercool")]
fn supercool_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Density>()?;
    m.add_class::<JumpRecord>()?;
    m.add_class::<FrontierPath>()?;
    m.add_class::<GridRun>()?;
    m.add_function(wrap_pyfunction!(continuum_jump, m)?)?;
    m.add_function(wrap_pyfunction!(cascade_jump, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_particles, m)?)?;
    m.add_function(wrap_pyfunction!(solve_grid, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(verify_dir, m)?)?;
    Ok(())
}
