//! Python bindings for the solver: single runs, the standard experiments,
//! kernel discretization and the closed-form reference solutions.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use nlburgers::exact::{self, ExactSolutionId, InitialDatumId};
use nlburgers::kernels::{self, KernelFamily, KernelSpec};
use nlburgers::mesh::build_grid;
use nlburgers::schemes::{self, Method, Problem, RunConfig, SchemeKind};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_datum(s: &str) -> PyResult<InitialDatumId> {
    InitialDatumId::parse(s).ok_or_else(|| value_err(format!("unknown datum '{s}'")))
}

fn parse_family(s: &str) -> PyResult<KernelFamily> {
    KernelFamily::parse(s).ok_or_else(|| value_err(format!("unknown kernel family '{s}'")))
}

/// Full result of one solver run: cell centers, snapshot states and the
/// per-step conservation diagnostics.
#[pyclass]
struct Trajectory {
    #[pyo3(get)]
    x: Vec<f64>,
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    snapshots: Vec<Vec<f64>>,
    #[pyo3(get)]
    total_mass: Vec<f64>,
    #[pyo3(get)]
    right_support_max: Vec<f64>,
    #[pyo3(get)]
    n_steps: usize,
}

#[pymethods]
impl Trajectory {
    fn __repr__(&self) -> String {
        format!(
            "Trajectory({} cells, {} snapshots, {} steps)",
            self.x.len(),
            self.snapshots.len(),
            self.n_steps
        )
    }
}

/// Marches one configuration with dt = h/6 and returns the trajectory.
#[pyfunction]
#[pyo3(signature = (problem, scheme, datum, h, t_final, kernel=None, eps=None, snapshots=vec![], domain=(-6.0, 8.0)))]
#[allow(clippy::too_many_arguments)]
fn solve(
    problem: &str,
    scheme: &str,
    datum: &str,
    h: f64,
    t_final: f64,
    kernel: Option<&str>,
    eps: Option<f64>,
    snapshots: Vec<f64>,
    domain: (f64, f64),
) -> PyResult<Trajectory> {
    let problem = Problem::parse(problem)
        .ok_or_else(|| value_err(format!("unknown problem '{problem}'")))?;
    let method =
        Method::parse(scheme).ok_or_else(|| value_err(format!("unknown scheme '{scheme}'")))?;
    let datum = parse_datum(datum)?;
    let spec = match (problem, eps) {
        (Problem::Nonlocal, Some(e)) => {
            let family = kernel.map(parse_family).transpose()?.unwrap_or(KernelFamily::IsotropicEven);
            Some(KernelSpec::new(family, e).map_err(value_err)?)
        }
        (Problem::Nonlocal, None) => return Err(value_err("nonlocal problem requires eps")),
        (Problem::Local, _) => None,
    };
    let n_ghost = match &spec {
        Some(s) => {
            let w = kernels::quadrature_weights(s, h).map_err(value_err)?;
            kernels::required_ghosts(&w)
        }
        None => 2,
    };
    let n = ((domain.1 - domain.0) / h - 1e-9).ceil().max(1.0);
    let grid = build_grid(domain.0, domain.0 + n * h, h, t_final, n_ghost).map_err(value_err)?;
    let cfg = RunConfig {
        scheme: SchemeKind { method, problem },
        grid: grid.clone(),
        datum,
        kernel: spec,
        snapshot_times: snapshots,
    };
    let traj = schemes::run(&cfg).map_err(value_err)?;
    Ok(Trajectory {
        x: (0..grid.n_cells).map(|j| grid.cell_center(j)).collect(),
        times: traj.snapshots.iter().map(|f| f.time).collect(),
        snapshots: traj.snapshots.iter().map(|f| f.interior().to_vec()).collect(),
        total_mass: traj.diagnostics.iter().map(|d| d.total_mass).collect(),
        right_support_max: traj.diagnostics.iter().map(|d| d.right_support_max).collect(),
        n_steps: traj.n_steps,
    })
}

/// Runs one of the standard experiments T1..T7 and writes its CSVs and
/// manifest into `out`. Returns the written manifest paths' directory.
#[pyfunction]
#[pyo3(signature = (test, out, variant=None, paper_scale=false))]
fn run_test(test: &str, out: &str, variant: Option<&str>, paper_scale: bool) -> PyResult<()> {
    let test = nlburgers::experiments::TestId::parse(test)
        .ok_or_else(|| value_err(format!("unknown test '{test}'")))?;
    let variant = variant
        .map(|v| {
            nlburgers::experiments::Variant::parse(v)
                .ok_or_else(|| value_err(format!("unknown variant '{v}'")))
        })
        .transpose()?;
    nlburgers::experiments::run_test(test, variant, None, std::path::Path::new(out), paper_scale)
        .map_err(value_err)?;
    Ok(())
}

/// Discretized kernel weights: returns (gamma, ell) with gamma[i] the weight
/// for offset k = i - ell.
#[pyfunction]
fn quadrature_weights(family: &str, eps: f64, h: f64) -> PyResult<(Vec<f64>, usize)> {
    let spec = KernelSpec::new(parse_family(family)?, eps).map_err(value_err)?;
    let w = kernels::quadrature_weights(&spec, h).map_err(value_err)?;
    Ok((w.as_slice().to_vec(), w.ell))
}

#[pyfunction]
fn normalization_constant(family: &str, eps: f64) -> PyResult<f64> {
    Ok(kernels::normalization_constant(parse_family(family)?, eps))
}

#[pyfunction]
fn initial_datum(datum: &str, x: f64) -> PyResult<f64> {
    Ok(exact::initial_datum(parse_datum(datum)?, x))
}

/// Entropy solution of the local equation for data A..D.
#[pyfunction]
fn exact_local(datum: &str, t: f64, x: f64) -> PyResult<f64> {
    let id = match datum {
        "A" | "a" => ExactSolutionId::A,
        "B" | "b" => ExactSolutionId::B,
        "C" | "c" => ExactSolutionId::C,
        "D" | "d" => ExactSolutionId::D,
        _ => return Err(value_err(format!("no closed-form solution for datum '{datum}'"))),
    };
    Ok(exact::exact_local(id, t, x))
}

/// Traveling-shock solution of the nonlocal equation for datum D with the
/// right-support kernel.
#[pyfunction]
fn exact_nonlocal_d(t: f64, x: f64) -> f64 {
    exact::exact_nonlocal_d(t, x)
}

#[pyfunction]
fn godunov_local_flux(rho_l: f64, rho_r: f64) -> f64 {
    schemes::godunov_local_flux(rho_l, rho_r)
}

#[pymodule]
fn nlburgers_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_test, m)?)?;
    m.add_function(wrap_pyfunction!(quadrature_weights, m)?)?;
    m.add_function(wrap_pyfunction!(normalization_constant, m)?)?;
    m.add_function(wrap_pyfunction!(initial_datum, m)?)?;
    m.add_function(wrap_pyfunction!(exact_local, m)?)?;
    m.add_function(wrap_pyfunction!(exact_nonlocal_d, m)?)?;
    m.add_function(wrap_pyfunction!(godunov_local_flux, m)?)?;
    m.add("CFL_RATIO", nlburgers::mesh::CFL_RATIO)?;
    Ok(())
}
