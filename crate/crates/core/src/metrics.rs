//! Lp error norms against reference solutions, mass diagnostics and
//! convergence-rate fitting.

use crate::error::{Result, SolverError};
use crate::mesh::{CellField, Grid};

/// What a numerical solution is being compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ReferenceKind {
    ExactLocal,
    ExactNonlocalD,
    FineMeshGodunov,
}

impl ReferenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ExactLocal => "exact_local",
            Self::ExactNonlocalD => "exact_nonlocal_d",
            Self::FineMeshGodunov => "fine_mesh_godunov",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub p: f64,
    pub value: f64,
    pub time: f64,
    pub reference: ReferenceKind,
}

/// Discrete Lp distance `(h * sum_j |rho_j - ref(x_j)|^p)^(1/p)` over the
/// interior cells, sampling the reference at cell midpoints.
pub fn lp_error(
    grid: &Grid,
    field: &CellField,
    reference: impl Fn(f64) -> f64,
    p: f64,
    time: f64,
    kind: ReferenceKind,
) -> ErrorReport {
    assert!(p >= 1.0, "lp_error requires p >= 1");
    let mut sum = 0.0;
    for (j, &v) in field.interior().iter().enumerate() {
        let diff = (v - reference(grid.cell_center(j))).abs();
        sum += diff.powf(p);
    }
    ErrorReport {
        p,
        value: (grid.h * sum).powf(1.0 / p),
        time,
        reference: kind,
    }
}

/// h * sum of interior values (the discrete total mass).
pub fn total_mass(grid: &Grid, field: &CellField) -> f64 {
    grid.h * field.interior().iter().sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Signed half-line mass: h * sum over cells with center on the requested
/// side of x = 0. The grid must have an interface at (or within h/2 of) 0.
pub fn half_line_mass(grid: &Grid, field: &CellField, side: Side) -> f64 {
    grid.h
        * field
            .interior()
            .iter()
            .enumerate()
            .filter(|(j, _)| match side {
                Side::Left => grid.cell_center(*j) < 0.0,
                Side::Right => grid.cell_center(*j) > 0.0,
            })
            .map(|(_, &v)| v)
            .sum::<f64>()
}

/// Absolute half-line mass: h * sum of |rho_j| on the requested side.
/// This is the support-preservation diagnostic for one-sided kernels.
pub fn half_line_abs_mass(grid: &Grid, field: &CellField, side: Side) -> f64 {
    grid.h
        * field
            .interior()
            .iter()
            .enumerate()
            .filter(|(j, _)| match side {
                Side::Left => grid.cell_center(*j) < 0.0,
                Side::Right => grid.cell_center(*j) > 0.0,
            })
            .map(|(_, &v)| v.abs())
            .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ParameterKind {
    MeshH,
    Epsilon,
}

/// Rows of (parameter, error) with the fitted log-log slope.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<(f64, f64)>,
    pub fitted_rate: f64,
    pub parameter_kind: ParameterKind,
}

impl ConvergenceTable {
    pub fn new(rows: Vec<(f64, f64)>, parameter_kind: ParameterKind) -> Result<Self> {
        let fitted_rate = fit_rate(&rows)?;
        Ok(ConvergenceTable { rows, fitted_rate, parameter_kind })
    }
}

/// Least-squares slope of log(error) against log(parameter).
pub fn fit_rate(rows: &[(f64, f64)]) -> Result<f64> {
    if rows.len() < 2 {
        return Err(SolverError::InvalidConfig(
            "rate fit needs at least two rows".into(),
        ));
    }
    if rows.iter().any(|&(p, e)| p <= 0.0 || e <= 0.0) {
        return Err(SolverError::InvalidConfig(
            "rate fit needs positive parameters and errors".into(),
        ));
    }
    let n = rows.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(p, e) in rows {
        let x = p.ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
