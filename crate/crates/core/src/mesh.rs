//! Uniform space-time discretization, initial-datum projection and the
//! ghost-cell boundary policy.

use crate::error::{Result, SolverError};
use crate::exact::{initial_datum, InitialDatumId};
use crate::quad::gauss5;

/// The fixed ratio dt / h used by both schemes.
pub const CFL_RATIO: f64 = 1.0 / 6.0;

/// Uniform 1-D mesh. The time step is locked to `dt = h * cfl_ratio`;
/// it is never a free parameter.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Grid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub h: f64,
    pub n_cells: usize,
    pub dt: f64,
    pub cfl_ratio: f64,
    pub t_final: f64,
    pub n_ghost: usize,
}

impl Grid {
    /// Cell center of interior cell `j` (0-based, ghosts excluded).
    pub fn cell_center(&self, j: usize) -> f64 {
        self.x_lo + (j as f64 + 0.5) * self.h
    }

    /// Left interface x_{j-1/2} of interior cell `j`.
    pub fn left_interface(&self, j: usize) -> f64 {
        self.x_lo + j as f64 * self.h
    }

    /// Total storage length including ghost cells on both sides.
    pub fn storage_len(&self) -> usize {
        self.n_cells + 2 * self.n_ghost
    }
}

/// Ghost-cell refresh policy. The continuum problem lives on the whole line;
/// constant extrapolation keeps the boundary invisible for data with
/// constant states at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    #[default]
    ConstantExtrapolation,
}

/// Piecewise-constant state at one time level, ghost cells included.
#[derive(Debug, Clone)]
pub struct CellField {
    pub values: Vec<f64>,
    pub time: f64,
    pub n_ghost: usize,
    pub n_cells: usize,
}

impl CellField {
    pub fn zeros(grid: &Grid) -> Self {
        CellField {
            values: vec![0.0; grid.storage_len()],
            time: 0.0,
            n_ghost: grid.n_ghost,
            n_cells: grid.n_cells,
        }
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[self.n_ghost..self.n_ghost + self.n_cells]
    }

    pub fn interior_mut(&mut self) -> &mut [f64] {
        let (g, n) = (self.n_ghost, self.n_cells);
        &mut self.values[g..g + n]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.interior().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Builds a grid with `dt = h / 6`. The domain must be commensurate with
/// `h`: (x_hi - x_lo)/h within 1e-9 of an integer.
pub fn build_grid(x_lo: f64, x_hi: f64, h: f64, t_final: f64, n_ghost: usize) -> Result<Grid> {
    if !(x_lo < x_hi) {
        return Err(SolverError::InvalidGrid(format!(
            "x_lo = {x_lo} must be < x_hi = {x_hi}"
        )));
    }
    if !(h > 0.0) {
        return Err(SolverError::InvalidGrid(format!("h = {h} must be > 0")));
    }
    if t_final < 0.0 {
        return Err(SolverError::InvalidGrid(format!(
            "t_final = {t_final} must be >= 0"
        )));
    }
    let ratio = (x_hi - x_lo) / h;
    if (ratio - ratio.round()).abs() > 1e-9 {
        return Err(SolverError::NonCommensurateDomain { x_lo, x_hi, h, ratio });
    }
    let n_cells = ratio.round() as usize;
    Ok(Grid {
        x_lo,
        x_hi,
        h,
        n_cells,
        dt: h * CFL_RATIO,
        cfl_ratio: CFL_RATIO,
        t_final,
        n_ghost,
    })
}

/// Projects an initial datum onto the grid by exact cell averages. Each
/// cell is split at the datum's breakpoints; every sub-interval is
/// integrated with 5-point Gauss-Legendre, which is exact on the
/// piecewise-linear pieces and well beyond machine precision on the
/// sinusoidal piece of datum E at any practical h.
pub fn project_initial(datum_id: InitialDatumId, grid: &Grid) -> CellField {
    let mut field = CellField::zeros(grid);
    let breaks = datum_id.breakpoints();
    for j in 0..grid.n_cells {
        let xl = grid.left_interface(j);
        let xr = xl + grid.h;
        let mut cuts = vec![xl];
        for &b in breaks {
            if b > xl && b < xr {
                cuts.push(b);
            }
        }
        cuts.push(xr);
        let mut integral = 0.0;
        for w in cuts.windows(2) {
            integral += gauss5(|x| initial_datum(datum_id, x), w[0], w[1]);
        }
        field.values[grid.n_ghost + j] = integral / grid.h;
    }
    refresh_ghosts(&mut field, BoundaryPolicy::ConstantExtrapolation);
    field
}

/// Copies the nearest interior value into every ghost cell.
pub fn refresh_ghosts(field: &mut CellField, _policy: BoundaryPolicy) {
    let g = field.n_ghost;
    let n = field.n_cells;
    let first = field.values[g];
    let last = field.values[g + n - 1];
    for v in &mut field.values[..g] {
        *v = first;
    }
    for v in &mut field.values[g + n..] {
        *v = last;
    }
}
