//! Convolution-kernel families, their normalization constants and the
//! discrete quadrature weights `gamma_k` used by the nonlocal schemes.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use crate::error::{Result, SolverError};
use crate::mesh::CellField;
use crate::quad::adaptive_simpson;

const QUAD_TOL: f64 = 1e-12;

/// The three kernel profiles used in the experiments. All are bump
/// functions of the form `alpha * (|x - a||x - b|)^{5/2}` on their support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum KernelFamily {
    /// Even profile supported on [-eps, eps].
    IsotropicEven,
    /// Profile supported on [-eps, 0] (looks rightward in the convolution).
    LeftSupport,
    /// Profile supported on [0, eps].
    RightSupport,
}

impl KernelFamily {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "even" | "isotropic" => Some(Self::IsotropicEven),
            "left" => Some(Self::LeftSupport),
            "right" => Some(Self::RightSupport),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::IsotropicEven => "even",
            Self::LeftSupport => "left",
            Self::RightSupport => "right",
        }
    }

    /// Support of the scaled kernel as multiples of eps.
    fn unit_support(&self) -> (f64, f64) {
        match self {
            Self::IsotropicEven => (-1.0, 1.0),
            Self::LeftSupport => (-1.0, 0.0),
            Self::RightSupport => (0.0, 1.0),
        }
    }

    /// Unnormalized profile on the unit support (eps = 1).
    fn unit_profile(&self, u: f64) -> f64 {
        let (lo, hi) = self.unit_support();
        if u < lo || u > hi {
            return 0.0;
        }
        match self {
            Self::IsotropicEven => ((1.0 - u).abs() * (1.0 + u).abs()).powf(2.5),
            Self::LeftSupport => (u.abs() * (u + 1.0).abs()).powf(2.5),
            Self::RightSupport => ((u - 1.0).abs() * u.abs()).powf(2.5),
        }
    }
}

/// A kernel family at a given radius, with the normalization `alpha`
/// that makes the profile integrate to one.
#[derive(Debug, Clone, Copy)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub eps: f64,
    pub alpha: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "kernel radius eps = {eps} must be > 0"
            )));
        }
        Ok(KernelSpec {
            family,
            eps,
            alpha: normalization_constant(family, eps),
        })
    }

    /// Support interval of the scaled kernel.
    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.family.unit_support();
        (lo * self.eps, hi * self.eps)
    }

    /// Pointwise kernel value; zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let e = self.eps;
        let profile = match self.family {
            KernelFamily::IsotropicEven => ((x - e).abs() * (x + e).abs()).powf(2.5),
            KernelFamily::LeftSupport => (x.abs() * (x + e).abs()).powf(2.5),
            KernelFamily::RightSupport => ((x - e).abs() * x.abs()).powf(2.5),
        };
        self.alpha * profile
    }
}

/// Integral of the unnormalized unit-radius profile, computed once per
/// family by adaptive quadrature. The profile scales exactly as eps^6
/// under x -> eps * u, so `alpha_eps = 1 / (eps^6 * I_1)`; integrating in
/// the scaled variable keeps the quadrature well conditioned for tiny eps.
fn unit_integral(family: KernelFamily) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<KernelFamily, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    *map.entry(family).or_insert_with(|| {
        let (lo, hi) = family.unit_support();
        adaptive_simpson(|u| family.unit_profile(u), lo, hi, QUAD_TOL)
    })
}

/// Normalization constant `alpha_eps` making the family profile a
/// probability density.
pub fn normalization_constant(family: KernelFamily, eps: f64) -> f64 {
    assert!(eps > 0.0, "eps must be positive");
    1.0 / (eps.powi(6) * unit_integral(family))
}

/// Discrete quadrature weights `gamma_k = int_{kh}^{(k+1)h} eta_eps`,
/// for k = -ell .. ell-1 with `ell = floor(eps/h) + 1`.
#[derive(Debug, Clone)]
pub struct QuadratureWeights {
    gamma: Vec<f64>,
    pub ell: usize,
    pub h: f64,
}

impl QuadratureWeights {
    /// Weight for offset `k`, valid for -ell <= k <= ell-1.
    pub fn gamma(&self, k: isize) -> f64 {
        let idx = k + self.ell as isize;
        assert!(idx >= 0 && (idx as usize) < self.gamma.len(), "k = {k} out of range");
        self.gamma[idx as usize]
    }

    pub fn sum(&self) -> f64 {
        self.gamma.iter().sum()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gamma
    }
}

/// Computes the weights by adaptive quadrature of the normalized kernel
/// over each interval [kh, (k+1)h], clipped to the support.
pub fn quadrature_weights(spec: &KernelSpec, h: f64) -> Result<QuadratureWeights> {
    if !(h > 0.0) {
        return Err(SolverError::InvalidConfig(format!("h = {h} must be > 0")));
    }
    if h > spec.eps {
        return Err(SolverError::KernelUnresolvable { h, eps: spec.eps });
    }
    let ell = (spec.eps / h).floor() as usize + 1;
    let (lo, hi) = spec.support();
    let mut gamma = Vec::with_capacity(2 * ell);
    for k in -(ell as isize)..(ell as isize) {
        let a = (k as f64 * h).max(lo);
        let b = ((k + 1) as f64 * h).min(hi);
        let g = if a < b {
            adaptive_simpson(|x| spec.eval(x), a, b, QUAD_TOL)
        } else {
            0.0
        };
        gamma.push(g.max(0.0));
    }
    Ok(QuadratureWeights { gamma, ell, h })
}

/// Smallest ghost width that lets the step routines evaluate the
/// convolution one cell beyond the interior on both sides.
pub fn required_ghosts(w: &QuadratureWeights) -> usize {
    w.ell + 1
}

/// Discrete convolution at cell centers: `c_j = sum_k gamma_k rho_{j-k}`.
/// Returns one value per interior cell.
pub fn convolve_centers(field: &CellField, w: &QuadratureWeights) -> Result<Vec<f64>> {
    if field.n_ghost < required_ghosts(w) {
        return Err(SolverError::InsufficientGhosts {
            n_ghost: field.n_ghost,
            needed: required_ghosts(w),
        });
    }
    let g = field.n_ghost;
    Ok((g..g + field.n_cells)
        .map(|p| convolve_at(&field.values, w, p))
        .collect())
}

/// Discrete convolution at interfaces:
/// `V_{j+1/2} = sum_k gamma_k rho_{j-k+1}`, one value per interior
/// interface x_{j+1/2}, j = 0 .. n_cells - 1.
pub fn convolve_interfaces(field: &CellField, w: &QuadratureWeights) -> Result<Vec<f64>> {
    if field.n_ghost < required_ghosts(w) {
        return Err(SolverError::InsufficientGhosts {
            n_ghost: field.n_ghost,
            needed: required_ghosts(w),
        });
    }
    let g = field.n_ghost;
    Ok((g..g + field.n_cells)
        .map(|p| convolve_at(&field.values, w, p + 1))
        .collect())
}

/// Kernel sum centered at raw storage index `p`. Callers guarantee the
/// stencil [p - ell + 1, p + ell] stays inside the array.
pub(crate) fn convolve_at(values: &[f64], w: &QuadratureWeights, p: usize) -> f64 {
    let ell = w.ell as isize;
    let mut sum = 0.0;
    for (i, &gk) in w.gamma.iter().enumerate() {
        let k = i as isize - ell;
        sum += gk * values[(p as isize - k) as usize];
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_grid, refresh_ghosts, BoundaryPolicy, CellField};
    use std::f64::consts::PI;

    fn bump_field(n_cells: usize, n_ghost: usize, m: usize, v: f64) -> CellField {
        let mut f = CellField {
            values: vec![0.0; n_cells + 2 * n_ghost],
            time: 0.0,
            n_ghost,
            n_cells,
        };
        f.values[n_ghost + m] = v;
        f
    }

    #[test]
    fn normalization_matches_beta_closed_forms() {
        // int (1-u^2)^{5/2} du = 5 pi / 16; int (u(1-u))^{5/2} du = 5 pi / 1024
        for &eps in &[1.0, 0.25, 0.05, 0.0056] {
            let a = normalization_constant(KernelFamily::IsotropicEven, eps);
            let exact = 16.0 / (5.0 * PI * eps.powi(6));
            assert!((a - exact).abs() / exact < 1e-10, "even eps={eps}: {a} vs {exact}");

            for fam in [KernelFamily::LeftSupport, KernelFamily::RightSupport] {
                let a = normalization_constant(fam, eps);
                let exact = 1024.0 / (5.0 * PI * eps.powi(6));
                assert!((a - exact).abs() / exact < 1e-10, "{fam:?} eps={eps}: {a} vs {exact}");
            }
        }
    }

    #[test]
    fn kernel_has_unit_integral() {
        for fam in [
            KernelFamily::IsotropicEven,
            KernelFamily::LeftSupport,
            KernelFamily::RightSupport,
        ] {
            for &eps in &[0.32, 0.1, 0.011] {
                let spec = KernelSpec::new(fam, eps).unwrap();
                let (lo, hi) = spec.support();
                let integral = adaptive_simpson(|x| spec.eval(x), lo, hi, 1e-13);
                assert!((integral - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eval_kernel_pointwise() {
        let eps = 0.3;
        let spec = KernelSpec::new(KernelFamily::IsotropicEven, eps).unwrap();
        assert_eq!(spec.eval(eps), 0.0);
        assert_eq!(spec.eval(-eps), 0.0);
        assert!((spec.eval(0.0) - spec.alpha * eps.powi(5)).abs() < 1e-9 * spec.alpha * eps.powi(5));
        assert_eq!(spec.eval(1.0), 0.0);

        let left = KernelSpec::new(KernelFamily::LeftSupport, eps).unwrap();
        assert_eq!(left.eval(0.1 * eps), 0.0);
        assert!(left.eval(-0.5 * eps) > 0.0);
    }

    #[test]
    fn weights_basics() {
        let spec = KernelSpec::new(KernelFamily::IsotropicEven, 0.25).unwrap();
        let w = quadrature_weights(&spec, 0.01).unwrap();
        assert_eq!(w.ell, 26);
        assert!((w.sum() - 1.0).abs() < 1e-10);
        assert!(w.as_slice().iter().all(|&g| g >= 0.0));
        // evenness of the profile reflects gamma_k into gamma_{-k-1}
        for k in 0..w.ell as isize {
            assert!((w.gamma(k) - w.gamma(-k - 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn one_sided_weights_vanish_on_the_wrong_side() {
        let left = KernelSpec::new(KernelFamily::LeftSupport, 0.1).unwrap();
        let w = quadrature_weights(&left, 0.01).unwrap();
        for k in 0..w.ell as isize {
            assert_eq!(w.gamma(k), 0.0);
        }
        assert!((w.sum() - 1.0).abs() < 1e-10);

        let right = KernelSpec::new(KernelFamily::RightSupport, 0.1).unwrap();
        let w = quadrature_weights(&right, 0.01).unwrap();
        for k in -(w.ell as isize)..0 {
            assert_eq!(w.gamma(k), 0.0);
        }
        assert!((w.sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_unresolvable_kernel() {
        let spec = KernelSpec::new(KernelFamily::IsotropicEven, 0.01).unwrap();
        assert!(matches!(
            quadrature_weights(&spec, 0.02),
            Err(SolverError::KernelUnresolvable { .. })
        ));
    }

    #[test]
    fn refined_weights_merge_to_coarse() {
        let spec = KernelSpec::new(KernelFamily::IsotropicEven, 0.2).unwrap();
        let coarse = quadrature_weights(&spec, 0.02).unwrap();
        let fine = quadrature_weights(&spec, 0.01).unwrap();
        // coarse interval [kH, (k+1)H] is the union of fine [2k h, (2k+2) h]
        let fine_gamma = |k: isize| {
            if k >= -(fine.ell as isize) && k < fine.ell as isize {
                fine.gamma(k)
            } else {
                0.0
            }
        };
        for k in -(coarse.ell as isize)..coarse.ell as isize {
            let merged = fine_gamma(2 * k) + fine_gamma(2 * k + 1);
            assert!((merged - coarse.gamma(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn convolution_of_constant_is_constant() {
        let spec = KernelSpec::new(KernelFamily::IsotropicEven, 0.1).unwrap();
        let w = quadrature_weights(&spec, 0.02).unwrap();
        let grid = build_grid(0.0, 1.0, 0.02, 0.0, required_ghosts(&w)).unwrap();
        let mut field = CellField::zeros(&grid);
        field.interior_mut().iter_mut().for_each(|v| *v = 0.7);
        refresh_ghosts(&mut field, BoundaryPolicy::ConstantExtrapolation);
        for c in convolve_centers(&field, &w).unwrap() {
            assert!((c - 0.7).abs() < 1e-10);
        }
        for v in convolve_interfaces(&field, &w).unwrap() {
            assert!((v - 0.7).abs() < 1e-10);
        }
    }

    #[test]
    fn convolution_of_single_bump_reads_off_weights() {
        let spec = KernelSpec::new(KernelFamily::IsotropicEven, 0.1).unwrap();
        let w = quadrature_weights(&spec, 0.02).unwrap();
        let n_ghost = required_ghosts(&w);
        let m = 40;
        let field = bump_field(80, n_ghost, m, 1.0);
        let c = convolve_centers(&field, &w).unwrap();
        let v = convolve_interfaces(&field, &w).unwrap();
        for j in 0..80isize {
            let k = j - m as isize;
            let expect = if k >= -(w.ell as isize) && k < w.ell as isize {
                w.gamma(k)
            } else {
                0.0
            };
            assert!((c[j as usize] - expect).abs() < 1e-15, "c_j at j={j}");
            // identity V_{j+1/2} = c_{j+1}
            if j < 79 {
                assert_eq!(v[j as usize], c[j as usize + 1]);
            }
        }
    }

    #[test]
    fn convolution_rejects_thin_ghosts() {
        let spec = KernelSpec::new(KernelFamily::IsotropicEven, 0.1).unwrap();
        let w = quadrature_weights(&spec, 0.02).unwrap();
        let field = bump_field(40, 2, 20, 1.0);
        assert!(matches!(
            convolve_centers(&field, &w),
            Err(SolverError::InsufficientGhosts { .. })
        ));
    }
}
