//! Test harness: the seven standard experiments, mesh/epsilon sweeps with
//! the coupled h-eps rules, and all file output (CSV tables, snapshot
//! files, JSON manifests).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Result, SolverError};
use crate::exact::{exact_local, exact_nonlocal_d, ExactSolutionId, InitialDatumId};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::mesh::{build_grid, CellField, Grid, CFL_RATIO};
use crate::metrics::{fit_rate, lp_error, ReferenceKind};
use crate::schemes::{run, Method, Problem, RunConfig, SchemeKind, StepDiagnostics, Trajectory};

/// Minimum eps/h ratio below which the discrete kernel degenerates.
/// Violations are logged, not rejected: the coupled-viscosity panels
/// deliberately drive the mesh into this regime.
pub const EPS_H_GUARD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
}

impl TestId {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T1" | "1" => Some(Self::T1),
            "T2" | "2" => Some(Self::T2),
            "T3" | "3" => Some(Self::T3),
            "T4" | "4" => Some(Self::T4),
            "T5" | "5" => Some(Self::T5),
            "T6" | "6" => Some(Self::T6),
            "T7" | "7" => Some(Self::T7),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::T1 => "T1",
            Self::T2 => "T2",
            Self::T3 => "T3",
            Self::T4 => "T4",
            Self::T5 => "T5",
            Self::T6 => "T6",
            Self::T7 => "T7",
        }
    }

    /// Kernel family used by the test (none for the local-only Test 1).
    pub fn kernel_family(&self) -> Option<KernelFamily> {
        match self {
            Self::T1 => None,
            Self::T2 => Some(KernelFamily::RightSupport),
            Self::T3 | Self::T6 | Self::T7 => Some(KernelFamily::IsotropicEven),
            Self::T4 | Self::T5 => Some(KernelFamily::LeftSupport),
        }
    }

    pub fn has_panels(&self) -> bool {
        matches!(self, Self::T3 | Self::T6 | Self::T7)
    }

    /// Nominal domain, sized so no wave reaches a boundary by t_final at
    /// maximum speed 2 max|rho|.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::T2 => (-4.0, 4.0),
            Self::T7 => (-6.0, 10.0),
            _ => (-6.0, 8.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    FixedH,
    CoupledH,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" | "a" => Some(Self::FixedH),
            "coupled" | "b" => Some(Self::CoupledH),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::FixedH => "fixed",
            Self::CoupledH => "coupled",
        }
    }
}

/// How the mesh width is chosen across a sweep.
#[derive(Debug, Clone, Copy)]
pub enum HRule {
    /// Same h for every row.
    Fixed(f64),
    /// h = c * eps^exponent.
    Coupled { c: f64, exponent: f64 },
}

impl HRule {
    pub fn h_for(&self, eps: f64) -> f64 {
        match *self {
            HRule::Fixed(h) => h,
            HRule::Coupled { c, exponent } => c * eps.powf(exponent),
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            HRule::Fixed(h) => format!("fixed h = {h}"),
            HRule::Coupled { c, exponent } => format!("h = {c} * eps^{exponent}"),
        }
    }
}

/// Sweep description usable as an override for `run_test`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub eps_values: Vec<f64>,
    pub h_rule: HRule,
    pub schemes: Vec<SchemeKind>,
    pub t_eval: f64,
    pub p_values: Vec<f64>,
}

/// One (scheme, datum, eps, h) run of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct RowSpec {
    pub scheme: SchemeKind,
    pub datum: InitialDatumId,
    pub eps: Option<f64>,
    pub h: f64,
}

/// Snapshot runs attached to a test (all four scheme variants).
#[derive(Debug, Clone)]
pub struct SnapshotPlan {
    pub datum: InitialDatumId,
    pub eps: f64,
    pub h: f64,
    pub times: Vec<f64>,
}

/// Fully resolved description of what a test will run.
#[derive(Debug, Clone)]
pub struct TestPlan {
    pub test: TestId,
    pub variant: Option<Variant>,
    pub kernel_family: Option<KernelFamily>,
    pub rows: Vec<RowSpec>,
    pub t_eval: f64,
    pub p_values: Vec<f64>,
    pub reference: ReferenceKind,
    pub domain: (f64, f64),
    pub h_rule: String,
    pub eps_list: Vec<f64>,
    pub snapshots: Option<SnapshotPlan>,
    pub keep_diagnostics: bool,
}

/// Result of one sweep row.
#[derive(Debug, Clone)]
pub struct RowResult {
    pub spec: RowSpec,
    pub domain: (f64, f64),
    /// (p, error) pairs in the order of `p_values`.
    pub errors: Vec<(f64, f64)>,
    pub eps_h_ratio_ok: bool,
    pub wall_s: f64,
    pub diagnostics: Option<Vec<StepDiagnostics>>,
    pub skipped: Option<String>,
}

/// Fitted convergence rate for one sweep group.
#[derive(Debug, Clone)]
pub struct RateEntry {
    pub scheme: SchemeKind,
    pub datum: InitialDatumId,
    pub eps: Option<f64>,
    pub p: f64,
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct TestSummary {
    pub plan: TestPlan,
    pub rows: Vec<RowResult>,
    pub rates: Vec<RateEntry>,
    pub total_wall_s: f64,
}

impl TestSummary {
    /// Errors (parameter, error) for a (scheme, datum, p) group across the
    /// eps sweep, skipping skipped rows. For mesh sweeps pass `eps` to pick
    /// the eps series and parameters are h values.
    pub fn series(
        &self,
        scheme: SchemeKind,
        datum: InitialDatumId,
        p: f64,
        eps: Option<f64>,
    ) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| {
                r.skipped.is_none()
                    && r.spec.scheme == scheme
                    && r.spec.datum == datum
                    && (eps.is_none() || r.spec.eps == eps)
            })
            .filter_map(|r| {
                let param = if eps.is_some() || r.spec.eps.is_none() {
                    r.spec.h
                } else {
                    r.spec.eps.unwrap()
                };
                r.errors
                    .iter()
                    .find(|(pp, _)| (*pp - p).abs() < 1e-12)
                    .map(|&(_, e)| (param, e))
            })
            .collect()
    }
}

fn scheme_pair(problem: Problem) -> Vec<SchemeKind> {
    vec![
        SchemeKind { method: Method::LaxFriedrichs, problem },
        SchemeKind { method: Method::Godunov, problem },
    ]
}

const EPS_FIXED_PANEL: [f64; 5] = [0.32, 0.16, 0.08, 0.04, 0.02];

/// Builds the default plan for a test. `variant` selects a panel for the
/// tests that have one; `paper_scale` switches the fixed-h panels from the
/// desk-scale h = 0.005 to the full-resolution h = 0.001.
pub fn default_plan(test: TestId, variant: Option<Variant>, paper_scale: bool) -> Result<TestPlan> {
    let fixed_h = if paper_scale { 0.001 } else { 0.005 };
    let domain = test.domain();
    let family = test.kernel_family();

    let make_rows = |datums: &[InitialDatumId], schemes: &[SchemeKind], eps: &[f64], rule: &HRule| {
        let mut rows = Vec::new();
        for &datum in datums {
            for &scheme in schemes {
                if eps.is_empty() {
                    unreachable!("eps-driven sweeps need eps values");
                }
                for &e in eps {
                    rows.push(RowSpec { scheme, datum, eps: Some(e), h: rule.h_for(e) });
                }
            }
        }
        rows
    };

    let plan = match test {
        TestId::T1 => {
            let hs = [0.04, 0.02, 0.01, 0.005];
            let schemes = scheme_pair(Problem::Local);
            let mut rows = Vec::new();
            for &datum in &[InitialDatumId::A, InitialDatumId::B, InitialDatumId::C] {
                for &scheme in &schemes {
                    for &h in &hs {
                        rows.push(RowSpec { scheme, datum, eps: None, h });
                    }
                }
            }
            TestPlan {
                test,
                variant: None,
                kernel_family: None,
                rows,
                t_eval: 2.0,
                p_values: vec![1.0],
                reference: ReferenceKind::ExactLocal,
                domain,
                h_rule: "h sweep {0.04, 0.02, 0.01, 0.005}".into(),
                eps_list: vec![],
                snapshots: None,
                keep_diagnostics: false,
            }
        }
        TestId::T2 => {
            let eps_list = vec![0.25, 0.05, 0.01];
            let hs = [0.02, 0.01, 0.005, 0.0025];
            let mut rows = Vec::new();
            for &scheme in &scheme_pair(Problem::Nonlocal) {
                for &e in &eps_list {
                    for &h in &hs {
                        rows.push(RowSpec { scheme, datum: InitialDatumId::D, eps: Some(e), h });
                    }
                }
            }
            TestPlan {
                test,
                variant: None,
                kernel_family: family,
                rows,
                t_eval: 1.0,
                p_values: vec![1.0],
                reference: ReferenceKind::ExactNonlocalD,
                domain,
                h_rule: "h sweep {0.02, 0.01, 0.005, 0.0025}".into(),
                eps_list,
                snapshots: None,
                keep_diagnostics: false,
            }
        }
        TestId::T3 | TestId::T6 | TestId::T7 => {
            let v = variant.unwrap_or(Variant::FixedH);
            let (eps_list, rule): (Vec<f64>, HRule) = match (test, v) {
                (_, Variant::FixedH) => (EPS_FIXED_PANEL.to_vec(), HRule::Fixed(fixed_h)),
                (TestId::T3, Variant::CoupledH) => (
                    vec![0.014, 0.012, 0.010, 0.008, 0.006],
                    HRule::Coupled { c: 25.0, exponent: 2.0 },
                ),
                (TestId::T6, Variant::CoupledH) => (
                    vec![0.011, 0.0096, 0.0084, 0.0071, 0.0056],
                    HRule::Coupled { c: 64.0, exponent: 2.0 },
                ),
                (TestId::T7, Variant::CoupledH) => (
                    EPS_FIXED_PANEL.to_vec(),
                    HRule::Coupled { c: 0.1, exponent: 1.0 },
                ),
                _ => unreachable!(),
            };
            let (datum, p_values, reference, snapshots) = match test {
                TestId::T3 => (
                    InitialDatumId::A,
                    vec![1.0],
                    ReferenceKind::ExactLocal,
                    Some(SnapshotPlan {
                        datum: InitialDatumId::A,
                        eps: 0.25,
                        h: 0.01,
                        times: vec![0.0, 0.5, 1.0, 1.5, 2.0],
                    }),
                ),
                TestId::T6 => (
                    InitialDatumId::C,
                    vec![1.0, 2.0, 4.0],
                    ReferenceKind::ExactLocal,
                    Some(SnapshotPlan {
                        datum: InitialDatumId::C,
                        eps: 0.2,
                        h: 0.01,
                        times: vec![0.0, 0.5, 1.0, 1.5, 2.0],
                    }),
                ),
                TestId::T7 => (InitialDatumId::E, vec![1.0], ReferenceKind::FineMeshGodunov, None),
                _ => unreachable!(),
            };
            let rows = make_rows(&[datum], &scheme_pair(Problem::Nonlocal), &eps_list, &rule);
            TestPlan {
                test,
                variant: Some(v),
                kernel_family: family,
                rows,
                t_eval: 2.0,
                p_values,
                reference,
                domain,
                h_rule: rule.describe(),
                eps_list,
                // snapshots belong to the fixed-h panel run
                snapshots: if v == Variant::FixedH { snapshots } else { None },
                keep_diagnostics: false,
            }
        }
        TestId::T4 => {
            let eps_list = vec![0.4, 0.2, 0.1, 0.05, 0.025];
            let rule = HRule::Coupled { c: (1.0f64 / 1000.0).sqrt(), exponent: 0.5 };
            let rows = make_rows(
                &[InitialDatumId::B],
                &scheme_pair(Problem::Nonlocal),
                &eps_list,
                &rule,
            );
            TestPlan {
                test,
                variant: None,
                kernel_family: family,
                rows,
                t_eval: 2.0,
                p_values: vec![1.0],
                reference: ReferenceKind::ExactLocal,
                domain,
                h_rule: "h = sqrt(eps / 1000)".into(),
                eps_list,
                snapshots: None,
                keep_diagnostics: true,
            }
        }
        TestId::T5 => TestPlan {
            test,
            variant: None,
            kernel_family: family,
            rows: scheme_pair(Problem::Nonlocal)
                .into_iter()
                .map(|scheme| RowSpec {
                    scheme,
                    datum: InitialDatumId::F,
                    eps: Some(0.25),
                    h: 0.01,
                })
                .collect(),
            t_eval: 2.0,
            p_values: vec![],
            reference: ReferenceKind::ExactLocal,
            domain,
            h_rule: "fixed h = 0.01".into(),
            eps_list: vec![0.25],
            snapshots: Some(SnapshotPlan {
                datum: InitialDatumId::F,
                eps: 0.25,
                h: 0.01,
                times: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            }),
            keep_diagnostics: true,
        },
    };
    Ok(plan)
}

/// Extends both domain ends outward so any h from a coupled rule yields a
/// commensurate grid *with a cell center at x = 0* (cells are
/// [(j-1/2)h, (j+1/2)h]). The alignment matters: for odd data the sign
/// change must sit mid-cell, where the zero-average center cell lets the two
/// halves interact; putting it on an interface instead locks the halves
/// apart and changes the large-time behaviour of every sweep. Boundaries are
/// invisible by construction, so extending outward is harmless.
fn commensurate_domain(lo: f64, hi: f64, h: f64) -> (f64, f64) {
    let n_lo = (-lo / h - 0.5 - 1e-9).ceil().max(1.0);
    let n_hi = (hi / h - 0.5 - 1e-9).ceil().max(1.0);
    (-(n_lo + 0.5) * h, (n_hi + 0.5) * h)
}

fn ghost_width(problem: Problem, eps: Option<f64>, h: f64) -> usize {
    match (problem, eps) {
        (Problem::Nonlocal, Some(e)) => (e / h).floor() as usize + 2,
        _ => 2,
    }
}

fn grid_for(plan_domain: (f64, f64), spec: &RowSpec, t_final: f64) -> Result<Grid> {
    let (lo, hi) = commensurate_domain(plan_domain.0, plan_domain.1, spec.h);
    build_grid(lo, hi, spec.h, t_final, ghost_width(spec.scheme.problem, spec.eps, spec.h))
}

fn kernel_for(family: Option<KernelFamily>, eps: Option<f64>, problem: Problem) -> Result<Option<KernelSpec>> {
    match problem {
        Problem::Local => Ok(None),
        Problem::Nonlocal => {
            let family = family.ok_or_else(|| {
                SolverError::InvalidConfig("nonlocal row without a kernel family".into())
            })?;
            let eps = eps.ok_or_else(|| {
                SolverError::InvalidConfig("nonlocal row without eps".into())
            })?;
            Ok(Some(KernelSpec::new(family, eps)?))
        }
    }
}

/// Reference sampler for a row at the evaluation time.
enum Reference<'a> {
    Closed(Box<dyn Fn(f64) -> f64 + Sync + 'a>),
    Fine { grid: Grid, field: CellField },
}

impl Reference<'_> {
    fn sample(&self, x: f64) -> f64 {
        match self {
            Reference::Closed(f) => f(x),
            Reference::Fine { grid, field } => {
                let j = ((x - grid.x_lo) / grid.h).floor();
                let j = (j.max(0.0) as usize).min(grid.n_cells - 1);
                field.interior()[j]
            }
        }
    }
}

fn exact_solution_id(datum: InitialDatumId) -> Option<ExactSolutionId> {
    match datum {
        InitialDatumId::A => Some(ExactSolutionId::A),
        InitialDatumId::B => Some(ExactSolutionId::B),
        InitialDatumId::C => Some(ExactSolutionId::C),
        InitialDatumId::D => Some(ExactSolutionId::D),
        _ => None,
    }
}

/// Runs the local Godunov scheme on an 8x finer mesh as the reference for
/// data without a closed form.
fn fine_mesh_reference(domain: (f64, f64), datum: InitialDatumId, h: f64, t_eval: f64) -> Result<(Grid, CellField)> {
    let h_ref = h / 8.0;
    let (lo, hi) = commensurate_domain(domain.0, domain.1, h_ref);
    let grid = build_grid(lo, hi, h_ref, t_eval, 2)?;
    let cfg = RunConfig {
        scheme: SchemeKind::local(Method::Godunov),
        grid: grid.clone(),
        datum,
        kernel: None,
        snapshot_times: vec![t_eval],
    };
    let traj = run(&cfg)?;
    Ok((grid, traj.final_field().clone()))
}

fn make_reference<'a>(
    plan: &'a TestPlan,
    spec: &RowSpec,
    fine: Option<&'a (Grid, CellField)>,
) -> Result<Reference<'a>> {
    match plan.reference {
        ReferenceKind::ExactLocal => {
            let id = exact_solution_id(spec.datum).ok_or_else(|| {
                SolverError::InvalidConfig(format!(
                    "datum {:?} has no closed-form local solution",
                    spec.datum
                ))
            })?;
            let t = plan.t_eval;
            Ok(Reference::Closed(Box::new(move |x| exact_local(id, t, x))))
        }
        ReferenceKind::ExactNonlocalD => {
            let t = plan.t_eval;
            Ok(Reference::Closed(Box::new(move |x| exact_nonlocal_d(t, x))))
        }
        ReferenceKind::FineMeshGodunov => {
            let (grid, field) = fine.ok_or_else(|| {
                SolverError::InvalidConfig("missing fine-mesh reference".into())
            })?;
            Ok(Reference::Fine { grid: grid.clone(), field: field.clone() })
        }
    }
}

fn run_row(plan: &TestPlan, spec: &RowSpec, fine: Option<&(Grid, CellField)>) -> Result<RowResult> {
    let start = Instant::now();
    if let Some(eps) = spec.eps {
        if spec.h > eps {
            return Ok(RowResult {
                spec: *spec,
                domain: plan.domain,
                errors: vec![],
                eps_h_ratio_ok: false,
                wall_s: 0.0,
                diagnostics: None,
                skipped: Some(format!("h = {} exceeds eps = {eps}", spec.h)),
            });
        }
    }
    let grid = grid_for(plan.domain, spec, plan.t_eval)?;
    let kernel = kernel_for(plan.kernel_family, spec.eps, spec.scheme.problem)?;
    let eps_h_ratio_ok = match spec.eps {
        Some(e) if spec.scheme.problem == Problem::Nonlocal => e / spec.h >= EPS_H_GUARD,
        _ => true,
    };
    if !eps_h_ratio_ok {
        eprintln!(
            "warning: {} row eps = {:?}, h = {} has eps/h < {EPS_H_GUARD}; discrete kernel is marginally resolved",
            plan.test.as_str(),
            spec.eps,
            spec.h
        );
    }
    let cfg = RunConfig {
        scheme: spec.scheme,
        grid: grid.clone(),
        datum: spec.datum,
        kernel,
        snapshot_times: vec![plan.t_eval],
    };
    let traj = run(&cfg)?;
    // diagnostics-only rows (empty p list) need no reference solution
    let errors = if plan.p_values.is_empty() {
        vec![]
    } else {
        let reference = make_reference(plan, spec, fine)?;
        let final_field = traj.final_field();
        plan.p_values
            .iter()
            .map(|&p| {
                let rep = lp_error(
                    &grid,
                    final_field,
                    |x| reference.sample(x),
                    p,
                    plan.t_eval,
                    plan.reference,
                );
                (p, rep.value)
            })
            .collect()
    };
    Ok(RowResult {
        spec: *spec,
        domain: (grid.x_lo, grid.x_hi),
        errors,
        eps_h_ratio_ok,
        wall_s: start.elapsed().as_secs_f64(),
        diagnostics: plan.keep_diagnostics.then(|| traj.diagnostics.clone()),
        skipped: None,
    })
}

/// Executes all rows of a plan (in parallel, results kept in row order)
/// and fits convergence rates per sweep group.
pub fn execute_plan(plan: &TestPlan) -> Result<TestSummary> {
    let start = Instant::now();

    // precompute fine-mesh references per distinct h
    let mut fine_refs: BTreeMap<u64, (Grid, CellField)> = BTreeMap::new();
    if plan.reference == ReferenceKind::FineMeshGodunov {
        let mut hs: Vec<f64> = plan.rows.iter().map(|r| r.h).collect();
        hs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hs.dedup();
        let computed: Vec<(u64, (Grid, CellField))> = hs
            .par_iter()
            .map(|&h| {
                // one datum per FineMeshGodunov plan
                let datum = plan.rows[0].datum;
                fine_mesh_reference(plan.domain, datum, h, plan.t_eval).map(|r| (h.to_bits(), r))
            })
            .collect::<Result<_>>()?;
        fine_refs.extend(computed);
    }

    let rows: Vec<RowResult> = plan
        .rows
        .par_iter()
        .map(|spec| run_row(plan, spec, fine_refs.get(&spec.h.to_bits())))
        .collect::<Result<_>>()?;

    // group rows for rate fitting: mesh sweeps vary h within (scheme,
    // datum, eps); epsilon sweeps vary eps within (scheme, datum)
    let mesh_sweep = matches!(plan.test, TestId::T1 | TestId::T2);
    let mut rates = Vec::new();
    let mut seen: Vec<(SchemeKind, InitialDatumId, Option<f64>, f64)> = Vec::new();
    for row in rows.iter().filter(|r| r.skipped.is_none()) {
        for &(p, _) in &row.errors {
            let key_eps = if mesh_sweep { row.spec.eps } else { None };
            let key = (row.spec.scheme, row.spec.datum, key_eps, p);
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            let series: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| {
                    r.skipped.is_none()
                        && r.spec.scheme == row.spec.scheme
                        && r.spec.datum == row.spec.datum
                        && (!mesh_sweep || r.spec.eps == row.spec.eps)
                })
                .filter_map(|r| {
                    let param = if mesh_sweep { r.spec.h } else { r.spec.eps.unwrap_or(r.spec.h) };
                    r.errors
                        .iter()
                        .find(|(pp, _)| (*pp - p).abs() < 1e-12)
                        .map(|&(_, e)| (param, e))
                })
                .collect();
            if series.len() >= 2 && series.iter().all(|&(a, b)| a > 0.0 && b > 0.0) {
                rates.push(RateEntry {
                    scheme: row.spec.scheme,
                    datum: row.spec.datum,
                    eps: key_eps,
                    p,
                    rate: fit_rate(&series)?,
                });
            }
        }
    }

    Ok(TestSummary {
        plan: plan.clone(),
        rows,
        rates,
        total_wall_s: start.elapsed().as_secs_f64(),
    })
}

fn git_describe() -> String {
    std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

fn write_csv(path: &Path, header: &str, body: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "{header}")?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

fn snapshot_csv(grid: &Grid, field: &CellField) -> String {
    let mut body = String::new();
    for (j, &v) in field.interior().iter().enumerate() {
        body.push_str(&format!("{},{}\n", grid.cell_center(j), v));
    }
    body
}

fn fmt_opt(eps: Option<f64>) -> String {
    eps.map(|e| e.to_string()).unwrap_or_default()
}

/// Writes snapshot CSVs for all four scheme variants of a snapshot plan.
fn write_snapshots(plan: &TestPlan, snap: &SnapshotPlan, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let variants: Vec<SchemeKind> = vec![
        SchemeKind::local(Method::LaxFriedrichs),
        SchemeKind::local(Method::Godunov),
        SchemeKind::nonlocal(Method::LaxFriedrichs),
        SchemeKind::nonlocal(Method::Godunov),
    ];
    let t_final = snap.times.iter().cloned().fold(plan.t_eval, f64::max);
    for scheme in variants {
        let spec = RowSpec { scheme, datum: snap.datum, eps: Some(snap.eps), h: snap.h };
        let grid = grid_for(plan.domain, &spec, t_final)?;
        let kernel = kernel_for(plan.kernel_family, Some(snap.eps), scheme.problem)?;
        let cfg = RunConfig {
            scheme,
            grid: grid.clone(),
            datum: snap.datum,
            kernel,
            snapshot_times: snap.times.clone(),
        };
        let traj = run(&cfg)?;
        for field in &traj.snapshots {
            let name = format!(
                "{}_snapshot_{}_eps{}_t{}.csv",
                plan.test.as_str().to_lowercase(),
                scheme.label(),
                snap.eps,
                field.time
            );
            let path = out.join(name);
            write_csv(&path, "x_center,rho", &snapshot_csv(&grid, field))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_diagnostics(summary: &TestSummary, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for row in &summary.rows {
        let Some(diags) = &row.diagnostics else { continue };
        let name = format!(
            "{}_diagnostics_{}_eps{}_h{}.csv",
            summary.plan.test.as_str().to_lowercase(),
            row.spec.scheme.label(),
            fmt_opt(row.spec.eps),
            row.spec.h
        );
        let mut body = String::new();
        for d in diags {
            body.push_str(&format!(
                "{},{},{},{},{}\n",
                d.step, d.time, d.total_mass, d.right_abs_mass, d.right_support_max
            ));
        }
        let path = out.join(name);
        write_csv(
            &path,
            "step,time,total_mass,right_abs_mass,right_support_max",
            &body,
        )?;
        written.push(path);
    }
    Ok(written)
}

fn write_tables(summary: &TestSummary, out: &Path) -> Result<Vec<PathBuf>> {
    let plan = &summary.plan;
    let mut written = Vec::new();
    let schemes: Vec<SchemeKind> = {
        let mut v = Vec::new();
        for r in &plan.rows {
            if !v.contains(&r.scheme) {
                v.push(r.scheme);
            }
        }
        v
    };
    let suffix = plan
        .variant
        .map(|v| format!("_{}", v.as_str()))
        .unwrap_or_default();
    for scheme in schemes {
        for &p in &plan.p_values {
            let mut body = String::new();
            for row in summary.rows.iter().filter(|r| r.spec.scheme == scheme) {
                if row.skipped.is_some() {
                    continue;
                }
                let Some(&(_, err)) = row
                    .errors
                    .iter()
                    .find(|(pp, _)| (*pp - p).abs() < 1e-12)
                else {
                    continue;
                };
                body.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    fmt_opt(row.spec.eps),
                    row.spec.h,
                    p,
                    err,
                    scheme.label(),
                    row.spec.datum.as_str(),
                    plan.t_eval
                ));
            }
            if body.is_empty() {
                continue;
            }
            let name = format!(
                "{}{}_convergence_{}_p{}.csv",
                plan.test.as_str().to_lowercase(),
                suffix,
                scheme.label(),
                p
            );
            let path = out.join(name);
            write_csv(&path, "eps,h,p,error,scheme,datum,t_eval", &body)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn manifest_json(summary: &TestSummary, files: &[PathBuf], status: &str) -> serde_json::Value {
    let plan = &summary.plan;
    let datums: Vec<&str> = {
        let mut v = Vec::new();
        for r in &plan.rows {
            if !v.contains(&r.datum.as_str()) {
                v.push(r.datum.as_str());
            }
        }
        v
    };
    let schemes: Vec<String> = {
        let mut v = Vec::new();
        for r in &plan.rows {
            let l = r.scheme.label();
            if !v.contains(&l) {
                v.push(l);
            }
        }
        v
    };
    serde_json::json!({
        "test": plan.test.as_str(),
        "variant": plan.variant.map(|v| v.as_str()),
        "status": status,
        "schemes": schemes,
        "datum": datums,
        "kernel_family": plan.kernel_family.map(|f| f.as_str()),
        "eps_list": plan.eps_list,
        "h_rule": plan.h_rule,
        "cfl_ratio": CFL_RATIO,
        "domain": [plan.domain.0, plan.domain.1],
        "t_final": plan.t_eval,
        "p_values": plan.p_values,
        "reference": plan.reference.as_str(),
        "git": git_describe(),
        "rows": summary.rows.iter().map(|r| serde_json::json!({
            "scheme": r.spec.scheme.label(),
            "datum": r.spec.datum.as_str(),
            "eps": r.spec.eps,
            "h": r.spec.h,
            "domain": [r.domain.0, r.domain.1],
            "errors": r.errors.iter().map(|&(p, e)| serde_json::json!({"p": p, "error": e})).collect::<Vec<_>>(),
            "eps_h_ratio_ok": r.eps_h_ratio_ok,
            "wall_s": r.wall_s,
            "skipped": r.skipped,
        })).collect::<Vec<_>>(),
        "rates": summary.rates.iter().map(|r| serde_json::json!({
            "scheme": r.scheme.label(),
            "datum": r.datum.as_str(),
            "eps": r.eps,
            "p": r.p,
            "rate": r.rate,
        })).collect::<Vec<_>>(),
        "timings": { "total_wall_s": summary.total_wall_s },
        "files": files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
    })
}

/// Runs a test with its default parameters (or a full override) and writes
/// convergence CSVs, snapshot CSVs, diagnostics and a JSON manifest into
/// `out`. Tests with panels run both panels when `variant` is None.
pub fn run_test(
    test: TestId,
    variant: Option<Variant>,
    overrides: Option<SweepSpec>,
    out: &Path,
    paper_scale: bool,
) -> Result<Vec<TestSummary>> {
    fs::create_dir_all(out)?;
    let variants: Vec<Option<Variant>> = match (test.has_panels(), variant) {
        (true, None) => vec![Some(Variant::FixedH), Some(Variant::CoupledH)],
        (true, Some(v)) => vec![Some(v)],
        (false, _) => vec![None],
    };
    let mut summaries = Vec::new();
    for v in variants {
        let mut plan = default_plan(test, v, paper_scale)?;
        if let Some(sweep) = &overrides {
            apply_overrides(&mut plan, sweep)?;
        }
        let summary = match execute_plan(&plan) {
            Ok(s) => s,
            Err(e) => {
                // record the failure in a manifest before propagating
                let empty = TestSummary {
                    plan: plan.clone(),
                    rows: vec![],
                    rates: vec![],
                    total_wall_s: 0.0,
                };
                let manifest = manifest_json(&empty, &[], &format!("failed: {e}"));
                let name = manifest_name(&plan);
                let _ = fs::write(out.join(name), serde_json::to_string_pretty(&manifest).unwrap());
                return Err(e);
            }
        };
        let mut files = write_tables(&summary, out)?;
        files.extend(write_diagnostics(&summary, out)?);
        if let Some(snap) = &plan.snapshots {
            files.extend(write_snapshots(&plan, snap, out)?);
        }
        let manifest = manifest_json(&summary, &files, "ok");
        fs::write(
            out.join(manifest_name(&plan)),
            serde_json::to_string_pretty(&manifest).unwrap(),
        )?;
        summaries.push(summary);
    }
    Ok(summaries)
}

fn manifest_name(plan: &TestPlan) -> String {
    match plan.variant {
        Some(v) => format!("{}_{}_manifest.json", plan.test.as_str().to_lowercase(), v.as_str()),
        None => format!("{}_manifest.json", plan.test.as_str().to_lowercase()),
    }
}

fn apply_overrides(plan: &mut TestPlan, sweep: &SweepSpec) -> Result<()> {
    if sweep.eps_values.windows(2).any(|w| w[0] <= w[1]) {
        return Err(SolverError::InvalidConfig(
            "override eps values must be strictly decreasing".into(),
        ));
    }
    if sweep.p_values.iter().any(|&p| p < 1.0) {
        return Err(SolverError::InvalidConfig("override p values must be >= 1".into()));
    }
    let datums: Vec<InitialDatumId> = {
        let mut v = Vec::new();
        for r in &plan.rows {
            if !v.contains(&r.datum) {
                v.push(r.datum);
            }
        }
        v
    };
    let mut rows = Vec::new();
    for &datum in &datums {
        for &scheme in &sweep.schemes {
            for &e in &sweep.eps_values {
                rows.push(RowSpec { scheme, datum, eps: Some(e), h: sweep.h_rule.h_for(e) });
            }
        }
    }
    plan.rows = rows;
    plan.eps_list = sweep.eps_values.clone();
    plan.h_rule = sweep.h_rule.describe();
    plan.t_eval = sweep.t_eval;
    plan.p_values = sweep.p_values.clone();
    Ok(())
}

/// One-off `solve` run for the CLI: marches a single configuration and
/// writes snapshot CSVs plus a manifest.
#[allow(clippy::too_many_arguments)]
pub struct SolveRequest {
    pub problem: Problem,
    pub method: Method,
    pub datum: InitialDatumId,
    pub kernel_family: Option<KernelFamily>,
    pub eps: Option<f64>,
    pub h: f64,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
    pub domain: (f64, f64),
    pub out: PathBuf,
}

pub fn solve(req: &SolveRequest) -> Result<Trajectory> {
    if req.problem == Problem::Local && (req.kernel_family.is_some() || req.eps.is_some()) {
        return Err(SolverError::InvalidConfig(
            "--kernel/--eps are only valid with --problem nonlocal".into(),
        ));
    }
    if req.problem == Problem::Nonlocal && req.eps.is_none() {
        return Err(SolverError::InvalidConfig("--problem nonlocal requires --eps".into()));
    }
    fs::create_dir_all(&req.out)?;
    let scheme = SchemeKind { method: req.method, problem: req.problem };
    let (lo, hi) = commensurate_domain(req.domain.0, req.domain.1, req.h);
    let grid = build_grid(lo, hi, req.h, req.t_final, ghost_width(req.problem, req.eps, req.h))?;
    let family = match req.problem {
        Problem::Nonlocal => Some(req.kernel_family.unwrap_or(KernelFamily::IsotropicEven)),
        Problem::Local => None,
    };
    let kernel = kernel_for(family, req.eps, req.problem)?;
    let cfg = RunConfig {
        scheme,
        grid: grid.clone(),
        datum: req.datum,
        kernel,
        snapshot_times: req.snapshot_times.clone(),
    };
    let start = Instant::now();
    let traj = run(&cfg)?;
    let mut files = Vec::new();
    for field in &traj.snapshots {
        let name = format!("solve_{}_{}_t{}.csv", scheme.label(), req.datum.as_str(), field.time);
        let path = req.out.join(name);
        write_csv(&path, "x_center,rho", &snapshot_csv(&grid, field))?;
        files.push(path);
    }
    let manifest = serde_json::json!({
        "test": "solve",
        "status": "ok",
        "schemes": [scheme.label()],
        "datum": [req.datum.as_str()],
        "kernel_family": family.map(|f| f.as_str()),
        "eps_list": req.eps.map(|e| vec![e]).unwrap_or_default(),
        "h_rule": format!("fixed h = {}", req.h),
        "cfl_ratio": CFL_RATIO,
        "domain": [grid.x_lo, grid.x_hi],
        "t_final": req.t_final,
        "p_values": [],
        "reference": serde_json::Value::Null,
        "git": git_describe(),
        "snapshot_times": req.snapshot_times,
        "timings": { "total_wall_s": start.elapsed().as_secs_f64() },
        "files": files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
    });
    fs::write(
        req.out.join("solve_manifest.json"),
        serde_json::to_string_pretty(&manifest).unwrap(),
    )?;
    Ok(traj)
}
