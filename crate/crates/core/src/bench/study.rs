//! Study drivers: mesh, assemble, solve and measure over lists of `N` and `ε`.

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::elements::{assembly_points, LocalSpace, SpaceKind};
use crate::error::{config, Error, Result};
use crate::fd::{adapt_loop, compute_indicators, fd_solve, AdaptConfig, FDGrid, InitialGrid};
use crate::fem::{assemble, make_stab_plan, solve, Method, Problem, StabConstants};
use crate::interpolation::{interpolate, FeSpace, Interpolant};
use crate::mesh::{build_macro_mesh, build_stype_mesh, MeshFamily, MeshSpec};
use crate::norms::{
    balanced_error, energy_error, fill_orders, lps_norm_error, norm_parts, sd_norm_error, Diff, ErrorRecord, Exact,
};
use crate::postprocess::{postprocess_fn, PostKind};

use super::{problem_example1, problem_example2};

/// Default `N` list of FEM studies.
pub const DEFAULT_N: [usize; 4] = [8, 16, 32, 64];
/// Extra `N` of `--extended` runs.
pub const EXTENDED_N: [usize; 3] = [128, 256, 320];
/// Shishkin and Bakhvalov-S `σ` of the finite-difference studies.
pub const FD_SIGMA: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Convergence,
    Supercloseness,
    Postprocess,
    BalancedNorm,
    EpsUniformity,
    FdIndicator,
    Adapt,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Convergence => "convergence",
            StudyKind::Supercloseness => "supercloseness",
            StudyKind::Postprocess => "postprocess",
            StudyKind::BalancedNorm => "balanced",
            StudyKind::EpsUniformity => "eps-uniformity",
            StudyKind::FdIndicator => "fd-indicator",
            StudyKind::Adapt => "adapt",
        }
    }

    fn is_fd(self) -> bool {
        matches!(self, StudyKind::FdIndicator | StudyKind::Adapt)
    }

    /// Studies of the balanced-norm chapter: bilinear elements on Shishkin meshes.
    fn is_balanced_chapter(self) -> bool {
        matches!(self, StudyKind::BalancedNorm | StudyKind::EpsUniformity)
    }
}

impl FromStr for StudyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "convergence" => StudyKind::Convergence,
            "supercloseness" => StudyKind::Supercloseness,
            "postprocess" => StudyKind::Postprocess,
            "balanced" | "balanced-norm" => StudyKind::BalancedNorm,
            "eps-uniformity" => StudyKind::EpsUniformity,
            "fd-indicator" => StudyKind::FdIndicator,
            "adapt" => StudyKind::Adapt,
            other => return config(format!("unknown study `{other}`")),
        })
    }
}

/// A finite element method or the upwind finite-difference scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMethod {
    Fem(Method),
    FdUpwind,
}

impl StudyMethod {
    pub fn name(self) -> &'static str {
        match self {
            StudyMethod::Fem(m) => m.name(),
            StudyMethod::FdUpwind => "fd-upwind",
        }
    }
}

impl FromStr for StudyMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "fd-upwind" {
            Ok(StudyMethod::FdUpwind)
        } else {
            s.parse().map(StudyMethod::Fem)
        }
    }
}

/// One study. `None` fields take the per-study defaults of [`StudyConfig::sigma`] and [`StudyConfig::mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub method: StudyMethod,
    pub space: SpaceKind,
    pub p: usize,
    pub ns: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub mesh: Option<MeshFamily>,
    pub sigma: Option<f64>,
    pub interp: Interpolant,
    pub constants: StabConstants,
}

impl StudyConfig {
    /// Default configuration for `study` and `method`.
    ///
    /// Balanced-norm studies and the modified SDFEM run bilinear elements on
    /// Shishkin meshes, the other FEM studies `Q_4` on Bakhvalov-S meshes.
    pub fn new(study: StudyKind, method: StudyMethod) -> Self {
        let bilinear = study.is_balanced_chapter() || method == StudyMethod::Fem(Method::ModSdfem);
        let (ns, epsilons) = match study {
            StudyKind::EpsUniformity => (vec![64], (1..=8).map(|k| 10f64.powi(-k)).collect()),
            StudyKind::FdIndicator => (vec![64], (2..=8).map(|k| 10f64.powi(-k)).collect()),
            StudyKind::Adapt => (vec![256], vec![1e-6]),
            _ => (DEFAULT_N.to_vec(), vec![1e-6]),
        };
        Self {
            study,
            method,
            space: SpaceKind::Full,
            p: if bilinear { 1 } else { 4 },
            ns,
            epsilons,
            mesh: None,
            sigma: None,
            interp: Interpolant::Vec,
            constants: StabConstants::default(),
        }
    }

    fn bilinear_chapter(&self) -> bool {
        self.study.is_balanced_chapter() || self.method == StudyMethod::Fem(Method::ModSdfem)
    }

    /// `σ`: explicit value, else 1.5 for finite differences, 5/2 for the
    /// balanced-norm chapter and `p + 3/2` otherwise.
    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(if self.study.is_fd() {
            FD_SIGMA
        } else if self.bilinear_chapter() {
            2.5
        } else {
            self.p as f64 + 1.5
        })
    }

    pub fn mesh(&self) -> MeshFamily {
        self.mesh.unwrap_or(if self.study.is_fd() || self.bilinear_chapter() {
            MeshFamily::Shishkin
        } else {
            MeshFamily::BakhvalovS
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.epsilons.is_empty() {
            return config("study needs at least one N and one epsilon");
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return config(format!("epsilon {e} outside (0, 1]"));
        }
        match (self.study.is_fd(), self.method) {
            (true, StudyMethod::Fem(m)) => {
                return config(format!("study `{}` needs method fd-upwind, got {}", self.study.name(), m.name()))
            }
            (false, StudyMethod::FdUpwind) => {
                return config(format!("study `{}` needs a finite element method", self.study.name()))
            }
            _ => {}
        }
        if !(self.sigma() > 0.0) {
            return config(format!("sigma must be positive, got {}", self.sigma()));
        }
        if !self.study.is_fd() {
            LocalSpace::new(self.p, self.space)?;
        }
        Ok(())
    }
}

/// Norm values at one `(N, ε)`.
struct Point {
    n: usize,
    dofs: usize,
    values: Vec<(String, f64)>,
    wall_time: f64,
}

fn eps_label(eps: f64) -> String {
    format!("{eps:e}")
}

fn mesh_for(cfg: &StudyConfig, n: usize, eps: f64, beta: f64) -> Result<crate::mesh::TensorMesh> {
    build_stype_mesh(&MeshSpec::new(cfg.mesh(), n, eps, cfg.sigma(), beta))
}

fn fem_point(cfg: &StudyConfig, method: Method, n: usize, eps: f64) -> Result<Point> {
    let start = Instant::now();
    let problem = problem_example1(eps);
    let exact = problem.exact.clone().expect("manufactured problem has an exact solution");
    let gamma = problem.gamma;
    let mesh = mesh_for(cfg, n, eps, problem.beta)?;
    let local = LocalSpace::new(cfg.p, cfg.space)?;
    let space = FeSpace::new(mesh.clone(), local.clone())?;
    let plan = make_stab_plan(method, &mesh, &local, eps, cfg.constants)?;
    let system = assemble(&problem, &space, &plan)?;
    let u = solve(&system)?;
    let np = assembly_points(cfg.p);
    let mut values = Vec::new();
    match cfg.study {
        StudyKind::Convergence => {
            values.push(("energy".to_string(), energy_error(&exact, &u, gamma, eps)?));
            match method {
                Method::Sdfem | Method::ModSdfem => values.push(("sd".into(), sd_norm_error(&problem, &plan, &u)?)),
                Method::Lps => values.push(("lps".into(), lps_norm_error(&problem, &plan, &u)?)),
                Method::Galerkin => {}
            }
        }
        StudyKind::BalancedNorm => {
            values.push(("balanced".into(), balanced_error(&exact, &u, gamma, eps)?));
            values.push(("energy".into(), energy_error(&exact, &u, gamma, eps)?));
        }
        StudyKind::EpsUniformity => {
            let tag = eps_label(eps);
            values.push((format!("balanced[eps={tag}]"), balanced_error(&exact, &u, gamma, eps)?));
            values.push((format!("energy[eps={tag}]"), energy_error(&exact, &u, gamma, eps)?));
        }
        StudyKind::Supercloseness => {
            let ui = interpolate(&|x, y| exact(x, y)[0], &space, cfg.interp)?;
            let d = norm_parts(&Diff(&u, &ui), &mesh, np)?;
            let name = cfg.interp.name();
            values.push((format!("super_energy:{name}"), d.energy(gamma, eps)));
            values.push((format!("super_balanced:{name}"), d.balanced(gamma, eps)));
        }
        StudyKind::Postprocess => {
            let macro_mesh = build_macro_mesh(&mesh)?;
            let kinds: &[PostKind] =
                if cfg.p == 1 { &[PostKind::Biquadratic] } else { &[PostKind::Vec, PostKind::GaussLobatto] };
            for &kind in kinds {
                let post = postprocess_fn(&|x, y| u.eval(x, y), &macro_mesh, kind, cfg.p)?;
                let d = norm_parts(&Diff(&Exact(&exact), &post), &mesh, np + 1)?;
                values.push((format!("post_energy:{}", kind.name()), d.energy(gamma, eps)));
                values.push((format!("post_balanced:{}", kind.name()), d.balanced(gamma, eps)));
            }
        }
        StudyKind::FdIndicator | StudyKind::Adapt => unreachable!("validated"),
    }
    Ok(Point { n, dofs: system.n(), values, wall_time: start.elapsed().as_secs_f64() })
}

/// `u^B` error and indicator aggregates on an a-priori mesh.
fn fd_indicator_point(cfg: &StudyConfig, n: usize, eps: f64) -> Result<Point> {
    let start = Instant::now();
    let problem = problem_example2(eps);
    let grid = FDGrid::from_mesh(&mesh_for(cfg, n, eps, problem.beta)?)?;
    let u = fd_solve(&problem, &grid)?;
    let report = compute_indicators(&u, eps);
    let exact = problem.exact.as_ref().expect("manufactured problem has an exact solution");
    let tag = eps_label(eps);
    let values = vec![
        (format!("linf[eps={tag}]"), u.linf_error(exact, 4)),
        (format!("eta[eps={tag}]"), report.eta),
        (format!("eta_modified[eps={tag}]"), report.eta_modified),
        (format!("eta_tilde[eps={tag}]"), report.eta_tilde),
    ];
    Ok(Point { n, dofs: grid.dofs(), values, wall_time: start.elapsed().as_secs_f64() })
}

/// A-priori meshes against the adaptive loop at a budget of `N²` cells.
fn adapt_point(cfg: &StudyConfig, n: usize, eps: f64) -> Result<Vec<Point>> {
    let problem = problem_example2(eps);
    let exact = problem.exact.as_ref().expect("manufactured problem has an exact solution");
    let mut out = Vec::new();
    for family in [MeshFamily::Shishkin, MeshFamily::BakhvalovS] {
        let start = Instant::now();
        let spec = MeshSpec::new(family, n, eps, cfg.sigma(), problem.beta);
        let grid = FDGrid::from_mesh(&build_stype_mesh(&spec)?)?;
        let err = fd_solve(&problem, &grid)?.linf_error(exact, 4);
        out.push(Point {
            n,
            dofs: grid.dofs(),
            values: vec![(format!("linf:{}", family.name()), err)],
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    let starts = [("adapt-equidistant", InitialGrid::Equidistant(4)), ("adapt-shishkin", InitialGrid::Shishkin { n: 4, sigma: cfg.sigma() })];
    for (name, initial) in starts {
        let start = Instant::now();
        let steps = adapt_loop(&problem, &AdaptConfig { max_dofs: n * n, initial, ..Default::default() })?;
        let last = steps.last().expect("the loop performs at least one solve");
        out.push(Point {
            n,
            dofs: last.dofs,
            values: vec![(format!("linf:{name}"), last.true_error.unwrap_or(f64::NAN))],
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

/// Runs every `(N, ε)` point of `cfg` and returns one record per norm value.
///
/// Points run concurrently; records follow the order of `ns` then `epsilons`,
/// and orders are filled for consecutive doubling `N` of the same norm.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<ErrorRecord>> {
    cfg.validate()?;
    let pairs: Vec<(usize, f64)> = cfg.ns.iter().flat_map(|&n| cfg.epsilons.iter().map(move |&e| (n, e))).collect();
    let context = |n: usize, e: f64, err: Error| match err {
        Error::Numerical(m) => Error::Numerical(format!("{} study at N = {n}, eps = {e:e}: {m}", cfg.study.name())),
        Error::Config(m) => Error::Config(format!("{} study at N = {n}, eps = {e:e}: {m}", cfg.study.name())),
        other => other,
    };
    let points: Vec<Vec<Point>> = pairs
        .par_iter()
        .map(|&(n, e)| {
            let r = match (cfg.study, cfg.method) {
                (StudyKind::Adapt, _) => adapt_point(cfg, n, e),
                (StudyKind::FdIndicator, _) => fd_indicator_point(cfg, n, e).map(|p| vec![p]),
                (_, StudyMethod::Fem(m)) => fem_point(cfg, m, n, e).map(|p| vec![p]),
                (_, StudyMethod::FdUpwind) => unreachable!("validated"),
            };
            r.map_err(|err| context(n, e, err))
        })
        .collect::<Result<_>>()?;
    let space = if cfg.study.is_fd() { "fd".to_string() } else { cfg.space.name().to_string() };
    let p = if cfg.study.is_fd() { 1 } else { cfg.p };
    let mut records: Vec<ErrorRecord> = points
        .into_iter()
        .flatten()
        .flat_map(|pt| {
            let space = space.clone();
            pt.values.into_iter().map(move |(norm, value)| ErrorRecord {
                n: pt.n,
                dofs: pt.dofs,
                method: cfg.method.name().to_string(),
                space: space.clone(),
                p,
                norm,
                value,
                order: None,
                ln_order: None,
                wall_time: pt.wall_time,
            })
        })
        .collect();
    fill_orders(&mut records)?;
    Ok(records)
}

/// CSV with header `N,dofs,method,space,p,norm,value,order,ln_order`.
pub fn write_records_csv(records: &[ErrorRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(["N", "dofs", "method", "space", "p", "norm", "value", "order", "ln_order"])?;
    }
    w.flush()?;
    Ok(())
}

/// Problem used by a study: example 1 for finite elements, example 2 for finite differences.
pub fn study_problem(cfg: &StudyConfig, eps: f64) -> Problem {
    if cfg.study.is_fd() {
        problem_example2(eps)
    } else {
        problem_example1(eps)
    }
}
