use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use layerfem_core::bench::{
    run_study, study_problem, write_records_csv, StudyConfig, StudyKind, StudyMethod, EXTENDED_N, FD_SIGMA,
};
use layerfem_core::elements::{LocalSpace, SpaceKind};
use layerfem_core::fd::{adapt_loop, write_adapt_csv, AdaptConfig, IndicatorForm, InitialGrid};
use layerfem_core::fem::{assemble, make_stab_plan};
use layerfem_core::interpolation::{FeSpace, Interpolant};
use layerfem_core::mesh::{build_stype_mesh, MeshFamily, MeshSpec};
use layerfem_core::{Error, Result};

#[derive(Parser)]
#[command(name = "layerfem", version, about = "Layer-adapted FEM and FD experiments for convection-diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence-type study and write its CSV.
    Study(StudyArgs),
    /// Mesh utilities.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Run the adaptive finite-difference loop and write its trace.
    Adapt(AdaptArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// convergence | supercloseness | postprocess | balanced | eps-uniformity | fd-indicator | adapt
    #[arg(long)]
    study: StudyKind,
    /// galerkin | sdfem | lps | modsdfem | fd-upwind
    #[arg(long)]
    method: StudyMethod,
    /// full | serendipity
    #[arg(long)]
    space: Option<SpaceKind>,
    #[arg(long)]
    p: Option<usize>,
    /// shishkin | bakhvalov-s | poly-s:<m> | mod-bakhvalov-s
    #[arg(long)]
    mesh: Option<MeshFamily>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Comma-separated list of cell counts per direction.
    #[arg(long = "N", value_delimiter = ',')]
    n: Vec<usize>,
    /// vec | gl | eq
    #[arg(long)]
    interp: Option<Interpolant>,
    #[arg(long)]
    out: PathBuf,
    /// Append N = 128, 256, 320.
    #[arg(long)]
    extended: bool,
    /// Use the unclamped SDFEM parameters.
    #[arg(long)]
    no_clamp: bool,
    /// Also write the system matrix of the first (N, eps) point as `row col value` lines.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MeshAction {
    /// Print the nodes of an S-type mesh.
    Dump {
        #[arg(long)]
        mesh: MeshFamily,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Equidistant,
    Shishkin,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Full,
    Modified,
}

#[derive(Args)]
struct AdaptArgs {
    #[arg(long, value_enum, default_value = "equidistant")]
    init: Init,
    /// Cells per direction of the initial grid.
    #[arg(long, default_value_t = 4)]
    init_n: usize,
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    #[arg(long, default_value_t = 65536)]
    max_dofs: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Shishkin initial grid parameter.
    #[arg(long, default_value_t = FD_SIGMA)]
    sigma: f64,
    #[arg(long, value_enum, default_value = "modified")]
    form: Form,
    #[arg(long)]
    out: PathBuf,
}

fn study(a: StudyArgs) -> Result<()> {
    let mut cfg = StudyConfig::new(a.study, a.method);
    if let Some(s) = a.space {
        cfg.space = s;
    }
    if let Some(p) = a.p {
        cfg.p = p;
    }
    cfg.mesh = a.mesh;
    cfg.sigma = a.sigma;
    if !a.eps.is_empty() {
        cfg.epsilons = a.eps;
    }
    if !a.n.is_empty() {
        cfg.ns = a.n;
    }
    if a.extended {
        for n in EXTENDED_N {
            if !cfg.ns.contains(&n) {
                cfg.ns.push(n);
            }
        }
    }
    if let Some(i) = a.interp {
        cfg.interp = i;
    }
    cfg.constants.clamp = !a.no_clamp;
    cfg.validate()?;
    if let Some(path) = &a.dump_matrix {
        dump_matrix(&cfg, path)?;
    }
    let records = run_study(&cfg)?;
    write_records_csv(&records, &a.out)?;
    eprintln!("wrote {} rows to {}", records.len(), a.out.display());
    Ok(())
}

fn dump_matrix(cfg: &StudyConfig, path: &PathBuf) -> Result<()> {
    let StudyMethod::Fem(method) = cfg.method else {
        return Err(Error::Config("--dump-matrix needs a finite element method".into()));
    };
    let (n, eps) = (cfg.ns[0], cfg.epsilons[0]);
    let problem = study_problem(cfg, eps);
    let mesh = build_stype_mesh(&MeshSpec::new(cfg.mesh(), n, eps, cfg.sigma(), problem.beta))?;
    let local = LocalSpace::new(cfg.p, cfg.space)?;
    let space = FeSpace::new(mesh.clone(), local.clone())?;
    let plan = make_stab_plan(method, &mesh, &local, eps, cfg.constants)?;
    let system = assemble(&problem, &space, &plan)?;
    system.write_coo(BufWriter::new(File::create(path)?))
}

fn mesh(action: MeshAction) -> Result<()> {
    let MeshAction::Dump { mesh, n, eps, sigma, beta, out } = action;
    let m = build_stype_mesh(&MeshSpec::new(mesh, n, eps, sigma, beta))?;
    let text = m.dump(&mesh.name(), n, eps, sigma);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn adapt(a: AdaptArgs) -> Result<()> {
    let initial = match a.init {
        Init::Equidistant => InitialGrid::Equidistant(a.init_n),
        Init::Shishkin => InitialGrid::Shishkin { n: a.init_n, sigma: a.sigma },
    };
    let form = match a.form {
        Form::Full => IndicatorForm::Full,
        Form::Modified => IndicatorForm::Modified,
    };
    if !(a.eps > 0.0 && a.eps <= 1.0) {
        return Err(Error::Config(format!("epsilon {} outside (0, 1]", a.eps)));
    }
    let cfg = AdaptConfig { alpha: a.alpha, max_dofs: a.max_dofs, initial, form, ..Default::default() };
    let problem = layerfem_core::bench::problem_example2(a.eps);
    let steps = adapt_loop(&problem, &cfg)?;
    write_adapt_csv(&steps, &a.out)?;
    let last = steps.last().expect("the loop performs at least one solve");
    eprintln!("{} solves, final grid {} x {}, wrote {}", steps.len(), last.nx, last.ny, a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Study(a) => study(a),
        Command::Mesh { action } => mesh(action),
        Command::Adapt(a) => adapt(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
