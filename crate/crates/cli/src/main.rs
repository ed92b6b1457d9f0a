use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use apsn::analysis::{write_convergence_csv, AngularFluxField, ConvergenceRow};
use apsn::assembly::Scheme;
use apsn::cases::{diffusion_study, locking_sweep, manufactured_study, CaseName, Discretization, DESK_MESH_SIDES};
use apsn::config::Config;
use apsn::output::{write_flux_csv, write_vtk};
use apsn::solver::SolveMethod;

mod verify;

#[derive(Parser)]
#[command(
    name = "apsn",
    version,
    about = "Positive asymptotic-preserving discrete-ordinates solver"
)]
struct Cli {
    /// Log progress to standard error (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Galerkin,
    Gv,
    Ap,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Galerkin => Scheme::Galerkin,
            SchemeArg::Gv => Scheme::GraphViscosity,
            SchemeArg::Ap => Scheme::Ap,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Direct,
    Si,
}

impl From<SolverArg> for SolveMethod {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Direct => SolveMethod::DirectLu,
            SolverArg::Si => SolveMethod::SourceIteration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Manufactured,
    Diffusion,
    Locking,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a TOML config file.
    Solve {
        config: PathBuf,
        /// Overrides `solver.scheme`.
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        /// Overrides `solver.method`.
        #[arg(long, value_enum)]
        solver: Option<SolverArg>,
        /// Directory for `<stem>.csv`, `<stem>.vtk` and `<stem>.mtx`, named after the config file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the assembled matrix in Matrix Market format.
        #[arg(long)]
        matrix: bool,
    },
    /// Run a named benchmark problem.
    Case {
        /// table3-case1..4, boundary or reflection.
        name: CaseName,
        /// Nodes per side of the square mesh (2D cases only).
        #[arg(long, default_value_t = 41)]
        n: usize,
        #[arg(long, value_enum, default_value = "ap")]
        scheme: SchemeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh-refinement study; prints a CSV table.
    Convergence {
        study: Study,
        /// Diffusive scaling for the diffusion study.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Nodes per side of each mesh.
        #[arg(long, value_delimiter = ',', default_values_t = DESK_MESH_SIDES)]
        sides: Vec<usize>,
        /// S_N order for the manufactured study.
        #[arg(long, default_value_t = 6)]
        order: usize,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check quadrature, operator and bound invariants on smoke problems.
    Verify,
}

/// Input problems map to the usage exit code, everything else to 1.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<apsn::Error>() {
        Some(apsn::Error::Config(_) | apsn::Error::Parse { .. } | apsn::Error::InvalidArgument(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Solve {
            config,
            scheme,
            solver,
            out,
            matrix,
        } => {
            if !config.is_file() {
                return Err(apsn::Error::Config(format!("no config file at {}", config.display())).into());
            }
            let cfg = Config::from_path(&config).with_context(|| format!("reading {}", config.display()))?;
            let disc = cfg.discretization()?;
            let scheme = scheme.map_or_else(|| cfg.scheme(), |s| Ok(s.into()))?;
            let mut opts = cfg.solver_options()?;
            if let Some(s) = solver {
                opts.method = s.into();
            }
            let label = config
                .file_stem()
                .map_or("run".into(), |s| s.to_string_lossy().into_owned());
            run_one(&label, &disc, scheme, &opts, out.as_deref(), matrix)
        }
        Command::Case { name, n, scheme, out } => {
            let disc = name.build(n)?;
            run_one(
                &name.to_string(),
                &disc,
                scheme.into(),
                &Default::default(),
                out.as_deref(),
                false,
            )
        }
        Command::Convergence {
            study,
            eps,
            sides,
            order,
            out,
        } => {
            let mut sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(create(p)?)),
                None => Box::new(io::stdout().lock()),
            };
            match study {
                Study::Manufactured => table(&manufactured_study(&sides, order)?, &mut sink)?,
                Study::Diffusion => table(&diffusion_study(&sides, eps)?, &mut sink)?,
                Study::Locking => {
                    let n = *sides.last().context("no mesh size given")?;
                    let rep = locking_sweep(n, &[1e-2, 1e-4, 1e-6])?;
                    writeln!(sink, "epsilon,gv_spread,ap_spread,limit_spread")?;
                    for r in &rep.rows {
                        writeln!(
                            sink,
                            "{:.6e},{:.6e},{:.6e},{:.6e}",
                            r.epsilon, r.gv_spread, r.ap_spread, rep.limit_spread
                        )?;
                    }
                }
            }
            sink.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify => {
            let failures = verify::run(&mut io::stdout().lock())?;
            if failures == 0 {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("{failures} invariant check(s) failed");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn table(rows: &[ConvergenceRow], sink: &mut dyn Write) -> Result<()> {
    write_convergence_csv(rows, sink)?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn run_one(
    label: &str,
    disc: &Discretization,
    scheme: Scheme,
    opts: &apsn::cases::SolverOptions,
    out: Option<&Path>,
    matrix: bool,
) -> Result<ExitCode> {
    let sol = disc.solve(scheme, opts)?;
    let bounds = disc.bounds(scheme, &sol.field);
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "case,scheme,nodes,directions,min_psi,max_psi,bounds")?;
    writeln!(
        stdout,
        "{label},{},{},{},{:.6e},{:.6e},{}",
        scheme_name(scheme),
        disc.mesh.n_nodes(),
        disc.quad.len(),
        sol.field.min(),
        sol.field.max(),
        match &bounds {
            None => "n/a",
            Some(b) if b.passed() => "ok",
            Some(_) => "violated",
        }
    )?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_fields(disc, &sol.field, dir, label)?;
        if matrix {
            let sys = disc.system(scheme).to_sparse();
            sys.matrix
                .write_matrix_market(BufWriter::new(create(&dir.join(format!("{label}.mtx")))?))?;
        }
    }
    if let Some(b) = bounds.filter(|b| !b.passed()) {
        for v in &b.violations {
            eprintln!("bound violation: {v}");
        }
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Galerkin => "galerkin",
        Scheme::GraphViscosity => "gv",
        Scheme::Ap => "ap",
    }
}

fn write_fields(disc: &Discretization, field: &AngularFluxField, dir: &Path, label: &str) -> Result<()> {
    let mut csv = BufWriter::new(create(&dir.join(format!("{label}.csv")))?);
    write_flux_csv(&disc.mesh, field, &disc.quad, &mut csv)?;
    csv.flush()?;
    let angles: Vec<usize> = (0..disc.quad.len()).collect();
    let mut vtk = BufWriter::new(create(&dir.join(format!("{label}.vtk")))?);
    write_vtk(&disc.mesh, field, &disc.quad, &angles, &mut vtk)?;
    vtk.flush()?;
    Ok(())
}
