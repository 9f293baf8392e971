use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use richards_core::harness::output::write_outputs;
use richards_core::harness::{run, sweep, Case, ConfigFile, ConfigOverrides, MeshSpec, RunConfig};
use richards_core::hydro::{kirchhoff_quadrature, log_spaced_pressures, select_eta_mode, BrooksCorey, EtaMode, Formulation};
use richards_core::mesh::load_mesh;
use richards_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NEWTON: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "richards", version, about = "Finite-volume Richards equation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its outputs.
    Run(RunArgs),
    /// Run the `[sweep]` table of a configuration file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a mesh file is admissible for two-point fluxes.
    ValidateMesh { path: PathBuf },
    /// Compare the closed-form Kirchhoff transform with quadrature.
    OracleKirchhoff {
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        pb: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<Case>,
    /// tau | u
    #[arg(long)]
    formulation: Option<Formulation>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pb: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// NxM or file:PATH
    #[arg(long)]
    mesh: Option<MeshSpec>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    adaptive_dt: bool,
    /// paper | derived
    #[arg(long)]
    eta_mode: Option<EtaMode>,
    /// Skip the reference run and the err_s / err_u columns.
    #[arg(long)]
    no_reference: bool,
}

impl RunArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            case: self.case,
            formulation: self.formulation,
            beta: self.beta,
            p_b: self.pb,
            eta_mode: self.eta_mode,
            mesh: self.mesh.clone(),
            dt: self.dt,
            t_end: self.tend,
            eps: self.eps,
            adaptive_dt: self.adaptive_dt.then_some(true),
            no_reference: self.no_reference.then_some(true),
            output: self.out.clone(),
            ..ConfigOverrides::default()
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NewtonBreakdown { .. } | Error::SingularMatrix(_) => EXIT_NEWTON,
        _ => EXIT_CONFIG,
    }
}

fn load_file(path: &Path) -> Result<ConfigFile, Error> {
    // a missing or unreadable file is a configuration problem, not an output one
    ConfigFile::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn cmd_run(args: &RunArgs) -> Result<ExitCode, Error> {
    let file = match &args.config {
        Some(p) => load_file(p)?.run,
        None => ConfigOverrides::default(),
    };
    let config = file.merge(args.overrides()).resolve()?;
    let result = run(&config)?;
    let out = config.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    for p in write_outputs(&result, &out)? {
        println!("wrote {}", p.display());
    }
    println!(
        "{} steps, mean Newton iterations {:.3}, total {}",
        result.trajectory.steps(),
        result.mean_newton_iters(),
        result.total_newton_iters
    );
    if let Some(e) = result.errors {
        println!("err_s = {:e}, err_u = {:e}", e.err_s, e.err_u);
    }
    if let Some(m) = result.mass_error {
        println!("mass error = {m:e}");
    }
    match &result.failure {
        Some(msg) => {
            eprintln!("error: {msg}");
            Ok(ExitCode::from(EXIT_NEWTON))
        }
        None => Ok(ExitCode::SUCCESS),
    }
}

fn cmd_sweep(config: &Path, out: Option<&Path>) -> Result<ExitCode, Error> {
    let file = load_file(config)?;
    let spec = file.sweep.clone().ok_or_else(|| Error::Config(format!("{}: no [sweep] table", config.display())))?;
    let base: RunConfig = file.run.resolve()?;
    let result = sweep(&base, &spec)?;
    let dir = out.map(Path::to_path_buf).or_else(|| base.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("summary.csv");
    std::fs::write(&path, result.summary_csv())?;
    println!("wrote {} ({} runs)", path.display(), result.rows.len());
    for (beta, r) in &result.references {
        if let Err(msg) = r {
            eprintln!("reference run for beta = {beta} failed: {msg}");
        }
    }
    for row in &result.rows {
        let failed = match &row.outcome {
            Ok(r) => r.failure.clone(),
            Err(msg) => Some(msg.clone()),
        };
        if let Some(msg) = failed {
            eprintln!("beta = {}, eps = {:e}, {}: {msg}", row.config.beta, row.config.eps, row.config.formulation);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate_mesh(path: &Path) -> Result<ExitCode, Error> {
    let mesh = load_mesh(path)?;
    println!(
        "{}: admissible, {} cells, {} edges ({} interior, {} Dirichlet), measure {}",
        path.display(),
        mesh.num_cells(),
        mesh.num_edges(),
        mesh.interior_edges().count(),
        mesh.dirichlet_edges().count(),
        mesh.measure()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(beta: f64, pb: f64, points: usize) -> Result<ExitCode, Error> {
    let (chosen, paper_err, derived_err) = select_eta_mode(pb, beta)?;
    println!("# max relative error: paper {paper_err:e}, derived {derived_err:e}; selected {chosen}");
    println!("p,quadrature,closed_form,rel_err");
    let model = BrooksCorey::new(pb, beta, chosen)?;
    for p in log_spaced_pressures(pb, points) {
        let q = kirchhoff_quadrature(&model, p)?;
        let c = model.kirchhoff_of_pressure(p);
        println!("{p:.16e},{q:.16e},{c:.16e},{:.3e}", ((c - q) / q).abs());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep { config, out } => cmd_sweep(config, out.as_deref()),
        Command::ValidateMesh { path } => cmd_validate_mesh(path),
        Command::OracleKirchhoff { beta, pb, points } => cmd_oracle(*beta, *pb, *points),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
