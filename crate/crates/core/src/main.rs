use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use damsolve::io::{
    load_config, write_error_table, write_field, write_manifest, RunConfig, RunManifest,
};
use damsolve::{
    build_coarse_mesh, build_fine_mesh, build_partition_of_unity, build_spectral_basis,
    compute_weight, energy_error, run_to_steady, saturated_region_connected_to_bottom,
    save_field, CoarseSpace, ErrorReport, InitKind, Operators, PressureSolver, Result,
};

/// Free-boundary dam seepage solver: fine reference and multiscale modes.
#[derive(Parser)]
#[command(name = "damsolve", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fine,
    Gmsfem,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Coefficient seed (overrides a seeded generator in the config).
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        if let Some(dir) = &self.out_dir {
            cfg.output.dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            if let damsolve::io::CoefficientSection::ChannelsAndInclusions {
                seed: ref mut s,
                ..
            } = cfg.coefficient
            {
                *s = seed;
            } else {
                log::warn!("--seed ignored: coefficient is not a seeded generator");
            }
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve to steady state in one mode and write the resulting fields.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "fine")]
        mode: Mode,
        /// Enrichment count per interior coarse node (gmsfem mode).
        #[arg(long, default_value_t = 4)]
        li: usize,
    },
    /// Solve fine once, then every configured enrichment level; write the
    /// energy-error table.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Build and store the multiscale artifacts (coefficient, partition of
    /// unity sum, spectrum) without time stepping.
    Basis {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        li: usize,
    },
    /// Validate a configuration file and report the derived sizes.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

/// Everything both solve commands need, assembled from a config.
struct Problem {
    cfg: RunConfig,
    ops: Operators,
    coarse: damsolve::CoarseMesh,
}

impl Problem {
    fn build(cfg: RunConfig) -> Result<Self> {
        let spec = cfg.mesh.boundary_spec()?;
        let mesh = build_fine_mesh(cfg.mesh.fine[0], cfg.mesh.fine[1], spec)?;
        let coarse = build_coarse_mesh(&mesh, cfg.mesh.coarse[0], cfg.mesh.coarse[1])?;
        let kappa = cfg.coefficient.build(&mesh)?;
        let ops = Operators::assemble(mesh, kappa, &cfg.solver.solver_config())?;
        Ok(Self { cfg, ops, coarse })
    }

    fn spectral_space(&self, li: usize) -> Result<CoarseSpace> {
        let t = Instant::now();
        let pu = build_partition_of_unity(&self.ops.mesh, &self.coarse, &self.ops.kappa)?;
        let weight = compute_weight(&self.ops.mesh, &self.coarse, &self.ops.kappa, &pu);
        let dirichlet: Vec<usize> = self.ops.dirichlet.iter().map(|&(n, _)| n).collect();
        let space = build_spectral_basis(
            &self.ops.mesh,
            &self.coarse,
            &self.ops.kappa,
            &weight,
            li,
            &pu,
            &dirichlet,
        )?;
        log::info!(
            "multiscale space: dim {} (levels {li}) in {:.2}s",
            space.dim(),
            t.elapsed().as_secs_f64()
        );
        Ok(space)
    }
}

fn solve(
    problem: &Problem,
    solver: &PressureSolver,
    label: &str,
) -> Result<damsolve::RunResult> {
    let t = Instant::now();
    let run = run_to_steady(
        &problem.ops,
        solver,
        &problem.cfg.solver.solver_config(),
        InitKind::WetBelowHeads,
    )?;
    log::info!(
        "{label}: {} steps, converged {}, last increment {:.3e}, θ overshoot {:.3e}, {:.2}s",
        run.steps,
        run.converged,
        run.increment,
        run.overshoot,
        t.elapsed().as_secs_f64()
    );
    if !saturated_region_connected_to_bottom(&problem.ops.mesh, &run.state.theta, 1.0 - 1e-6) {
        log::warn!("{label}: saturated region is not connected to the bottom");
    }
    Ok(run)
}

fn write_state(
    problem: &Problem,
    run: &damsolve::RunResult,
    prefix: &str,
    files: &mut Vec<String>,
) -> Result<()> {
    let out = &problem.cfg.output;
    let ext = match out.format {
        damsolve::io::FieldFormat::Csv => "csv",
        damsolve::io::FieldFormat::Vtk => "vtk",
    };
    let mesh = &problem.ops.mesh;
    let pressure = out.dir.join(format!("{prefix}_pressure.{ext}"));
    write_field(&pressure, mesh, "pressure", &run.state.pressure, &out.format)?;
    files.push(pressure.display().to_string());
    if out.fields {
        let theta = out.dir.join(format!("{prefix}_theta.{ext}"));
        write_field(&theta, mesh, "theta", &run.state.theta, &out.format)?;
        files.push(theta.display().to_string());
    }
    Ok(())
}

fn finish(problem: &Problem, command: &str, converged: bool, steps: usize, files: Vec<String>) -> Result<()> {
    // manifest entries are relative to the output directory so identical
    // runs into different directories stay byte-identical
    let dir_prefix = format!("{}/", problem.cfg.output.dir.display());
    let files: Vec<String> = files
        .into_iter()
        .map(|f| f.strip_prefix(&dir_prefix).map(str::to_string).unwrap_or(f))
        .collect();
    let manifest = RunManifest {
        command: command.to_string(),
        fine: problem.cfg.mesh.fine,
        coarse: problem.cfg.mesh.coarse,
        coefficient: problem.cfg.coefficient.tag().to_string(),
        converged,
        steps,
        files,
    };
    let path = problem.cfg.output.dir.join("manifest.toml");
    write_manifest(&path, &manifest)
}

fn cmd_run(common: Common, mode: Mode, li: usize) -> Result<()> {
    let problem = Problem::build(common.load()?)?;
    std::fs::create_dir_all(&problem.cfg.output.dir)?;
    let mut files = Vec::new();
    let (run, prefix) = match mode {
        Mode::Fine => {
            let solver = problem.ops.fine_solver()?;
            (solve(&problem, &solver, "fine")?, "fine".to_string())
        }
        Mode::Gmsfem => {
            let space = problem.spectral_space(li)?;
            let solver = problem.ops.coarse_solver(space)?;
            (
                solve(&problem, &solver, &format!("gmsfem(levels {li})"))?,
                format!("gmsfem_l{li}"),
            )
        }
    };
    if problem.cfg.output.fields {
        let kpath = problem.cfg.output.dir.join("coefficient.csv");
        save_field(&problem.ops.kappa, &kpath)?;
        files.push(kpath.display().to_string());
    }
    write_state(&problem, &run, &prefix, &mut files)?;
    finish(&problem, "run", run.converged, run.steps, files)
}

fn cmd_sweep(common: Common) -> Result<()> {
    let problem = Problem::build(common.load()?)?;
    std::fs::create_dir_all(&problem.cfg.output.dir)?;
    let mut files = Vec::new();

    let fine_solver = problem.ops.fine_solver()?;
    let fine = solve(&problem, &fine_solver, "fine")?;
    write_state(&problem, &fine, "fine", &mut files)?;

    let levels = problem.cfg.gmsfem.levels.clone();
    let max_li = levels.iter().copied().max().unwrap_or(1);
    let space = problem.spectral_space(max_li)?;

    let mut rows = Vec::new();
    for &li in &levels {
        let solver = problem.ops.coarse_solver(space.truncated(li))?;
        let run = solve(&problem, &solver, &format!("gmsfem(levels {li})"))?;
        let err = energy_error(
            &fine.state.pressure,
            &run.state.pressure,
            &problem.ops.stiffness,
        );
        println!(
            "levels {li:>2}  dim {:>5}  energy error {err:8.4}%  steps {}/{}",
            solver.dim(),
            run.steps,
            fine.steps
        );
        rows.push(ErrorReport {
            coarse_dim: solver.dim(),
            li,
            energy_error_percent: err,
            fine_steps: fine.steps,
            coarse_steps: run.steps,
        });
        if li == max_li {
            write_state(&problem, &run, &format!("gmsfem_l{li}"), &mut files)?;
        }
    }
    let table = problem.cfg.output.dir.join("error_table.csv");
    write_error_table(&table, &rows)?;
    files.push(table.display().to_string());
    finish(&problem, "sweep", fine.converged, fine.steps, files)
}

fn cmd_basis(common: Common, li: usize) -> Result<()> {
    let problem = Problem::build(common.load()?)?;
    std::fs::create_dir_all(&problem.cfg.output.dir)?;
    let mut files = Vec::new();

    let kpath = problem.cfg.output.dir.join("coefficient.csv");
    save_field(&problem.ops.kappa, &kpath)?;
    files.push(kpath.display().to_string());

    let pu = build_partition_of_unity(&problem.ops.mesh, &problem.coarse, &problem.ops.kappa)?;
    let mut pu_sum = vec![0.0; problem.ops.mesh.n_nodes()];
    for chi in &pu.chi {
        for (s, c) in pu_sum.iter_mut().zip(chi) {
            *s += c;
        }
    }
    let pu_path = problem.cfg.output.dir.join("partition_sum.csv");
    write_field(
        &pu_path,
        &problem.ops.mesh,
        "partition_sum",
        &pu_sum,
        &damsolve::io::FieldFormat::Csv,
    )?;
    files.push(pu_path.display().to_string());

    let space = problem.spectral_space(li)?;
    let spath = problem.cfg.output.dir.join("spectrum.csv");
    let mut text = String::from("coarse_node,level,eigenvalue\n");
    for col in &space.columns {
        use std::fmt::Write as _;
        let sigma = space.eigenvalues[col.coarse_node][col.level];
        let _ = writeln!(
            text,
            "{},{},{}",
            col.coarse_node,
            col.level,
            damsolve::io::format_f64(sigma)
        );
    }
    std::fs::write(&spath, text)?;
    files.push(spath.display().to_string());
    println!("multiscale space dim {} written to {}", space.dim(), problem.cfg.output.dir.display());
    finish(&problem, "basis", true, 0, files)
}

fn cmd_check(common: Common) -> Result<()> {
    let problem = Problem::build(common.load()?)?;
    let mesh = &problem.ops.mesh;
    println!(
        "fine {}x{} ({} nodes), coarse {}x{}, dirichlet nodes {}, seepage nodes {}, coefficient '{}' contrast {}",
        mesh.nx,
        mesh.ny,
        mesh.n_nodes(),
        problem.coarse.nx,
        problem.coarse.ny,
        problem.ops.dirichlet.len(),
        problem.ops.gamma0_nodes.len(),
        problem.cfg.coefficient.tag(),
        problem.ops.kappa.contrast(),
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, mode, li } => cmd_run(common, mode, li),
        Command::Sweep { common } => cmd_sweep(common),
        Command::Basis { common, li } => cmd_basis(common, li),
        Command::Check { common } => cmd_check(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
