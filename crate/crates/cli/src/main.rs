use clap::{Parser, Subcommand, ValueEnum};
use mraqc_cli::config::{SolverConfig, SolverMethod};
use mraqc_cli::{parse_config, pipeline, run_point, run_scan, solve_fcidump, CliError, RunConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mraqc", version, about = "Multiresolution orbital refinement with simulated VQE/FCI solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Fci,
    Vqe,
}

#[derive(Subcommand)]
enum Command {
    /// Single point: HF, PNO active space, orbital refinement
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Scan along the configured coordinate, appending to scan.csv
    Scan {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Solve the Hamiltonian of an FCIDUMP file
    FcidumpSolve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "fci")]
        solver: SolverArg,
        #[arg(long, default_value = "SPA+GSD")]
        ansatz: String,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// overrides NELEC from the header
        #[arg(long)]
        electrons: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn load(config: &Path, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<RunConfig, CliError> {
    let mut cfg = parse_config(config)?;
    if let Some(s) = seed {
        cfg.solver.seed = s;
        if let Some(f) = cfg.final_solver.as_mut() {
            f.seed = s;
        }
    }
    if let Some(d) = out_dir {
        cfg.output = d;
    }
    std::fs::create_dir_all(&cfg.output)?;
    std::fs::write(cfg.output.join("config.resolved.json"), cfg.to_json() + "\n")?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seed, out_dir } => {
            let cfg = load(&config, seed, out_dir)?;
            let mol = cfg.molecule()?;
            let r = run_point(&cfg, &mol, &cfg.output)?;
            println!("{}  E = {:.10}  ({:.1} s)", r.label, r.energy, r.wall_time);
        }
        Command::Scan { config, seed, out_dir } => {
            let cfg = load(&config, seed, out_dir)?;
            let outcome = run_scan(&cfg, &cfg.output)?;
            let mut failed = 0;
            for (i, res) in &outcome.results {
                match res {
                    Ok(r) => println!("{i}: {}  E = {:.10}", r.label, r.energy),
                    Err(e) => {
                        failed += 1;
                        println!("{i}: failed ({e})");
                    }
                }
            }
            if failed > 0 {
                return Err(CliError::Numerical(format!("{failed} scan point(s) failed")));
            }
        }
        Command::FcidumpSolve {
            file,
            solver,
            ansatz,
            restarts,
            seed,
            electrons,
            out_dir,
        } => {
            let sc = SolverConfig {
                method: match solver {
                    SolverArg::Fci => SolverMethod::Fci,
                    SolverArg::Vqe => SolverMethod::Vqe,
                },
                ansatz,
                restarts,
                seed,
            };
            let r = solve_fcidump(&file, &sc.to_spec()?, electrons)?;
            println!("{}  E = {:.12}", r.solver, r.energy);
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)?;
                pipeline::write_json(&dir.join("result.json"), &r)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
