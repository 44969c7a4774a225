use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ntlot_cli::{cmd_generate, cmd_report, cmd_solve, RunManifest};

#[derive(Parser)]
#[command(
    name = "ntlot",
    version,
    about = "Lot sizing and scheduling matheuristics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write replicas of a benchmark class.
    Generate {
        /// Class name such as Data2-15-5-0.8-50-80-20.
        class: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value = "instances")]
        out: PathBuf,
    },
    /// Run methods on instance files and write results.csv.
    Solve {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
        /// TOML file with heuristic parameters and time limits.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "NTLOT_BACKEND")]
        backend: Option<String>,
        /// Multiplies every time limit.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value = "rfo,rfo-pr,rfo-ks")]
        methods: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Skip the base-model solve that fills the lb column.
        #[arg(long)]
        no_lb: bool,
    },
    /// Performance profiles and paired t-tests from results files.
    Report {
        #[arg(required = true)]
        csvs: Vec<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate {
            class,
            seed,
            count,
            out,
        } => {
            for f in cmd_generate(&class, seed, count, &out)? {
                println!("{}", f.display());
            }
        }
        Command::Solve {
            instances,
            config,
            backend,
            scale,
            seed,
            out,
            methods,
            jobs,
            no_lb,
        } => {
            let manifest = RunManifest::new(
                config, instances, &methods, seed, out, backend, scale, !no_lb, jobs,
            )?;
            let rows = cmd_solve(&manifest)?;
            let feasible = rows.iter().filter(|r| r.feasible).count();
            println!(
                "{} rows ({feasible} feasible) -> {}",
                rows.len(),
                manifest.out.join("results.csv").display()
            );
        }
        Command::Report { csvs, out, alpha } => {
            let rep = cmd_report(&csvs, &out, alpha)?;
            println!(
                "{} rows, {} method pairs -> {}",
                rep.records.len(),
                rep.pairs.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
