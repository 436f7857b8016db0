use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use steinclt::experiment::{self, ExperimentConfig};
use steinclt::Error;

#[derive(Parser)]
#[command(name = "steinclt", version, about = "Normal approximation bounds for sums of independent random vectors")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "STEINCLT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate bounds and estimate W1 for every configured cell; write CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the identity/property battery.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the three bounds for a standardized i.i.d. model as CSV.
    Bound {
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Rare-atom probability for the two-point family.
        #[arg(long)]
        p: Option<f64>,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::UnknownFamily { .. } | Error::InvalidArgument(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not configure thread pool: {e}");
        }
    }
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let Some(out) = out.or_else(|| cfg.output.csv.clone().map(PathBuf::from)) else {
                return fail(&Error::Config("no output path: pass --out or set output.csv".into()));
            };
            let csv = match experiment::run(&cfg)
                .and_then(|rows| experiment::to_csv(&rows, &experiment::sampling_floors(&cfg)?))
            {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            if let Err(e) = std::fs::write(&out, csv) {
                return fail(&Error::from(e));
            }
            ExitCode::SUCCESS
        }
        Command::Verify { config } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match experiment::verify(&cfg) {
                Ok(report) => {
                    print!("{}", report.render());
                    for c in report.failures() {
                        eprintln!("failed check: {}", c.name);
                    }
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => fail(&e),
            }
        }
        Command::Bound { family, d, n, p } => match experiment::bound_csv(&family, d, n, p) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
