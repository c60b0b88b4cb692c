use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use noma_awggn::cli::{parse_config, print_config, run_sweep, selftest, to_csv, Metric, RunConfig};
use noma_awggn::exec::{Execution, THREADS_ENV};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(version, about = "PEP, BER union bound and diversity sweeps for downlink NOMA under generalized Gaussian noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact pairwise error probability per user, with simulated estimates.
    Pep(RunArgs),
    /// Diversity slope per user over the configured high-SNR window.
    Diversity(RunArgs),
    /// Union bound and simulated bit error rate per user.
    Ber(RunArgs),
    /// Quick equivalence checks between the independent evaluation routes.
    Selftest,
    /// Prints the effective configuration as a re-parseable document.
    PrintConfig(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file of key=value lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Extra key=value assignment applied after the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV destination; overrides the `output` key. Defaults to stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Evaluate on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, String> {
        let mut text = match &self.config {
            Some(path) => fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?,
            None => String::new(),
        };
        for s in &self.set {
            if !text.is_empty() && !text.ends_with('\n') {
                text.push('\n');
            }
            text.push_str(s);
            text.push('\n');
        }
        let mut cfg = parse_config(&text).map_err(|e| match &self.config {
            Some(path) => format!("{}: {e}", path.display()),
            None => format!("--set: {e}"),
        })?;
        if let Some(out) = &self.output {
            cfg.output = Some(out.clone());
        }
        Ok(cfg)
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn configure_threads() -> Result<(), String> {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = THREADS_ENV;
    Ok(())
}

fn sweep(args: &RunArgs, defaults: &[Metric]) -> ExitCode {
    let cfg = match args.load() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let metrics = cfg.metrics.clone().unwrap_or_else(|| defaults.to_vec());
    let rows = match run_sweep(&cfg, &metrics, args.exec()) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("numeric failure: {e}");
            return ExitCode::from(EXIT_NUMERIC);
        }
    };
    let csv = to_csv(&rows);
    match &cfg.output {
        Some(path) => {
            if let Err(e) = fs::write(path, csv) {
                eprintln!("configuration error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG);
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("configuration error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match cli.command {
        Command::Pep(args) => sweep(&args, &[Metric::PepAnalytic, Metric::PepMc]),
        Command::Diversity(args) => sweep(&args, &[Metric::DiversitySlope]),
        Command::Ber(args) => sweep(&args, &[Metric::BerUnion, Metric::BerSim]),
        Command::PrintConfig(args) => match args.load() {
            Ok(cfg) => {
                print!("{}", print_config(&cfg));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("configuration error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Selftest => match selftest::run() {
            Ok(checks) => {
                let mut ok = true;
                for c in &checks {
                    println!("[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                    ok &= c.pass;
                }
                if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_NUMERIC)
                }
            }
            Err(e) => {
                eprintln!("numeric failure: {e}");
                ExitCode::from(EXIT_NUMERIC)
            }
        },
    }
}
