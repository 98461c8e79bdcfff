use clap::{Args, Parser, Subcommand};
use roofkit_cli::{
    cmd_compute, cmd_rank2, cmd_scan, cmd_verify, CliError, CommandOutput, ConfigRecord,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Entropy of the diagonal subalgebra: convex roofs, optimal decompositions,
/// closed forms for symmetric states, and brute-force verification.
#[derive(Parser)]
#[command(name = "roofkit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Seed for every randomized component.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Optimizer restarts.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Maximum optimizer iterations per restart.
    #[arg(long, default_value_t = 2000)]
    iters: usize,
    /// Ensemble length m (default d²).
    #[arg(long)]
    m: Option<usize>,
    /// Convergence tolerance of the optimizer.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for the file written by --out.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

impl CommonFlags {
    fn config(&self) -> ConfigRecord {
        ConfigRecord {
            seed: self.seed,
            restarts: self.restarts,
            iters: self.iters,
            ensemble_len: self.m,
            tol: self.tol,
            threads: 0,
        }
        .with_env_threads()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute S̃, S, R, H and the optimal ensemble for a density matrix.
    Compute {
        /// Matrix file: first line d, then d rows of d entries `re+imj`.
        matrix_file: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Scan the permutation-symmetric family over a z-range (CSV output).
    Scan {
        /// Dimension of the family (d = 3).
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        z_lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        z_hi: f64,
        #[arg(long, default_value_t = 47)]
        steps: usize,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Closed-form solution for a rank-two state symmetric under a swap.
    Rank2 {
        matrix_file: PathBuf,
        /// Swap indices, e.g. `--swap 0,1`.
        #[arg(long, value_parser = parse_swap)]
        swap: (usize, usize),
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Run a verification suite (L1, L4, L5, L6, A3, A5, TRP, RELS1, all).
    Verify {
        suite: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn parse_swap(raw: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated indices, e.g. 0,1".into());
    }
    let i = parts[0].trim().parse().map_err(|_| "bad first index")?;
    let j = parts[1].trim().parse().map_err(|_| "bad second index")?;
    Ok((i, j))
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn finish(output: CommandOutput, flags: &CommonFlags) -> Result<(), CliError> {
    print!("{}", output.text);
    if let Some(path) = &flags.out {
        let body = match flags.format.as_deref() {
            Some("json") => format!("{}\n", output.record.header_json()),
            Some("csv") if output.record.command != "scan" => {
                return Err(CliError::Usage(
                    "csv output is only available for scan".into(),
                ));
            }
            _ => output.file_body.as_deref().unwrap_or("").to_string(),
        };
        std::fs::write(path, body)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    if let Some(ms) = output.record.wall_time_ms {
        eprintln!("wall time: {ms:.1} ms");
    }
    if output.verification_failed {
        return Err(CliError::VerificationFailed("verification failed".into()));
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Compute { matrix_file, flags } => {
            let input = read_input(matrix_file)?;
            let output = cmd_compute(&input, &flags.config())?;
            finish(output, flags)
        }
        Command::Scan {
            d,
            z_lo,
            z_hi,
            steps,
            flags,
        } => {
            let output = cmd_scan(*d, *z_lo, *z_hi, *steps, &flags.config())?;
            finish(output, flags)
        }
        Command::Rank2 {
            matrix_file,
            swap,
            flags,
        } => {
            let input = read_input(matrix_file)?;
            let output = cmd_rank2(&input, *swap, &flags.config())?;
            finish(output, flags)
        }
        Command::Verify { suite, flags } => {
            let output = cmd_verify(suite, &flags.config())?;
            finish(output, flags)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
