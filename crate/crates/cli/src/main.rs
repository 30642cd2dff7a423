use std::path::PathBuf;
use std::process::ExitCode;

use bdc_cli::bounds::cmd_bounds;
use bdc_cli::commands::{build_matrix, fibdc_report, simulate, write_matrix, MatrixKind};
use bdc_cli::config::parse_bound_list;
use bdc_cli::verify::{run_verify, VerifyOptions};
use bdc_cli::{with_jobs, CliError, CliResult, RunConfig};
use bdc_core::baa::DEFAULT_TOL;
use bdc_core::{DeletionProb, MatrixCaps};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bdc", version, about = "Capacity bounds for the binary deletion channel")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate bound curves on a grid of deletion probabilities and write CSV.
    Bounds(BoundsArgs),
    /// Report f(L,R), C_L and T_L for one block length.
    Fibdc(FibdcArgs),
    /// Monte Carlo check of the output stay probability for Markov inputs.
    Simulate(SimulateArgs),
    /// Export a FIFO or FI transition matrix as CSV.
    Matrix(MatrixArgs),
    /// Run every invariant check and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BoundsArgs {
    /// Plain-text key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated: c1,c2,c3,c4,theorem2,tl,lemma2,erasure,rahmati_duman,one_minus_h,dg_lower,dm_lower
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long = "d-min")]
    d_min: Option<f64>,
    #[arg(long = "d-max")]
    d_max: Option<f64>,
    #[arg(long = "d-step")]
    d_step: Option<f64>,
    /// Largest block length for the tl columns.
    #[arg(long = "L-max")]
    l_max: Option<usize>,
    /// Stay probability for the theorem2 column.
    #[arg(long)]
    gamma: Option<f64>,
    /// Recursion steps past L_max for the lemma2 columns.
    #[arg(long = "lemma2-steps")]
    lemma2_steps: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FibdcArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long)]
    d: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    d: f64,
    /// Input bits per trial.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Fifo,
    Fi,
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long = "L")]
    l: usize,
    /// Output length, for fifo.
    #[arg(long = "R")]
    r: Option<usize>,
    /// Deletion probability, for fi.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "L-max", default_value_t = 6)]
    l_max: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn run_config(args: BoundsArgs) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        cfg.apply_file(&text)?;
    }
    if let Some(b) = &args.bounds {
        cfg.selected_bounds = parse_bound_list(b)?;
    }
    cfg.d_min = args.d_min.unwrap_or(cfg.d_min);
    cfg.d_max = args.d_max.unwrap_or(cfg.d_max);
    cfg.d_step = args.d_step.unwrap_or(cfg.d_step);
    cfg.l_max = args.l_max.unwrap_or(cfg.l_max);
    cfg.gamma = args.gamma.unwrap_or(cfg.gamma);
    cfg.lemma2_steps = args.lemma2_steps.unwrap_or(cfg.lemma2_steps);
    cfg.tol = args.tol.unwrap_or(cfg.tol);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if args.out.is_some() {
        cfg.output_path = args.out;
    }
    Ok(cfg)
}

fn run(command: Command) -> CliResult<()> {
    let caps = MatrixCaps::default();
    match command {
        Command::Bounds(args) => {
            cmd_bounds(&run_config(args)?, &caps)?;
        }
        Command::Fibdc(args) => {
            let report = fibdc_report(args.l, DeletionProb::new(args.d)?, args.tol, &caps)?;
            print!("{report}");
            if !report.lemma1_holds() {
                return Err(CliError::Verify(format!("lemma 1 gap {}", report.lemma1_gap())));
            }
        }
        Command::Simulate(args) => {
            let report = simulate(args.gamma, DeletionProb::new(args.d)?, args.n, args.trials, args.seed)?;
            print!("{report}");
            if !report.within_limit() {
                return Err(CliError::Verify(format!("|z| = {} exceeds 4", report.z_score().abs())));
            }
        }
        Command::Matrix(args) => {
            let kind = match args.kind {
                KindArg::Fifo => MatrixKind::Fifo,
                KindArg::Fi => MatrixKind::Fi,
            };
            let d = args.d.map(DeletionProb::new).transpose()?;
            let ch = build_matrix(kind, args.l, args.r, d, &caps)?;
            write_matrix(&ch, args.out.as_deref())?;
        }
        Command::Verify(args) => {
            if args.l_max == 0 || args.l_max > caps.fifo_max_len {
                return Err(CliError::Usage(format!("L-max must lie in 1..={}", caps.fifo_max_len)));
            }
            let report = run_verify(&VerifyOptions::new(args.l_max, args.tol, args.seed), &caps)?;
            print!("{report}");
            if !report.all_passed() {
                return Err(CliError::Verify(report.failed().join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match with_jobs(cli.jobs, || run(cli.command)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bdc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
