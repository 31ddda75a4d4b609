//! Scenario-driven front end: spectra, branch sweeps, identity
//! verification suites and grid-convergence ladders, emitting JSON/CSV
//! reports and plot-ready data files.
//!
//! Exit codes: 0 all asserted checks pass, 1 check failure, 2 config
//! error, 3 I/O error.

use clap::{Parser, Subcommand};
use dnlab_cli::report::Format;
use dnlab_cli::{emit, run_scenario, CliError, Command, ScenarioConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "dnlab",
    version,
    about = "Discrete Dirichlet/Neumann spectral laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario file (TOML; see the repository README for the grammar)
    #[arg(long)]
    config: PathBuf,
    /// Worker-pool size for independent probes (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted; plotdata derives sibling files)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_parser = ["json", "csv", "plotdata"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Dirichlet and Neumann spectra of the configured domain
    Spectrum(CommonArgs),
    /// Eigenvalue branches of the pole-free boundary operator over a window
    Sweep(CommonArgs),
    /// Run the identity verification suite
    Verify(CommonArgs),
    /// Unit-square grid-refinement ladder against continuum targets
    Converge(CommonArgs),
}

fn run(cmd: Command, args: &CommonArgs) -> Result<bool, CliError> {
    let (cfg, base_dir) = ScenarioConfig::load(&args.config)?;
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    }
    let out = run_scenario(cmd, &cfg, &base_dir, args.seed)?;

    let format: Format = match args
        .format
        .as_deref()
        .or(cfg.output.format.as_deref())
        .unwrap_or("json")
    {
        "csv" => Format::Csv,
        "plotdata" => Format::Plotdata,
        _ => Format::Json,
    };
    let path = args
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(|p| base_dir.join(p)));
    emit(
        &out.report,
        format,
        path.as_deref(),
        out.trace.as_ref(),
        out.counting.as_deref(),
    )?;

    if out.report.any_failed() {
        let failing: Vec<&str> = out
            .report
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("check failure: {}", failing.join(", "));
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Converge(a) => (Command::Converge, a),
    };
    match run(cmd, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
