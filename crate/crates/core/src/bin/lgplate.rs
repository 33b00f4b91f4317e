use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use lgplate::config::{parse_config, JobKind};
use lgplate::jobs::run_job;
use lgplate::Error;

/// Layer-wise nonlinear analysis of laminated glass plates.
#[derive(Parser, Debug)]
#[command(name = "lgplate", version)]
struct Cli {
    job: Job,
    /// TOML analysis configuration.
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for element assembly (also `LGPLATE_THREADS`).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Job {
    Solve,
    Verify,
    Sweep,
    Convergence,
    Efft,
}

impl From<Job> for JobKind {
    fn from(j: Job) -> Self {
        match j {
            Job::Solve => JobKind::Solve,
            Job::Verify => JobKind::Verify,
            Job::Sweep => JobKind::Sweep,
            Job::Convergence => JobKind::Convergence,
            Job::Efft => JobKind::Efft,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::InvalidMaterial(_) => 2,
        Error::NonConvergence { .. } | Error::Divergence { .. } | Error::SolverFailure(_) | Error::Unconverged => 3,
        Error::Io { .. } => 4,
        _ => 1,
    }
}

fn threads(cli: Option<usize>) -> Result<Option<usize>, Error> {
    if cli.is_some() {
        return Ok(cli);
    }
    match std::env::var("LGPLATE_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("LGPLATE_THREADS: expected a thread count, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    if let Some(n) = threads(cli.threads)? {
        if n == 0 {
            return Err(Error::Config("threads: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("threads: {e}")))?;
    }
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|source| Error::Io { path: cli.config.display().to_string(), source })?;
    let mut cfg = parse_config(&text)?;
    cfg.job = cli.job.into();
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let report = run_job(&cfg, &out)?;
    // a closed pipe (e.g. `| head`) is not an error for a batch tool
    let mut stdout = std::io::stdout().lock();
    let _ = write!(stdout, "{}", report.summary);
    let _ = writeln!(stdout, "artifacts in {}", out.display());
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("lgplate: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("lgplate: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
