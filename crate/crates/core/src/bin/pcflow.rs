use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use pcflow::runner::{parse_config, ExperimentConfig, Registry, RunError};

/// Pluriclosed flow experiments on invariant metrics of the Kodaira-Thurston surface.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Directory for traces, snapshots and verdicts (overrides `out_dir`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Pass threshold for identity residuals (overrides `identity_tol`).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Reject unknown configuration keys.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run { config: PathBuf },
    /// Run the identity battery with default settings.
    Suite,
    /// List registered presets.
    List,
}

fn init_threads() -> Result<(), RunError> {
    let Ok(value) = std::env::var("PCFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| RunError::Setup(format!("PCFLOW_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Setup(e.to_string()))
}

fn load(cli: &Cli, registry: &Registry) -> Result<Option<ExperimentConfig>, RunError> {
    let mut cfg = match &cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| RunError::Setup(format!("{}: {e}", config.display())))?;
            parse_config(&text, cli.strict)?
        }
        Command::Suite => ExperimentConfig::default(),
        Command::List => {
            for e in registry.iter() {
                println!("{:<16} {}", e.name(), e.summary());
            }
            return Ok(None);
        }
    };
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(tol) = cli.tol {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(RunError::Setup("--tol must be positive and finite".into()));
        }
        cfg.identity_tol = tol;
    }
    Ok(Some(cfg))
}

fn execute(cli: &Cli) -> Result<i32, RunError> {
    init_threads()?;
    let registry = Registry::builtin();
    let Some(cfg) = load(cli, &registry)? else {
        return Ok(0);
    };
    for line in cfg.to_text().lines() {
        println!("# {line}");
    }
    let outcome = registry.run(&cfg)?;
    for a in &outcome.assertions {
        let status = if a.passed { "PASS" } else { "FAIL" };
        if a.tol.is_nan() {
            println!("{status}  {}", a.name);
        } else {
            println!("{status}  {}  max = {:.3e}  tol = {:.0e}", a.name, a.value, a.tol);
        }
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
