use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mlab_core::experiments::{registry, run_experiment, write_outputs, ExperimentConfig};
use mlab_core::MlabError;

#[derive(Parser)]
#[command(name = "mlab", version, about = "Run numerical experiments and write CSV/SVG results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed (overrides `seed` in the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Parameter override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List experiments and their parameters.
    List,
}

fn init_threads() -> Result<(), MlabError> {
    let Ok(v) = std::env::var("MLAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| MlabError::Config(format!("MLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| MlabError::Config(format!("thread pool: {e}")))
}

fn list() -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    for spec in registry() {
        writeln!(out, "{}\n    {}", spec.name, spec.description)?;
        for k in spec.keys {
            writeln!(out, "    --set {}=<{}>  {}", k.name, k.default, k.doc)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn run(experiment: String, config: PathBuf, out: Option<PathBuf>, seed: Option<u64>, set: Vec<String>) -> Result<(), MlabError> {
    let mut cfg = ExperimentConfig::load(&config)?;
    if cfg.experiment != experiment {
        return Err(MlabError::Config(format!(
            "config {} is for `{}`, not `{experiment}`",
            config.display(),
            cfg.experiment
        )));
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    for a in &set {
        cfg.set(a)?;
    }
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    init_threads()?;
    let output = run_experiment(&cfg)?;
    let (csv, svg) = write_outputs(&output, &dir)?;
    println!("{}\n{}", csv.display(), svg.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List => {
            let _ = list();
            Ok(())
        }
        Command::Run { experiment, config, out, seed, set } => run(experiment, config, out, seed, set),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
