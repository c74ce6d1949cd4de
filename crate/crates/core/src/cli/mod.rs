//! Command-line front end: `solve`, `prox-table`, `analyze`, `experiment`
//! and `rip`.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

pub use config::SCHEMA_VERSION;

#[derive(Debug, Parser)]
#[command(name = "foldsolve", version, about = "Sparse recovery under noise folding")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory that receives the output files.
    #[arg(long, global = true, default_value = "output")]
    output_dir: PathBuf,

    /// Replaces the seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,

    /// Worker threads for experiment trials (default: all cores).
    #[arg(long, global = true, env = "FOLDSOLVE_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(about = "Solve one problem", long_about = config::SOLVE_HELP)]
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    #[command(about = "Sample the scalar prox map", long_about = config::PROX_TABLE_HELP)]
    ProxTable {
        #[arg(long)]
        config: PathBuf,
    },
    #[command(about = "Fit the rate of a trace", long_about = config::ANALYZE_HELP)]
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
    #[command(about = "Run an experiment driver", long_about = config::EXPERIMENT_HELP)]
    Experiment {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// vary-beta, vary-m, iteration-count or timing.
        #[arg(long)]
        preset: Option<String>,
        /// Full-size timing grid.
        #[arg(long)]
        full_scale: bool,
    },
    #[command(about = "Estimate RIP constants", long_about = config::RIP_HELP)]
    Rip {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug)]
pub(crate) enum CliError {
    /// Bad arguments or config; nothing has been computed.
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

pub(crate) fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub(crate) fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses `path`, reporting the failing field path and position.
pub(crate) fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("{}: at `{}`: {}", path.display(), e.path(), e.inner())))
}

pub(crate) fn check_schema(version: u32) -> Result<(), CliError> {
    if version == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Config(format!("schema_version {version} is not supported (expected {SCHEMA_VERSION})")))
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub(crate) fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| runtime_err(format!("{}: {e}", dir.display())))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(runtime_err)?;
    tmp.write_all(contents).map_err(runtime_err)?;
    tmp.as_file().sync_all().map_err(runtime_err)?;
    tmp.persist(&target).map_err(|e| runtime_err(format!("{}: {}", target.display(), e.error)))?;
    Ok(target)
}

pub(crate) struct Context {
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 for invalid arguments or configs, 1 for failures during computation.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let _ = env_logger::Builder::new().filter_level(cli.log_level).format_timestamp(None).try_init();
    let ctx = Context { output_dir: cli.output_dir, seed: cli.seed, threads: cli.threads.filter(|&t| t > 0) };
    let outcome = match &cli.command {
        Command::Solve { config } => commands::solve(&ctx, config),
        Command::ProxTable { config } => commands::prox_table(&ctx, config),
        Command::Analyze { config } => commands::analyze(&ctx, config),
        Command::Experiment { config, preset, full_scale } => {
            commands::experiment(&ctx, config.as_deref(), preset.as_deref(), *full_scale)
        }
        Command::Rip { config } => commands::rip(&ctx, config),
    };
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
