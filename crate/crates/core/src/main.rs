use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use galois_scaffold::job::{self, Format, JobConfig, Task};
use galois_scaffold::Error;

#[derive(Parser)]
#[command(name = "galois-scaffold", version, about = "Galois scaffolds and semistable witnesses for elementary abelian extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML job configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Initial relative precision cap (overrides the config).
    #[arg(long, global = true)]
    cap: Option<i64>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Seed for randomized searches (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Breaks, different, i_G table and digit tables.
    Analyze,
    /// Ramification diagram of an element of K[G].
    Diagram,
    /// Verify a claimed scaffold and certify its precision.
    ScaffoldVerify,
    /// Build a scaffold from a semistable witness.
    ScaffoldBuild,
    /// Scaffold to witness to scaffold.
    Roundtrip,
    /// Search for a violation of the witness criterion.
    Falsify,
}

#[derive(ValueEnum, Clone, Copy)]
enum OutFormat {
    Json,
    Text,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::Analyze => Task::Analyze,
            Command::Diagram => Task::Diagram,
            Command::ScaffoldVerify => Task::ScaffoldVerify,
            Command::ScaffoldBuild => Task::ScaffoldBuild,
            Command::Roundtrip => Task::Roundtrip,
            Command::Falsify => Task::Falsify,
        }
    }
}

fn execute(cli: &Cli) -> Result<String, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = JobConfig::load(path)?;
    let task = cli.command.task();
    if let Some(t) = config.task {
        if t != task {
            return Err(Error::Config(format!("config is for task `{}`, not `{}`", t.name(), task.name())));
        }
    }
    if let Some(cap) = cli.cap {
        config.cap = cap;
        config.max_cap = config.max_cap.max(cap);
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let format = match cli.format {
        OutFormat::Json => Format::Json,
        OutFormat::Text => Format::Text,
    };
    Ok(job::run(&config, task)?.emit(format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
