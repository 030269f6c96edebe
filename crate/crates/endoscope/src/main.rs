use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::json;

use endoscope::{run, AlgebraCache, Command, JobConfig};

/// Exit status: 0 when every expectation is met, 2 on a mismatch, 1 on error.
#[derive(Parser)]
#[command(name = "endoscope", version, about = "Endotrivial-module scans over restricted enveloping and divided-power algebras")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON job configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for `<command>.json` and `<command>.timing.json`; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn real_main(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring thread pool")?;
    }
    let text = fs::read_to_string(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    let config = JobConfig::from_json(&text)?;
    let cache = AlgebraCache::from_env();
    let start = Instant::now();
    let report = run(cli.command, &config, &cache)?;
    let elapsed = start.elapsed().as_secs_f64();
    let timing = json!({"command": cli.command.name(), "seconds": elapsed, "fingerprint": report.fingerprint});
    match &cli.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let name = cli.command.name();
            fs::write(dir.join(format!("{name}.json")), report.to_json()?)?;
            fs::write(dir.join(format!("{name}.timing.json")), serde_json::to_string_pretty(&timing)? + "\n")?;
        }
        None => {
            print!("{}", report.to_json()?);
            eprintln!("{timing}");
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
