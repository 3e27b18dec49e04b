use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use vchain::io::{compare_dirs, merge, parse_config_value, preset, run_scenario, run_sweep, ErrorReport};
use vchain::{Error, Result};

#[derive(Parser)]
#[command(name = "vchain", version, about = "Phonon-driven inversion and transport in V-type emitter chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write timeseries.csv, summary.json and optionally plot.svg.
    Run {
        /// JSON config; merged on top of the preset when both are given.
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (overrides output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit plot.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Run every point of the config's sweep grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the occupation channels of two run directories.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config: {e}")))?;
    Ok(serde_json::from_str(&text)?)
}

fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Run {
            config,
            preset: name,
            out,
            svg,
        } => {
            let mut doc = match &name {
                Some(n) => preset(n)?,
                None => Value::Object(Default::default()),
            };
            if let Some(path) = &config {
                doc = merge(doc, read_json(path)?);
            }
            if svg {
                doc = merge(doc, serde_json::json!({"output": {"emit_svg": true}}));
            }
            let cfg = parse_config_value(doc)?;
            let (dir, summary) = run_scenario(&cfg, out.as_deref())?;
            log::info!("wrote {}", dir.display());
            Ok(serde_json::json!({
                "directory": dir.display().to_string(),
                "config_sha256": summary.config_sha256,
            }))
        }
        Command::Sweep { config, out } => {
            let doc = read_json(&config)?;
            let (dir, manifest) = run_sweep(&doc, out.as_deref())?;
            let failed = manifest.points.iter().filter(|p| p.status != "ok").count();
            Ok(serde_json::json!({
                "directory": dir.display().to_string(),
                "points": manifest.points.len(),
                "failed": failed,
            }))
        }
        Command::Compare { dir_a, dir_b } => Ok(serde_json::to_value(compare_dirs(&dir_a, &dir_b)?.channels)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = std::env::var("VCHAIN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = ErrorReport::from(&e);
            eprintln!("{}", serde_json::to_string(&report).expect("json"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
