use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lora_txsel::config::load_config;
use lora_txsel::sweep::{run_sweep, RunManifest};
use lora_txsel::tables::emit_tables;
use lora_txsel::{ConfigError, Error};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "lora-txsel", version, about = "LoRa channel / TX power selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full sweep described by a JSON config.
    Run {
        config: PathBuf,
        #[arg(long, env = "LORA_TXSEL_OUT", default_value = "results")]
        out: PathBuf,
        /// Overrides base_seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "LORA_TXSEL_PARALLEL")]
        parallel: Option<usize>,
    },
    /// Recompute the CSV tables from a manifest's record logs.
    Tables {
        manifest: PathBuf,
        /// Defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config file and print the resolved configuration.
    Validate { config: PathBuf },
}

fn config_failure(e: ConfigError) -> ExitCode {
    eprintln!("config error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn failure(e: Error) -> ExitCode {
    match e {
        Error::Config(c) => config_failure(c),
        other => {
            eprintln!("error: {other}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => {
                println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
                println!("config_hash: {}", cfg.config_hash());
                ExitCode::SUCCESS
            }
            Err(e) => config_failure(e),
        },
        Command::Run { config, out, seed, parallel } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return config_failure(e),
            };
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if parallel.is_some() {
                cfg.parallel = parallel;
            }
            if let Err(e) = cfg.validate() {
                return config_failure(e);
            }
            match run_sweep(&cfg, &out) {
                Ok(manifest) => {
                    println!(
                        "{} runs written to {} (config {})",
                        manifest.runs.len(),
                        out.display(),
                        &manifest.config_hash[..12]
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => failure(e),
            }
        }
        Command::Tables { manifest, out } => {
            let base = manifest.parent().map(Path::to_path_buf).unwrap_or_default();
            let out = out.unwrap_or_else(|| base.clone());
            let result = RunManifest::load(&manifest).and_then(|m| emit_tables(&m, &base, &out));
            match result {
                Ok(paths) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => failure(e),
            }
        }
    }
}
