use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mimo_aging_experiments::{list_presets, parse_config_file, preset, run_to_files, ScenarioConfig};

#[derive(Parser)]
#[command(name = "mimo-aging", version, about = "Massive MIMO channel-aging experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a named preset (fig1..fig7).
    Preset {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the available presets.
    ListPresets,
}

#[derive(Args)]
struct RunOpts {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV; defaults to the config's `output`, then `<name>.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    threads: Option<usize>,
    /// Extra `section.key=value` override, applied after the config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn apply(mut config: ScenarioConfig, opts: &RunOpts) -> Result<ScenarioConfig, String> {
    for kv in &opts.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
        config.set_key(k.trim(), v).map_err(|e| e.to_string())?;
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if let Some(trials) = opts.trials {
        config.trials = trials;
    }
    if let Some(out) = &opts.out {
        config.output = Some(out.clone());
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn execute(config: ScenarioConfig, opts: &RunOpts) -> Result<(), String> {
    let config = apply(config, opts)?;
    if opts.threads == Some(0) {
        return Err("--threads must be >= 1".into());
    }
    let out = config
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", config.name)));
    let rows = run_to_files(&config, &out, opts.threads).map_err(|e| e.to_string())?;
    eprintln!("wrote {rows} rows to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ListPresets => {
            print!("{}", list_presets());
            Ok(())
        }
        Command::Run { config, opts } => parse_config_file(&config)
            .map_err(|e| format!("{}: {e}", config.display()))
            .and_then(|c| execute(c, &opts)),
        Command::Preset { name, opts } => preset(&name).map_err(|e| e.to_string()).and_then(|c| execute(c, &opts)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
