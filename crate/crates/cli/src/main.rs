mod args;
mod catalog;
mod commands;
mod error;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, ConfigFile, ExperimentArgs};
use commands::RunOutput;
use error::{CliError, CliResult};
use output::{Manifest, OutputDir};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Command::List(list) = &cli.command {
        return list_experiments(list.name.as_deref(), list.json);
    }
    let config = ConfigFile::load(cli.global.config.as_ref())?;
    let global = config.resolve_global(&cli.global)?;
    if global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(global.threads)
            .build_global()
            .map_err(|e| CliError::validation("threads", e.to_string()))?;
    }
    let seed = global.seed;
    let started = Instant::now();
    let (name, params, result) = match &cli.command {
        Command::EnsembleSpectrum(a) => dispatch(&config, a, |a| commands::ensemble_spectrum(a, seed))?,
        Command::Averages(a) => dispatch(&config, a, |a| commands::averages(a, seed))?,
        Command::VnScaling(a) => dispatch(&config, a, |a| commands::vn_scaling(a, seed))?,
        Command::TmiRandom(a) => dispatch(&config, a, |a| commands::tmi_random(a, seed))?,
        Command::Timeseries(a) => dispatch(&config, a, commands::timeseries)?,
        Command::Otoc(a) => dispatch(&config, a, commands::otoc)?,
        Command::TmiGrid(a) => dispatch(&config, a, commands::tmi_grid)?,
        Command::PhasePortrait(a) => dispatch(&config, a, |a| commands::phase_portrait_cmd(a, seed))?,
        Command::Lyapunov(a) => dispatch(&config, a, |a| commands::lyapunov(a, seed))?,
        Command::Concentration(a) => dispatch(&config, a, |a| commands::concentration(a, seed))?,
        Command::List(_) => unreachable!("handled above"),
    };

    let mut out = OutputDir::create(&global.out, global.format)?;
    for (stem, table) in &result.tables {
        out.write_table(stem, table)?;
    }
    if let Some(summary) = &result.summary {
        out.write_json("summary.json", summary)?;
    }
    let config_json = json!({ "global": global, "parameters": params });
    let manifest = Manifest {
        experiment: name,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        format: global.format,
        threads: rayon::current_num_threads(),
        config: &config_json,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files: out.files(),
    };
    let bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Serialize(e.to_string()))?;
    let path = out.root().join("manifest.json");
    std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    for f in out.files() {
        println!("{}", out.root().join(&f.path).display());
    }
    Ok(())
}

fn dispatch<T: ExperimentArgs>(
    config: &ConfigFile,
    flags: &T,
    runner: impl FnOnce(&T) -> CliResult<RunOutput>,
) -> CliResult<(&'static str, Value, RunOutput)> {
    let (params, json) = config.resolve(flags)?;
    Ok((T::NAME, json, runner(&params)?))
}

fn list_experiments(name: Option<&str>, as_json: bool) -> CliResult<()> {
    let entries = match name {
        Some(n) => vec![catalog::lookup(n)?],
        None => catalog::catalog(),
    };
    if as_json {
        let text = serde_json::to_string_pretty(&entries).map_err(|e| CliError::Serialize(e.to_string()))?;
        println!("{text}");
    } else {
        print!("{}", catalog::render_text(&entries));
    }
    Ok(())
}
