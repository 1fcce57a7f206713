use std::path::{Path, PathBuf};
use std::process::ExitCode;

use airship_core::harness::{compute_metrics, read_log, run_scenario, write_log, RunLog, Scenario};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "airship", version, about = "Airship flight-control simulation runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV log and JSON manifest.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// `key=value` override on the scenario tree, e.g. `controller.k_nu=4`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print summary metrics of a log as JSON.
    Metrics { log: PathBuf },
    /// Run a scenario once per value of one parameter, in parallel.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

type CliResult<T> = Result<T, Box<dyn std::error::Error + Send + Sync>>;

fn summary(log: &RunLog, csv: &Path) -> serde_json::Value {
    let m = compute_metrics(log);
    serde_json::json!({
        "log": csv.display().to_string(),
        "status": log.manifest.status,
        "metrics": m,
    })
}

fn run_one(sc: &Scenario, out: &Path, stem: &str) -> CliResult<(bool, serde_json::Value)> {
    let log = run_scenario(sc)?;
    std::fs::create_dir_all(out)?;
    let csv = write_log(&log, out, stem)?;
    Ok((log.status().is_aborted(), summary(&log, &csv)))
}

fn stem_for(value: &str) -> String {
    value
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn execute(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            mut overrides,
        } => {
            if let Some(s) = seed {
                overrides.push(format!("seed={s}"));
            }
            let sc = Scenario::load(&scenario)?.with_overrides(&overrides)?;
            let (aborted, s) = run_one(&sc, &out, &sc.name)?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(!aborted)
        }
        Command::Metrics { log } => {
            let log_data = read_log(&log)?;
            println!("{}", serde_json::to_string_pretty(&summary(&log_data, &log))?);
            Ok(true)
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => {
            let base = Scenario::load(&scenario)?;
            let results: Vec<CliResult<(bool, serde_json::Value)>> = std::thread::scope(|scope| {
                let handles: Vec<_> = values
                    .iter()
                    .map(|v| {
                        let (base, param, out) = (&base, &param, &out);
                        scope.spawn(move || {
                            let sc = base.with_overrides(&[format!("{param}={v}")])?;
                            let stem = format!("{}_{}", base.name, stem_for(v));
                            run_one(&sc, out, &stem)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err("sweep worker panicked".into())))
                    .collect()
            });
            let mut ok = true;
            let mut rows = Vec::new();
            for (v, r) in values.iter().zip(results) {
                let (aborted, s) = r?;
                ok &= !aborted;
                rows.push(serde_json::json!({ "value": v, "run": s }));
            }
            println!("{}", serde_json::to_string_pretty(&rows)?);
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("run aborted");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
