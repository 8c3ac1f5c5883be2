//! `nslab run <config>`, `nslab validate <config>`, `nslab plot <dir>`,
//! `nslab list-scenarios`. `NSLAB_THREADS` caps the worker threads.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nslab::scenario::{self, RunError, ScenarioKind};

#[derive(Parser)]
#[command(name = "nslab", version, about = "Newton-Schrodinger versus field-theory laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its tables and index.json.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Render SVG plots for a finished run.
    Plot { dir: PathBuf },
    /// List the available scenarios.
    ListScenarios,
}

fn configure_threads() {
    if let Ok(v) = std::env::var("NSLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("NSLAB_THREADS ignored: {e}");
                }
            }
            _ => log::warn!("NSLAB_THREADS must be a positive integer, got {v:?}"),
        }
    }
}

/// Config problems (unreadable, unparsable, invalid) exit with 2, everything else with 1.
fn report_error(e: &RunError, loading: bool) -> ExitCode {
    match e {
        RunError::Config(c) => {
            eprintln!("config error: {c}");
            ExitCode::from(2)
        }
        other if loading => {
            eprintln!("config error: {other}");
            ExitCode::from(2)
        }
        other => {
            eprintln!("error: {other}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<20} {}", k.name(), k.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match scenario::load_config(&config) {
            Ok(c) => {
                println!("{}: valid {} config, hash {}", config.display(), c.scenario, c.content_hash());
                ExitCode::SUCCESS
            }
            Err(e) => report_error(&e, true),
        },
        Command::Run { config, out } => {
            let cfg = match scenario::load_config(&config) {
                Ok(c) => c,
                Err(e) => return report_error(&e, true),
            };
            let dir = scenario::output_dir(&cfg, out.as_deref());
            match scenario::run(&cfg, &dir) {
                Ok(report) => {
                    for a in &report.assertions {
                        println!("{} {:<36} {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
                    }
                    println!("wrote {} files to {} ({:.0} ms)", report.files.len() + 1, dir.display(), report.wall_ms);
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        let names: Vec<&str> = report.failures().map(|a| a.name.as_str()).collect();
                        eprintln!("assertion failed: {}", names.join(", "));
                        ExitCode::from(1)
                    }
                }
                Err(e) => report_error(&e, false),
            }
        }
        Command::Plot { dir } => match scenario::plot_dir(&dir) {
            Ok(outcome) => {
                for w in &outcome.warnings {
                    eprintln!("warning: {w}");
                }
                for p in &outcome.written {
                    println!("{}", p.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => report_error(&e, false),
        },
    }
}
