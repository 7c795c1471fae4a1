use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use modadapt::cli_io::{run, RunConfig};

#[derive(Parser)]
#[command(name = "modadapt", version, about = "Model adaptive dG for viscous/inviscid Burgers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset (`test1`, `test2`) or a TOML configuration file.
    Run {
        target: String,
        /// Advance a full-model reference and report the error.
        #[arg(long, value_enum)]
        reference: Option<OnOff>,
        /// Stop after N steps.
        #[arg(long, value_name = "N")]
        steps: Option<usize>,
        /// Output directory.
        #[arg(long, value_name = "DIR", env = "MODADAPT_OUT")]
        out: Option<PathBuf>,
        /// Dörfler marking fraction.
        #[arg(long)]
        theta: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let Command::Run {
        target,
        reference,
        steps,
        out,
        theta,
    } = Cli::parse().command;
    let mut cfg = match RunConfig::load(&target) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(r) = reference {
        cfg.reference = matches!(r, OnOff::On);
    }
    if steps.is_some() {
        cfg.max_steps = steps;
    }
    if let Some(t) = theta {
        cfg.theta = t;
    }
    let dir = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    match run(&cfg, &dir) {
        Ok(s) => {
            println!(
                "{} steps to t = {:.4}: bound {:.4e}, peak active measure {:.4e}, output in {}",
                s.steps,
                s.final_time,
                s.final_bound,
                s.peak_active_measure,
                dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
