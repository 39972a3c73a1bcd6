use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tryon_cli::{run_stages, PipelineConfig, PipelineError, Stages, ENV_PREFIX};

#[derive(Parser)]
#[command(name = "tryon", version, about = "Watch try-on preprocessing, TPS warp fitting and SSIM evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Dataset root (overrides dataset_root from the config file and environment).
    #[arg(long, global = true)]
    root: Option<PathBuf>,

    /// key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Fixed reduction order so reruns are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the watch and write agnostic-mask/, agnostic/, target-crop/.
    Prepare,
    /// Fit a TPS warp per image and write warp-cloth/, tps-params/, loss/.
    Warp,
    /// Score generated images against ground truth, written to eval/.
    Eval {
        #[arg(long)]
        generated: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Draw landmarks, watch center and region outline into visualize/.
    Visualize,
    /// prepare, warp, visualize, then eval.
    All,
}

fn build_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    cfg.apply_env(std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX) && k != "TRYON_LOG"))?;
    if let Some(root) = &cli.root {
        cfg.dataset_root = root.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if cli.deterministic {
        cfg.deterministic = true;
    }
    if let Command::Eval { generated, truth } = &cli.command {
        if let Some(g) = generated {
            cfg.eval_generated = g.clone();
        }
        if let Some(t) = truth {
            cfg.eval_truth = t.clone();
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRYON_LOG", "info")).init();
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(2);
        }
    };
    if cli.print_config {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    let stages = match cli.command {
        Command::Prepare => Stages { prepare: true, ..Stages::default() },
        Command::Warp => Stages { warp: true, ..Stages::default() },
        Command::Eval { .. } => Stages { eval: true, ..Stages::default() },
        Command::Visualize => Stages { visualize: true, ..Stages::default() },
        Command::All => Stages::ALL,
    };
    match run_stages(&cfg, stages) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
    }
}
