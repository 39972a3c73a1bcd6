//! Batch pipeline over a VITON-HD style dataset tree: watch localization and
//! agnostic inputs (`prepare`), per-image TPS fitting (`warp`), debug overlays
//! (`visualize`) and paired SSIM evaluation (`eval`).

pub mod config;
pub mod error;
pub mod eval;
pub mod inputs;
pub mod layout;
pub mod pool;
pub mod prepare;
pub mod report;
pub mod visualize;
pub mod warp;

pub use config::{PipelineConfig, Placement, ENV_PREFIX};
pub use error::PipelineError;
pub use eval::{eval_exit_code, run_eval};
pub use layout::{discover, ImageRecord};
pub use prepare::run_prepare;
pub use report::{Outcome, StageReport, Status};
pub use visualize::run_visualize;
pub use warp::run_warp;

use layout::REPORT_DIR;

/// Which stages `run_stages` executes, in pipeline order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stages {
    pub prepare: bool,
    pub warp: bool,
    pub visualize: bool,
    pub eval: bool,
}

impl Stages {
    pub const ALL: Stages = Stages {
        prepare: true,
        warp: true,
        visualize: true,
        eval: true,
    };
}

/// Runs the selected stages, writes `reports/<stage>.csv`, and returns the
/// process exit code (worst over stages).
pub fn run_stages(cfg: &PipelineConfig, stages: Stages) -> Result<u8, PipelineError> {
    cfg.validate()?;
    let reports = cfg.dataset_root.join(REPORT_DIR);
    let mut code = 0u8;
    let needs_records = stages.prepare || stages.warp || stages.visualize;
    let records = if needs_records { discover(&cfg.dataset_root)? } else { Vec::new() };
    let mut finish = |report: StageReport| -> Result<(), PipelineError> {
        log::info!("{}", report.summary_line());
        for o in report.outcomes.iter().filter(|o| o.status != Status::Ok) {
            log::warn!("{} {}: {}", report.stage, o.id, o.status);
        }
        report.write(&reports)?;
        code = code.max(report.exit_code());
        Ok(())
    };
    if stages.prepare {
        finish(run_prepare(cfg, &records)?)?;
    }
    if stages.warp {
        finish(run_warp(cfg, &records)?)?;
    }
    if stages.visualize {
        finish(run_visualize(cfg, &records)?)?;
    }
    if stages.eval {
        let report = run_eval(cfg, &cfg.resolve(&cfg.eval_generated), &cfg.resolve(&cfg.eval_truth))?;
        for e in &report.errors {
            log::warn!("eval {}: {}", e.id, e.message);
        }
        log::info!("eval: {} scores, {} errors", report.rows.len(), report.errors.len());
        code = code.max(eval_exit_code(&report));
    }
    Ok(code)
}
