use std::fs;
use std::path::Path;

use tryon_core::metrics::{evaluate_pairs, SsimReport};

use crate::config::PipelineConfig;
use crate::error::PipelineError;
use crate::layout::EVAL_DIR;
use crate::pool::ensure_dirs;

/// Written report files, relative to the eval directory.
pub const SCORES: &str = "scores.csv";
pub const ERRORS: &str = "errors.csv";
pub const SUMMARY: &str = "summary.csv";
pub const TABLE: &str = "table.txt";

/// Scores `generated` against `truth` and writes the report under `<root>/eval/`.
pub fn run_eval(cfg: &PipelineConfig, generated: &Path, truth: &Path) -> Result<SsimReport, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let report = pool.install(|| evaluate_pairs(generated, truth, &cfg.resolutions))?;
    let dir = cfg.dataset_root.join(EVAL_DIR);
    ensure_dirs(&cfg.dataset_root, &[EVAL_DIR])?;
    let write = |name: String, text: String| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| PipelineError::io(p, e))
    };
    write(SCORES.into(), report.scores_csv())?;
    write(ERRORS.into(), report.errors_csv())?;
    write(SUMMARY.into(), report.summary_csv())?;
    write(TABLE.into(), report.table())?;
    for r in &cfg.resolutions {
        write(format!("bars-{}.csv", r.tag), report.bars_csv(&r.tag))?;
    }
    Ok(report)
}

/// 0 when every pair scored, 2 when any per-image error was recorded.
pub fn eval_exit_code(report: &SsimReport) -> u8 {
    if report.errors.is_empty() {
        0
    } else {
        2
    }
}
