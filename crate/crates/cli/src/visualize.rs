use std::path::Path;

use tryon_core::agnostic::build_region_mask;
use tryon_core::imaging::io::save_image;
use tryon_core::viz::{draw_dot, draw_outline, BLUE, GREEN, RED};

use crate::config::PipelineConfig;
use crate::error::PipelineError;
use crate::inputs::{load_person, locate};
use crate::layout::{output_path, ImageRecord, VISUALIZE_DIR};
use crate::pool::{ensure_dirs, run_records};
use crate::report::{Outcome, StageReport, Status};

/// Draws hand landmarks (green), the region outline (blue) and the watch center (red).
pub fn run_visualize(cfg: &PipelineConfig, records: &[ImageRecord]) -> Result<StageReport, PipelineError> {
    let root = cfg.dataset_root.clone();
    if !records.is_empty() {
        ensure_dirs(&root, &[VISUALIZE_DIR])?;
    }
    let outcomes = run_records(cfg.jobs, records, |r| visualize_one(cfg, &root, r))?;
    Ok(StageReport::new("visualize", outcomes))
}

fn visualize_one(cfg: &PipelineConfig, root: &Path, record: &ImageRecord) -> Outcome {
    let id = record.id.as_str();
    let skip = |m: String| Outcome::new(id, Status::Warning(format!("skipped: {m}")));
    let inputs = match load_person(cfg, record) {
        Ok(i) => i,
        Err(m) => return skip(m),
    };
    let site = match locate(cfg, &inputs) {
        Ok(s) => s,
        Err(m) => return skip(m),
    };
    let mut canvas = inputs.image.to_rgb();
    let dot = (canvas.height().max(canvas.width()) as f64 * 0.005).max(1.0);
    for hand in &inputs.hands {
        for &p in hand.points.iter() {
            draw_dot(&mut canvas, p, dot, GREEN);
        }
    }
    match build_region_mask(&site, &inputs.parse, &cfg.region_labels) {
        Ok(region) => draw_outline(&mut canvas, &region.mask, BLUE),
        Err(e) => return skip(e.to_string()),
    }
    draw_dot(&mut canvas, site.center, dot * 2.0, RED);
    match save_image(&output_path(root, VISUALIZE_DIR, id, "png"), &canvas) {
        Ok(()) => {
            let mut out = Outcome::new(id, Status::Ok);
            out.fields.push(("source", site.source.as_str().to_string()));
            out
        }
        Err(e) => Outcome::new(id, Status::Error(e.to_string())),
    }
}
