use std::fs;
use std::path::Path;

use tryon_core::agnostic::{build_bundle, build_region_mask};
use tryon_core::imaging::io::{save_image, save_mask};
use tryon_core::locate::WatchSite;

use crate::config::PipelineConfig;
use crate::error::PipelineError;
use crate::inputs::{load_person, locate};
use crate::layout::{output_path, ImageRecord, AGNOSTIC_DIR, AGNOSTIC_MASK_DIR, TARGET_CROP_DIR, WATCH_SITE_DIR};
use crate::pool::{ensure_dirs, run_records};
use crate::report::{Outcome, StageReport, Status};

pub const OUTPUT_DIRS: [&str; 4] = [AGNOSTIC_MASK_DIR, AGNOSTIC_DIR, TARGET_CROP_DIR, WATCH_SITE_DIR];

pub fn site_json(site: &WatchSite) -> String {
    format!(
        "{{\"center\": [{:?}, {:?}], \"radius\": {:?}, \"source\": \"{}\"}}\n",
        site.center.0,
        site.center.1,
        site.radius,
        site.source.as_str()
    )
}

/// Locates the watch, then writes the region mask, agnostic image and target crop.
pub fn run_prepare(cfg: &PipelineConfig, records: &[ImageRecord]) -> Result<StageReport, PipelineError> {
    let root = cfg.dataset_root.clone();
    ensure_dirs(&root, &OUTPUT_DIRS)?;
    let outcomes = run_records(cfg.jobs, records, |r| prepare_one(cfg, &root, r))?;
    Ok(StageReport::new("prepare", outcomes))
}

fn prepare_one(cfg: &PipelineConfig, root: &Path, record: &ImageRecord) -> Outcome {
    let id = record.id.as_str();
    let inputs = match load_person(cfg, record) {
        Ok(i) => i,
        Err(m) => return Outcome::new(id, Status::Error(m)),
    };
    let site = match locate(cfg, &inputs) {
        Ok(s) => s,
        Err(m) => return Outcome::new(id, Status::Error(m)),
    };
    let written = (|| -> tryon_core::Result<Status> {
        let region = build_region_mask(&site, &inputs.parse, &cfg.region_labels)?;
        let bundle = build_bundle(&inputs.image, &region.mask, cfg.gray_value, cfg.crop_fill)?;
        save_mask(&output_path(root, AGNOSTIC_MASK_DIR, id, "png"), &bundle.region_mask)?;
        save_image(&output_path(root, AGNOSTIC_DIR, id, "png"), &bundle.agnostic_image)?;
        save_image(&output_path(root, TARGET_CROP_DIR, id, "png"), &bundle.target_crop)?;
        Ok(match region.warning {
            Some(w) => Status::Warning(w.to_string()),
            None => Status::Ok,
        })
    })();
    let status = match written {
        Ok(s) => s,
        Err(e) => return Outcome::new(id, Status::Error(e.to_string())),
    };
    let site_path = output_path(root, WATCH_SITE_DIR, id, "json");
    if let Err(e) = fs::write(&site_path, site_json(&site)) {
        return Outcome::new(id, Status::Error(format!("{}: {e}", site_path.display())));
    }
    let mut out = Outcome::new(id, status);
    out.fields.push(("source", site.source.as_str().to_string()));
    out.fields.push(("center_x", format!("{:.3}", site.center.0)));
    out.fields.push(("center_y", format!("{:.3}", site.center.1)));
    out.fields.push(("radius", format!("{:.3}", site.radius)));
    out.fields.push(("notes", inputs.notes.join("; ")));
    out
}
