use std::fs;
use std::path::Path;

use tryon_core::imaging::io::{load_image, load_mask, save_image};
use tryon_core::imaging::{resize_bilinear, BinaryMask, ImageBuffer};
use tryon_core::tps::{fit_tps, tps_grid, warp_image, FitResult, GmmConfig, TpsParams};
use tryon_core::{Error, Result};

use crate::config::{PipelineConfig, Placement};
use crate::error::PipelineError;
use crate::layout::{output_path, ImageRecord, AGNOSTIC_MASK_DIR, LOSS_DIR, PARAMS_DIR, TARGET_CROP_DIR, WARP_DIR};
use crate::pool::{ensure_dirs, run_records};
use crate::report::{Outcome, StageReport, Status};

pub const OUTPUT_DIRS: [&str; 3] = [WARP_DIR, PARAMS_DIR, LOSS_DIR];

fn crop(img: &ImageBuffer, x0: u32, y0: u32, x1: u32, y1: u32) -> Result<ImageBuffer> {
    let c = img.channels() as usize;
    let mut data = Vec::with_capacity((x1 - x0 + 1) as usize * (y1 - y0 + 1) as usize * c);
    for y in y0..=y1 {
        for x in x0..=x1 {
            data.extend_from_slice(img.pixel(x, y));
        }
    }
    ImageBuffer::new(x1 - x0 + 1, y1 - y0 + 1, img.channels(), data)
}

fn resize_mask(mask: &BinaryMask, width: u32, height: u32) -> Result<BinaryMask> {
    let scaled = resize_bilinear(&mask.to_image(), width, height)?;
    BinaryMask::new(width, height, scaled.data().iter().map(|&v| v > 127).collect())
}

/// Puts the masked accessory into a `width`×`height` canvas of `fill`.
///
/// `Bbox` scales the accessory-mask bounding box to fit inside the region's
/// bounding box (aspect kept, centered); `Frame` resizes the whole accessory
/// to the canvas. Pixels outside the accessory mask are `fill` either way.
pub fn place_accessory(
    accessory: &ImageBuffer,
    accessory_mask: &BinaryMask,
    region: &BinaryMask,
    placement: Placement,
    fill: u8,
) -> Result<ImageBuffer> {
    if accessory.dims() != accessory_mask.dims() {
        return Err(Error::Dimension(format!(
            "accessory {}x{} but its mask {}x{}",
            accessory.width(),
            accessory.height(),
            accessory_mask.width(),
            accessory_mask.height()
        )));
    }
    let acc = accessory.to_rgb();
    let (width, height) = region.dims();
    let mut canvas = ImageBuffer::filled(width, height, 3, fill)?;
    let full = BinaryMask::full(acc.width(), acc.height());
    let acc_mask = if accessory_mask.is_empty() { &full } else { accessory_mask };
    match placement {
        Placement::Frame => {
            let img = resize_bilinear(&acc, width, height)?;
            let mask = resize_mask(acc_mask, width, height)?;
            for y in 0..height {
                for x in 0..width {
                    if mask.get(x, y) {
                        canvas.pixel_mut(x, y).copy_from_slice(img.pixel(x, y));
                    }
                }
            }
        }
        Placement::Bbox => {
            let (rx0, ry0, rx1, ry1) = region
                .bbox()
                .ok_or_else(|| Error::Geometry("cannot place into an empty region".into()))?;
            let (ax0, ay0, ax1, ay1) = acc_mask.bbox().expect("mask is non-empty");
            let (cw, ch) = (ax1 - ax0 + 1, ay1 - ay0 + 1);
            let (rw, rh) = (rx1 - rx0 + 1, ry1 - ry0 + 1);
            let s = (rw as f64 / cw as f64).min(rh as f64 / ch as f64);
            let nw = ((cw as f64 * s).round() as u32).clamp(1, rw);
            let nh = ((ch as f64 * s).round() as u32).clamp(1, rh);
            let img = resize_bilinear(&crop(&acc, ax0, ay0, ax1, ay1)?, nw, nh)?;
            let mask_crop = crop(&acc_mask.to_image(), ax0, ay0, ax1, ay1)?;
            let mask = resize_mask(&BinaryMask::new(cw, ch, mask_crop.data().iter().map(|&v| v > 127).collect())?, nw, nh)?;
            let (ox, oy) = (rx0 + (rw - nw) / 2, ry0 + (rh - nh) / 2);
            for y in 0..nh {
                for x in 0..nw {
                    if mask.get(x, y) {
                        canvas.pixel_mut(ox + x, oy + y).copy_from_slice(img.pixel(x, y));
                    }
                }
            }
        }
    }
    Ok(canvas)
}

/// Size the warp is fitted at: the longest side capped at `max_side` (0 = no cap).
pub fn working_size(width: u32, height: u32, max_side: u32) -> (u32, u32) {
    let longest = width.max(height);
    if max_side == 0 || longest <= max_side {
        return (width, height);
    }
    let s = max_side as f64 / longest as f64;
    (
        ((width as f64 * s).round() as u32).max(1),
        ((height as f64 * s).round() as u32).max(1),
    )
}

/// Fits on a downscaled copy when needed and returns the fit with the warp
/// applied at full size. Parameters live in normalized coordinates, so they
/// carry over between sizes unchanged.
pub fn fit_and_warp(
    placed: &ImageBuffer,
    target: &ImageBuffer,
    cfg: &GmmConfig,
    max_side: u32,
) -> Result<(FitResult, ImageBuffer)> {
    let (w, h) = target.dims();
    let (ww, wh) = working_size(w, h, max_side);
    let fit = if (ww, wh) == (w, h) {
        fit_tps(placed, target, cfg, &TpsParams::zeros(cfg.grid_k))?
    } else {
        let p = resize_bilinear(placed, ww, wh)?;
        let t = resize_bilinear(target, ww, wh)?;
        fit_tps(&p, &t, cfg, &TpsParams::zeros(cfg.grid_k))?
    };
    let warped = warp_image(placed, &tps_grid(&fit.params, w, h)?, cfg.fill)?;
    Ok((fit, warped))
}

/// Smallest side of the fitting frame, so the grid penalty lattice has interior points.
pub const MIN_FRAME_SIDE: u32 = 32;

/// Inclusive pixel box `(x0, y0, x1, y1)` the warp is fitted in: the region's
/// bounding box grown by `margin` times its size on every side, at least
/// [`MIN_FRAME_SIDE`] wide and high where the image allows.
pub fn fit_frame(region: &BinaryMask, margin: f64) -> Option<(u32, u32, u32, u32)> {
    let (w, h) = region.dims();
    let (x0, y0, x1, y1) = region.bbox()?;
    let grow = |lo: u32, hi: u32, limit: u32| {
        let size = (hi - lo + 1) as f64;
        let target = (size * (1.0 + 2.0 * margin)).round().max(MIN_FRAME_SIDE as f64).min(limit as f64) as u32;
        let extra = target - (hi - lo + 1).min(target);
        let start = lo.saturating_sub(extra / 2).min(limit - target);
        (start, start + target - 1)
    };
    let (fx0, fx1) = grow(x0, x1, w);
    let (fy0, fy1) = grow(y0, y1, h);
    Some((fx0, fy0, fx1, fy1))
}

fn paste(canvas: &mut ImageBuffer, patch: &ImageBuffer, x0: u32, y0: u32) {
    for y in 0..patch.height() {
        for x in 0..patch.width() {
            canvas.pixel_mut(x0 + x, y0 + y).copy_from_slice(patch.pixel(x, y));
        }
    }
}

/// Fits a TPS warp per record, aligning the placed accessory with its target
/// crop inside the record's fitting frame. Outside the frame the warped image is fill.
pub fn run_warp(cfg: &PipelineConfig, records: &[ImageRecord]) -> std::result::Result<StageReport, PipelineError> {
    let root = cfg.dataset_root.clone();
    ensure_dirs(&root, &OUTPUT_DIRS)?;
    let gmm = cfg.fit_config();
    let outcomes = run_records(cfg.jobs, records, |r| warp_one(cfg, &gmm, &root, r))?;
    Ok(StageReport::new("warp", outcomes))
}

fn warp_one(cfg: &PipelineConfig, gmm: &GmmConfig, root: &Path, record: &ImageRecord) -> Outcome {
    let id = record.id.as_str();
    let (Some(acc_path), Some(mask_path)) = (&record.accessory_image, &record.accessory_mask) else {
        return Outcome::new(id, Status::Error(format!("missing {}", record.missing.join(", "))));
    };
    let target_path = output_path(root, TARGET_CROP_DIR, id, "png");
    let region_path = output_path(root, AGNOSTIC_MASK_DIR, id, "png");
    if !target_path.is_file() || !region_path.is_file() {
        return Outcome::new(id, Status::Error("no prepare outputs for this id".into()));
    }
    let loaded = (|| -> Result<_> {
        Ok((
            load_image(acc_path)?,
            load_mask(mask_path)?,
            load_image(&target_path)?.to_rgb(),
            load_mask(&region_path)?,
        ))
    })();
    let (acc, acc_mask, target, region) = match loaded {
        Ok(v) => v,
        Err(e) => return Outcome::new(id, Status::Error(e.to_string())),
    };
    if region.is_empty() && cfg.placement == Placement::Bbox {
        return Outcome::new(id, Status::Warning("empty region mask, nothing to fit".into()));
    }
    let result = (|| -> Result<(FitResult, (u32, u32, u32, u32))> {
        let placed = place_accessory(&acc, &acc_mask, &region, cfg.placement, gmm.fill)?;
        let (w, h) = target.dims();
        let frame = match cfg.placement {
            Placement::Bbox => fit_frame(&region, cfg.fit_margin).expect("region is non-empty"),
            Placement::Frame => (0, 0, w - 1, h - 1),
        };
        let (x0, y0, x1, y1) = frame;
        let (fit, warped_patch) = fit_and_warp(
            &crop(&placed, x0, y0, x1, y1)?,
            &crop(&target, x0, y0, x1, y1)?,
            gmm,
            cfg.fit_max_side,
        )?;
        let mut warped = ImageBuffer::filled(w, h, 3, gmm.fill)?;
        paste(&mut warped, &warped_patch, x0, y0);
        save_image(&output_path(root, WARP_DIR, id, "png"), &warped)?;
        let params = output_path(root, PARAMS_DIR, id, "txt");
        let text = format!("# frame = {x0},{y0},{x1},{y1}\n{}", fit.params.to_text());
        fs::write(&params, text).map_err(|e| Error::Io { path: params, source: e })?;
        let loss = output_path(root, LOSS_DIR, id, "csv");
        fs::write(&loss, fit.history_csv()).map_err(|e| Error::Io { path: loss, source: e })?;
        Ok((fit, frame))
    })();
    match result {
        Ok((fit, (x0, y0, x1, y1))) => {
            let mut out = Outcome::new(id, Status::Ok);
            let last = fit.history.last().map(|h| h.1).unwrap_or(f64::NAN);
            out.fields.push(("final_loss", format!("{last:?}")));
            out.fields.push(("best_loss", format!("{:?}", fit.best_loss)));
            out.fields.push(("best_step", fit.best_step.to_string()));
            out.fields.push(("steps", gmm.max_steps.to_string()));
            out.fields.push(("frame", format!("{x0} {y0} {x1} {y1}")));
            out.fields.push(("params", format!("{PARAMS_DIR}/{id}.txt")));
            out
        }
        Err(e) => Outcome::new(id, Status::Error(e.to_string())),
    }
}
