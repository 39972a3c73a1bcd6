use std::fs;
use std::path::Path;

use tryon_core::imaging::io::{load_image, load_parse_map};
use tryon_core::imaging::{ImageBuffer, ParseMap};
use tryon_core::keypoints::{parse_body_pose, parse_hands, BodyPose, HandLandmarks};
use tryon_core::locate::{resolve_site, WatchSite};
use tryon_core::Error;

use crate::config::PipelineConfig;
use crate::layout::ImageRecord;

/// Everything needed to locate the watch in one person image.
pub struct PersonInputs {
    pub image: ImageBuffer,
    pub parse: ParseMap,
    pub pose: Option<BodyPose>,
    pub hands: Vec<HandLandmarks>,
    pub notes: Vec<String>,
}

fn read_text(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_person(cfg: &PipelineConfig, record: &ImageRecord) -> Result<PersonInputs, String> {
    if !record.missing.is_empty() {
        return Err(format!("missing {}", record.missing.join(", ")));
    }
    let (Some(parse_path), Some(pose_path)) = (&record.parse, &record.body_pose) else {
        return Err("missing parse or pose".into());
    };
    let image = load_image(&record.person_image).map_err(|e| e.to_string())?;
    let parse = load_parse_map(parse_path, cfg.label_scheme).map_err(|e| e.to_string())?;
    if parse.dims() != image.dims() {
        return Err(format!(
            "parse map is {}x{} but image is {}x{}",
            parse.width(),
            parse.height(),
            image.width(),
            image.height()
        ));
    }
    let mut notes = record.notes.clone();
    let pose = match parse_body_pose(&read_text(pose_path)?) {
        Ok(p) => Some(p),
        Err(Error::NoPerson) => {
            notes.push("pose file lists no person".into());
            None
        }
        Err(e) => return Err(format!("{}: {e}", pose_path.display())),
    };
    let hands = match &record.hand_landmarks {
        Some(path) => parse_hands(&read_text(path)?, image.width(), image.height())
            .map_err(|e| format!("{}: {e}", path.display()))?,
        None => Vec::new(),
    };
    Ok(PersonInputs {
        image,
        parse,
        pose,
        hands,
        notes,
    })
}

pub fn locate(cfg: &PipelineConfig, inputs: &PersonInputs) -> Result<WatchSite, String> {
    resolve_site(&inputs.hands, inputs.pose.as_ref(), &inputs.parse, cfg.default_radius_frac).map_err(|e| e.to_string())
}
