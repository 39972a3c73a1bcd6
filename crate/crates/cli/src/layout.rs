use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::PipelineError;

pub const IMAGE_DIR: &str = "image";
pub const PARSE_DIR: &str = "image-parse-v3";
pub const POSE_DIR: &str = "openpose_json";
pub const HANDS_DIR: &str = "hand-landmarks";
pub const CLOTH_DIR: &str = "cloth";
pub const CLOTH_MASK_DIR: &str = "cloth-mask";

pub const AGNOSTIC_MASK_DIR: &str = "agnostic-mask";
pub const AGNOSTIC_DIR: &str = "agnostic";
pub const TARGET_CROP_DIR: &str = "target-crop";
pub const WATCH_SITE_DIR: &str = "watch-site";
pub const WARP_DIR: &str = "warp-cloth";
pub const PARAMS_DIR: &str = "tps-params";
pub const LOSS_DIR: &str = "loss";
pub const VISUALIZE_DIR: &str = "visualize";
pub const EVAL_DIR: &str = "eval";
pub const REPORT_DIR: &str = "reports";

pub const POSE_SUFFIX: &str = "_keypoints.json";

/// Subdirectories that must exist under the dataset root.
pub const MANDATORY_DIRS: [&str; 5] = [IMAGE_DIR, PARSE_DIR, POSE_DIR, CLOTH_DIR, CLOTH_MASK_DIR];

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Input files of one person image, tied together by the file stem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRecord {
    pub id: String,
    pub person_image: PathBuf,
    pub parse: Option<PathBuf>,
    pub body_pose: Option<PathBuf>,
    pub hand_landmarks: Option<PathBuf>,
    pub accessory_image: Option<PathBuf>,
    pub accessory_mask: Option<PathBuf>,
    /// Missing optional inputs; informational only.
    pub notes: Vec<String>,
    /// Missing mandatory inputs; a record with any is unusable.
    pub missing: Vec<String>,
}

impl ImageRecord {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

fn files_by_stem(dir: &Path, extensions: &[&str], suffix: &str) -> Result<BTreeMap<String, PathBuf>, PipelineError> {
    let mut out = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|e| PipelineError::io(dir.to_path_buf(), e))?;
    for entry in entries {
        let path = entry.map_err(|e| PipelineError::io(dir.to_path_buf(), e))?.path();
        if !path.is_file() {
            continue;
        }
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some((stem, ext)) = name.rsplit_once('.') else {
            continue;
        };
        if !extensions.iter().any(|e| e.eq_ignore_ascii_case(ext)) {
            continue;
        }
        let id = if suffix.is_empty() {
            stem
        } else {
            match name.strip_suffix(suffix) {
                Some(id) => id,
                None => continue,
            }
        };
        // first one wins in sorted order so the choice is stable
        out.entry(id.to_string()).or_insert(path);
    }
    Ok(out)
}

/// Collects one record per person image under `root`.
pub fn discover(root: &Path) -> Result<Vec<ImageRecord>, PipelineError> {
    let missing: Vec<&str> = MANDATORY_DIRS.iter().copied().filter(|d| !root.join(d).is_dir()).collect();
    if !missing.is_empty() {
        return Err(PipelineError::Layout(format!(
            "{} is missing {}",
            root.display(),
            missing.join(", ")
        )));
    }
    let images = files_by_stem(&root.join(IMAGE_DIR), &IMAGE_EXTENSIONS, "")?;
    let parses = files_by_stem(&root.join(PARSE_DIR), &["png"], "")?;
    let poses = files_by_stem(&root.join(POSE_DIR), &["json"], POSE_SUFFIX)?;
    let cloths = files_by_stem(&root.join(CLOTH_DIR), &IMAGE_EXTENSIONS, "")?;
    let cloth_masks = files_by_stem(&root.join(CLOTH_MASK_DIR), &IMAGE_EXTENSIONS, "")?;
    let hands_dir = root.join(HANDS_DIR);
    let hands = if hands_dir.is_dir() {
        files_by_stem(&hands_dir, &["json"], "")?
    } else {
        BTreeMap::new()
    };

    let mut records = Vec::with_capacity(images.len());
    for (id, person_image) in images {
        let mut missing = Vec::new();
        let mut take = |map: &BTreeMap<String, PathBuf>, what: String| {
            let found = map.get(&id).cloned();
            if found.is_none() {
                missing.push(what);
            }
            found
        };
        let parse = take(&parses, format!("{PARSE_DIR}/{id}.png"));
        let body_pose = take(&poses, format!("{POSE_DIR}/{id}{POSE_SUFFIX}"));
        let accessory_image = take(&cloths, format!("{CLOTH_DIR}/{id}.*"));
        let accessory_mask = take(&cloth_masks, format!("{CLOTH_MASK_DIR}/{id}.*"));
        let hand_landmarks = hands.get(&id).cloned();
        let mut notes = Vec::new();
        if hand_landmarks.is_none() {
            notes.push(format!("no {HANDS_DIR}/{id}.json"));
        }
        records.push(ImageRecord {
            id,
            person_image,
            parse,
            body_pose,
            hand_landmarks,
            accessory_image,
            accessory_mask,
            notes,
            missing,
        });
    }
    Ok(records)
}

/// `<root>/<dir>/<id>.<ext>`
pub fn output_path(root: &Path, dir: &str, id: &str, ext: &str) -> PathBuf {
    root.join(dir).join(format!("{id}.{ext}"))
}
