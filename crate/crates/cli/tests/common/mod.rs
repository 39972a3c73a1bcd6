#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use tryon_cli::layout::{CLOTH_DIR, CLOTH_MASK_DIR, HANDS_DIR, IMAGE_DIR, PARSE_DIR, POSE_DIR, POSE_SUFFIX};
use tryon_cli::PipelineConfig;
use tryon_core::imaging::io::{save_image, save_mask, save_parse_map};
use tryon_core::imaging::{lip, rasterize_disk, BinaryMask, ImageBuffer, LabelScheme, ParseMap};
use tryon_core::keypoints::{hands_to_json, BodyPose, HandLandmarks, Keypoint, Side, RIGHT_WRIST};

pub const WIDTH: u32 = 96;
pub const HEIGHT: u32 = 128;
/// Arm rows: upper segment ends at `GAP.0 - 1`, lower starts at `GAP.1 + 1`.
pub const ARM_TOP: u32 = 20;
pub const ARM_BOTTOM: u32 = 110;
pub const GAP: (u32, u32) = (61, 71);
pub const ARM_HALF_WIDTH: u32 = 10;
pub const WATCH_RADIUS: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Hand landmarks placing the watch exactly at the gap center.
    Hand,
    /// Right wrist keypoint at the gap center, no landmarks.
    Wrist,
    /// Wrist missing and no landmarks; only the arm split locates it.
    Fallback,
    /// Nothing to locate with: no landmarks, no wrist, no arms.
    Unlocatable,
}

pub fn arm_x(index: usize) -> u32 {
    30 + 4 * index as u32
}

/// Watch center for the record at `index`.
pub fn watch_center(index: usize) -> (f64, f64) {
    (arm_x(index) as f64, (GAP.0 + GAP.1) as f64 / 2.0)
}

fn person(index: usize, kind: Kind) -> (ImageBuffer, ParseMap) {
    let mut img = ImageBuffer::filled(WIDTH, HEIGHT, 3, 0).unwrap();
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            let v = 220 + ((x + 2 * y) % 24) as u8;
            img.pixel_mut(x, y).copy_from_slice(&[v, v, v.saturating_sub(8)]);
        }
    }
    let mut parse = ParseMap::filled(WIDTH, HEIGHT, lip::BACKGROUND, LabelScheme::LIP).unwrap();
    let cx = arm_x(index);
    if kind != Kind::Unlocatable {
        let (x0, x1) = (cx - ARM_HALF_WIDTH, cx + ARM_HALF_WIDTH);
        for (y0, y1) in [(ARM_TOP, GAP.0 - 1), (GAP.1 + 1, ARM_BOTTOM)] {
            parse.fill_rect(x0, y0, x1, y1, lip::RIGHT_ARM).unwrap();
            for y in y0..=y1 {
                for x in x0..=x1 {
                    img.pixel_mut(x, y).copy_from_slice(&[205, 160, 130]);
                }
            }
        }
    }
    let center = watch_center(index);
    let case = rasterize_disk(center, WATCH_RADIUS, WIDTH, HEIGHT).unwrap();
    let dial = rasterize_disk(center, 2.5, WIDTH, HEIGHT).unwrap();
    for y in 0..HEIGHT {
        for x in 0..WIDTH {
            if dial.get(x, y) {
                img.pixel_mut(x, y).copy_from_slice(&[235, 235, 225]);
            } else if case.get(x, y) {
                img.pixel_mut(x, y).copy_from_slice(&[35, 40, 120]);
            }
        }
    }
    (img, parse)
}

/// Product shot of the watch and its mask.
pub fn accessory() -> (ImageBuffer, BinaryMask) {
    let size = 40;
    let c = (19.5, 19.5);
    let case = rasterize_disk(c, 14.0, size, size).unwrap();
    let dial = rasterize_disk(c, 6.0, size, size).unwrap();
    let mut img = ImageBuffer::filled(size, size, 3, 255).unwrap();
    for y in 0..size {
        for x in 0..size {
            if dial.get(x, y) {
                img.pixel_mut(x, y).copy_from_slice(&[235, 235, 225]);
            } else if case.get(x, y) {
                img.pixel_mut(x, y).copy_from_slice(&[35, 40, 120]);
            }
        }
    }
    (img, case)
}

fn pose(index: usize, kind: Kind) -> BodyPose {
    let mut points = [Keypoint {
        x: 0.0,
        y: 0.0,
        confidence: 0.0,
    }; 19];
    // neck and shoulders so the document looks like a real detection
    points[1] = Keypoint { x: 48.0, y: 10.0, confidence: 0.9 };
    points[2] = Keypoint { x: 36.0, y: 12.0, confidence: 0.8 };
    if kind == Kind::Wrist {
        let (x, y) = watch_center(index);
        points[RIGHT_WRIST] = Keypoint { x, y, confidence: 0.85 };
    }
    BodyPose { points }
}

/// Landmarks with the wrist base 8 px above the watch and the finger bases 8 px above that.
pub fn hand(index: usize) -> HandLandmarks {
    let (cx, cy) = watch_center(index);
    let mut points = [(cx, cy - 20.0); 21];
    points[0] = (cx, cy - 8.0);
    points[9] = (cx - 3.0, cy - 16.0);
    points[13] = (cx + 3.0, cy - 16.0);
    HandLandmarks {
        points,
        handedness: Side::Right,
    }
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{i:03}")).collect()
}

/// Writes a dataset tree with one record per entry of `kinds`, ids `000`, `001`, ...
pub fn write_tree(root: &Path, kinds: &[Kind]) {
    for d in [IMAGE_DIR, PARSE_DIR, POSE_DIR, CLOTH_DIR, CLOTH_MASK_DIR, HANDS_DIR] {
        fs::create_dir_all(root.join(d)).unwrap();
    }
    let (acc, acc_mask) = accessory();
    for (index, (&kind, id)) in kinds.iter().zip(ids(kinds.len())).enumerate() {
        let (img, parse) = person(index, kind);
        save_image(&root.join(IMAGE_DIR).join(format!("{id}.png")), &img).unwrap();
        save_parse_map(&root.join(PARSE_DIR).join(format!("{id}.png")), &parse).unwrap();
        fs::write(root.join(POSE_DIR).join(format!("{id}{POSE_SUFFIX}")), pose(index, kind).to_json()).unwrap();
        save_image(&root.join(CLOTH_DIR).join(format!("{id}.png")), &acc).unwrap();
        save_mask(&root.join(CLOTH_MASK_DIR).join(format!("{id}.png")), &acc_mask).unwrap();
        if kind == Kind::Hand {
            let doc = hands_to_json(&[hand(index)], WIDTH, HEIGHT);
            fs::write(root.join(HANDS_DIR).join(format!("{id}.json")), doc).unwrap();
        }
    }
}

pub fn config(root: &Path) -> PipelineConfig {
    PipelineConfig {
        dataset_root: root.to_path_buf(),
        jobs: 2,
        deterministic: true,
        ..PipelineConfig::default()
    }
}

/// Relative path → file bytes for every file under `root`.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                out.insert(path.strip_prefix(base).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn file_count(dir: &Path) -> usize {
    fs::read_dir(dir).map(|d| d.count()).unwrap_or(0)
}
