//! Body-pose and hand-landmark ingestion.
//!
//! Body pose documents use the common pose-detector layout:
//!
//! ```json
//! {"people": [{"pose_keypoints_2d": [x0, y0, c0, x1, y1, c1, ...]}]}
//! ```
//!
//! with 19 triples in pixel units. Hand landmark documents are either a
//! single hand or a list of hands, with coordinates normalized to `[0, 1]`:
//!
//! ```json
//! {"handedness": "right", "landmarks": [[0.51, 0.62], ...]}
//! {"hands": [{"handedness": "left", "landmarks": [...]}, ...]}
//! ```
//!
//! Each landmark is `[x, y]` or `[x, y, z]`; a depth value is ignored.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const BODY_POINTS: usize = 19;
pub const HAND_POINTS: usize = 21;

pub const BODY_POINT_NAMES: [&str; BODY_POINTS] = [
    "Nose", "Neck", "RShoulder", "RElbow", "RWrist", "LShoulder", "LElbow", "LWrist", "RHip",
    "RKnee", "RAnkle", "LHip", "LKnee", "LAnkle", "REye", "LEye", "REar", "LEar", "Background",
];

pub const RIGHT_WRIST: usize = 4;
pub const LEFT_WRIST: usize = 7;

/// Hand landmark indices used for watch localization.
pub mod hand {
    pub const WRIST: usize = 0;
    pub const MIDDLE_MCP: usize = 9;
    pub const RING_MCP: usize = 13;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    /// Detectors emit `(0, 0)` or zero confidence for undetected points.
    pub fn is_missing(&self) -> bool {
        (self.x == 0.0 && self.y == 0.0) || self.confidence <= 0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BodyPose {
    pub points: [Keypoint; BODY_POINTS],
}

impl BodyPose {
    pub fn point(&self, index: usize) -> Option<(f64, f64)> {
        self.points
            .get(index)
            .filter(|p| !p.is_missing())
            .map(|p| (p.x, p.y))
    }

    pub fn wrist(&self, side: Side) -> Option<(f64, f64)> {
        wrist(self, side)
    }

    /// Serializes as a single-person pose document.
    pub fn to_json(&self) -> String {
        let flat: Vec<f64> = self
            .points
            .iter()
            .flat_map(|p| [p.x, p.y, p.confidence])
            .collect();
        serde_json::json!({
            "version": 1.3,
            "people": [{ "pose_keypoints_2d": flat }],
        })
        .to_string()
    }
}

#[derive(Deserialize)]
struct PoseDocument {
    people: Vec<PersonEntry>,
}

#[derive(Deserialize)]
struct PersonEntry {
    pose_keypoints_2d: Vec<f64>,
}

/// Parses the first person of a pose document.
pub fn parse_body_pose(document: &str) -> Result<BodyPose> {
    let doc: PoseDocument = serde_json::from_str(document)
        .map_err(|e| Error::Schema(format!("pose document: {e}")))?;
    let person = doc.people.first().ok_or(Error::NoPerson)?;
    let flat = &person.pose_keypoints_2d;
    if flat.len() != BODY_POINTS * 3 {
        return Err(Error::Schema(format!(
            "pose_keypoints_2d has {} values, expected {}",
            flat.len(),
            BODY_POINTS * 3
        )));
    }
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Schema("non-finite keypoint value".into()));
    }
    let mut points = [Keypoint {
        x: 0.0,
        y: 0.0,
        confidence: 0.0,
    }; BODY_POINTS];
    for (p, t) in points.iter_mut().zip(flat.chunks_exact(3)) {
        *p = Keypoint {
            x: t[0],
            y: t[1],
            confidence: t[2],
        };
    }
    Ok(BodyPose { points })
}

pub fn wrist(pose: &BodyPose, side: Side) -> Option<(f64, f64)> {
    match side {
        Side::Right => pose.point(RIGHT_WRIST),
        Side::Left => pose.point(LEFT_WRIST),
    }
}

/// One detected hand, landmarks in pixel coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct HandLandmarks {
    pub points: [(f64, f64); HAND_POINTS],
    pub handedness: Side,
}

impl HandLandmarks {
    pub fn point(&self, index: usize) -> (f64, f64) {
        self.points[index]
    }

    pub fn translated(&self, dx: f64, dy: f64) -> HandLandmarks {
        let mut out = self.clone();
        for p in out.points.iter_mut() {
            p.0 += dx;
            p.1 += dy;
        }
        out
    }

    pub fn scaled(&self, s: f64) -> HandLandmarks {
        let mut out = self.clone();
        for p in out.points.iter_mut() {
            p.0 *= s;
            p.1 *= s;
        }
        out
    }
}

#[derive(Deserialize)]
struct HandEntry {
    handedness: Side,
    landmarks: Vec<Vec<f64>>,
}

fn hand_from_entry(entry: HandEntry, width: u32, height: u32) -> Result<HandLandmarks> {
    if entry.landmarks.len() != HAND_POINTS {
        return Err(Error::Schema(format!(
            "expected {HAND_POINTS} landmarks, found {}",
            entry.landmarks.len()
        )));
    }
    let mut points = [(0.0, 0.0); HAND_POINTS];
    for (i, (p, lm)) in points.iter_mut().zip(&entry.landmarks).enumerate() {
        if lm.len() != 2 && lm.len() != 3 {
            return Err(Error::Schema(format!(
                "landmark {i} has {} components, expected 2 or 3",
                lm.len()
            )));
        }
        let (x, y) = (lm[0], lm[1]);
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::Range(format!(
                "landmark {i} ({x}, {y}) outside normalized [0, 1]"
            )));
        }
        *p = (x * width as f64, y * height as f64);
    }
    Ok(HandLandmarks {
        points,
        handedness: entry.handedness,
    })
}

/// Parses a single-hand landmark document, scaling to pixels.
pub fn parse_hand_landmarks(document: &str, image_width: u32, image_height: u32) -> Result<HandLandmarks> {
    let entry: HandEntry = serde_json::from_str(document)
        .map_err(|e| Error::Schema(format!("hand landmark document: {e}")))?;
    hand_from_entry(entry, image_width, image_height)
}

/// Parses either document form, returning every hand.
pub fn parse_hands(document: &str, image_width: u32, image_height: u32) -> Result<Vec<HandLandmarks>> {
    let value: Value = serde_json::from_str(document)
        .map_err(|e| Error::Schema(format!("hand landmark document: {e}")))?;
    let entries: Vec<HandEntry> = match value.get("hands") {
        Some(hands) => serde_json::from_value(hands.clone())
            .map_err(|e| Error::Schema(format!("hands: {e}")))?,
        None => vec![serde_json::from_value(value)
            .map_err(|e| Error::Schema(format!("hand landmark document: {e}")))?],
    };
    entries
        .into_iter()
        .map(|e| hand_from_entry(e, image_width, image_height))
        .collect()
}

/// Writes hands back as a normalized landmark document.
pub fn hands_to_json(hands: &[HandLandmarks], image_width: u32, image_height: u32) -> String {
    let hands: Vec<Value> = hands
        .iter()
        .map(|h| {
            let landmarks: Vec<[f64; 2]> = h
                .points
                .iter()
                .map(|&(x, y)| [x / image_width as f64, y / image_height as f64])
                .collect();
            serde_json::json!({ "handedness": h.handedness, "landmarks": landmarks })
        })
        .collect();
    serde_json::json!({ "hands": hands }).to_string()
}
