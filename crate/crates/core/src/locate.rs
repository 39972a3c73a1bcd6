//! Watch localization.
//!
//! The preferred estimate reflects the hand's wrist landmark (0) away from
//! the midpoint of the middle and ring finger bases (9, 13): the wrist
//! landmark sits halfway between those knuckles and the watch face. When no
//! usable hand is available, a detected wrist keypoint is used with a
//! height-relative radius, and when that is missing too, the gap between the
//! two largest arm regions of the parse map.

use crate::error::{Error, Result};
use crate::imaging::{connected_components, label_mask, lip, ParseMap};
use crate::keypoints::{hand, BodyPose, HandLandmarks, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteSource {
    HandLandmarks,
    WristKeypoint,
    ArmFallback,
}

impl SiteSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            SiteSource::HandLandmarks => "hand-landmarks",
            SiteSource::WristKeypoint => "wrist-keypoint",
            SiteSource::ArmFallback => "arm-fallback",
        }
    }
}

/// Predicted watch center and mask radius. The center may lie outside the
/// image; rasterization clips.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WatchSite {
    pub center: (f64, f64),
    pub radius: f64,
    pub source: SiteSource,
}

pub const DEFAULT_RADIUS_FRAC: f64 = 0.06;

fn midpoint(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)
}

pub fn watch_from_hand(h: &HandLandmarks) -> Result<WatchSite> {
    let k0 = h.point(hand::WRIST);
    let m = midpoint(h.point(hand::MIDDLE_MCP), h.point(hand::RING_MCP));
    let center = (2.0 * k0.0 - m.0, 2.0 * k0.1 - m.1);
    let radius = (center.0 - k0.0).hypot(center.1 - k0.1);
    if !radius.is_finite() {
        return Err(Error::DegenerateGeometry("non-finite hand landmarks".into()));
    }
    if radius == 0.0 {
        return Err(Error::DegenerateGeometry(
            "wrist landmark coincides with knuckle midpoint".into(),
        ));
    }
    Ok(WatchSite {
        center,
        radius,
        source: SiteSource::HandLandmarks,
    })
}

/// Midpoint of the centroids of the two largest arm regions.
pub fn wrist_fallback(parse: &ParseMap) -> Result<(f64, f64)> {
    let arms = label_mask(parse, &[lip::LEFT_ARM, lip::RIGHT_ARM])?;
    let components = connected_components(&arms);
    match components.as_slice() {
        [] => Err(Error::NoArm),
        [_] => Err(Error::InsufficientContours { found: 1 }),
        [a, b, ..] => Ok(midpoint(a.centroid, b.centroid)),
    }
}

/// Picks the hand nearest a detected wrist keypoint, or the right hand
/// when no wrist is available.
pub fn select_hand<'a>(hands: &'a [HandLandmarks], pose: Option<&BodyPose>) -> Option<&'a HandLandmarks> {
    let wrists: Vec<(f64, f64)> = pose
        .map(|p| [Side::Right, Side::Left].iter().filter_map(|&s| p.wrist(s)).collect())
        .unwrap_or_default();

    if wrists.is_empty() {
        return hands
            .iter()
            .find(|h| h.handedness == Side::Right)
            .or_else(|| hands.first());
    }

    let dist = |h: &HandLandmarks| {
        let k0 = h.point(hand::WRIST);
        wrists
            .iter()
            .map(|w| (w.0 - k0.0).hypot(w.1 - k0.1))
            .fold(f64::INFINITY, f64::min)
    };
    hands
        .iter()
        .min_by(|a, b| dist(a).total_cmp(&dist(b)))
}

/// Tries hand landmarks, then wrist keypoints, then the arm-gap fallback.
pub fn resolve_site(
    hands: &[HandLandmarks],
    pose: Option<&BodyPose>,
    parse: &ParseMap,
    default_radius_frac: f64,
) -> Result<WatchSite> {
    let mut failures = Vec::new();

    if let Some(h) = select_hand(hands, pose) {
        match watch_from_hand(h) {
            Ok(site) => return Ok(site),
            Err(e) => failures.push(format!("hand landmarks: {e}")),
        }
    } else {
        failures.push("hand landmarks: none".to_string());
    }

    let radius = default_radius_frac * parse.height() as f64;
    if !(radius > 0.0) {
        return Err(Error::Range(format!(
            "default radius fraction {default_radius_frac} gives non-positive radius"
        )));
    }

    let wrist = pose.and_then(|p| p.wrist(Side::Right).or_else(|| p.wrist(Side::Left)));
    match wrist {
        Some(center) => {
            return Ok(WatchSite {
                center,
                radius,
                source: SiteSource::WristKeypoint,
            })
        }
        None => failures.push("wrist keypoints: missing".to_string()),
    }

    match wrist_fallback(parse) {
        Ok(center) => Ok(WatchSite {
            center,
            radius,
            source: SiteSource::ArmFallback,
        }),
        Err(e) => {
            failures.push(format!("arm fallback: {e}"));
            Err(Error::Localization(failures.join("; ")))
        }
    }
}
