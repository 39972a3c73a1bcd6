//! Non-neural core of an accessory (watch) virtual try-on pipeline:
//! keypoint-driven watch localization, agnostic-mask construction,
//! thin-plate-spline warping fitted by direct optimization, and SSIM
//! evaluation.

pub mod agnostic;
pub mod error;
pub mod imaging;
pub mod keypoints;
pub mod locate;
pub mod metrics;
pub mod tps;
pub mod viz;

pub use error::{Error, Result};
