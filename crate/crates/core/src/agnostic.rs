//! Region mask, gray-overlay agnostic image and target crop.

use crate::error::{Error, Result};
use crate::imaging::{label_mask, mask_intersect, overlay_gray, rasterize_disk, BinaryMask, ImageBuffer, ParseMap};
use crate::locate::WatchSite;

pub const DEFAULT_GRAY: u8 = 128;
pub const DEFAULT_CROP_FILL: u8 = 255;

/// The region mask came out empty; processing continues with it.
#[derive(Clone, Debug, PartialEq)]
pub struct EmptyRegionWarning {
    pub center: (f64, f64),
    pub radius: f64,
}

impl std::fmt::Display for EmptyRegionWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "empty accessory region (disk at ({:.1}, {:.1}) r={:.1} has no pixels with the selected labels)",
            self.center.0, self.center.1, self.radius
        )
    }
}

#[derive(Clone, Debug)]
pub struct RegionMask {
    pub mask: BinaryMask,
    pub warning: Option<EmptyRegionWarning>,
}

#[derive(Clone, Debug)]
pub struct AgnosticBundle {
    pub region_mask: BinaryMask,
    pub agnostic_image: ImageBuffer,
    pub target_crop: ImageBuffer,
}

/// Disk around the site intersected with the pixels carrying `labels`.
pub fn build_region_mask(site: &WatchSite, parse: &ParseMap, labels: &[u8]) -> Result<RegionMask> {
    if !(site.radius > 0.0) {
        return Err(Error::Geometry(format!(
            "site radius must be positive, got {}",
            site.radius
        )));
    }
    let disk = rasterize_disk(site.center, site.radius, parse.width(), parse.height())?;
    let mask = mask_intersect(&disk, &label_mask(parse, labels)?)?;
    let warning = mask.is_empty().then(|| EmptyRegionWarning {
        center: site.center,
        radius: site.radius,
    });
    Ok(RegionMask { mask, warning })
}

pub fn build_agnostic(img: &ImageBuffer, region: &BinaryMask, gray: u8) -> Result<ImageBuffer> {
    overlay_gray(img, region, gray)
}

/// Keeps `img` inside the region and paints everything else `fill`.
pub fn build_target_crop(img: &ImageBuffer, region: &BinaryMask, fill: u8) -> Result<ImageBuffer> {
    overlay_gray(img, &region.complement(), fill)
}

pub fn build_bundle(img: &ImageBuffer, region: &BinaryMask, gray: u8, fill: u8) -> Result<AgnosticBundle> {
    Ok(AgnosticBundle {
        region_mask: region.clone(),
        agnostic_image: build_agnostic(img, region, gray)?,
        target_crop: build_target_crop(img, region, fill)?,
    })
}
