//! Image, mask and label-map primitives.
//!
//! Coordinates: origin top-left, x to the right, y downward, pixel centers
//! at integer coordinates.

mod components;
pub mod io;

pub use components::{connected_components, ComponentStats};

use crate::error::{Error, Result};

/// Interleaved, row-major 8-bit image with 1 or 3 channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("empty image {width}x{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Channel {
                expected: 3,
                actual: channels,
            });
        }
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "buffer holds {} samples, {width}x{height}x{channels} needs {expected}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn filled(width: u32, height: u32, channels: u8, value: u8) -> Result<Self> {
        let len = width as usize * height as usize * channels as usize;
        Self::new(width, height, channels, vec![value; len])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize
    }

    /// Samples of the pixel at (x, y).
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let o = self.offset(x, y);
        &self.data[o..o + self.channels as usize]
    }

    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [u8] {
        let o = self.offset(x, y);
        let c = self.channels as usize;
        &mut self.data[o..o + c]
    }

    /// Expands a grayscale image to three identical channels; RGB is cloned.
    pub fn to_rgb(&self) -> ImageBuffer {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 3,
            data,
        }
    }

    /// Luma plane as f64 (ITU-R BT.601 weights for RGB input).
    pub fn luma(&self) -> Vec<f64> {
        match self.channels {
            1 => self.data.iter().map(|&v| v as f64).collect(),
            _ => self
                .data
                .chunks_exact(3)
                .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
                .collect(),
        }
    }
}

/// Row-major boolean grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width as usize * height as usize {
            return Err(Error::Dimension(format!(
                "mask holds {} bits, {width}x{height} needs {}",
                bits.len(),
                width as usize * height as usize
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![true; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Tight bounding box `(min_x, min_y, max_x, max_y)` of set bits.
    pub fn bbox(&self) -> Option<(u32, u32, u32, u32)> {
        let mut bounds: Option<(u32, u32, u32, u32)> = None;
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            let x = (i % self.width as usize) as u32;
            let y = (i / self.width as usize) as u32;
            bounds = Some(match bounds {
                None => (x, y, x, y),
                Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
            });
        }
        bounds
    }

    /// 0/255 grayscale rendering.
    pub fn to_image(&self) -> ImageBuffer {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}

/// Label-id scheme a parse map is validated against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelScheme {
    num_labels: u8,
}

impl LabelScheme {
    /// Look-Into-Person, 20 labels.
    pub const LIP: LabelScheme = LabelScheme { num_labels: 20 };

    pub fn custom(num_labels: u8) -> Result<Self> {
        if num_labels == 0 {
            return Err(Error::Range("label scheme needs at least one label".into()));
        }
        Ok(Self { num_labels })
    }

    pub fn num_labels(&self) -> u8 {
        self.num_labels
    }

    pub fn check(&self, label: u8) -> Result<()> {
        if label < self.num_labels {
            Ok(())
        } else {
            Err(Error::Label {
                label,
                num_labels: self.num_labels,
            })
        }
    }
}

impl Default for LabelScheme {
    fn default() -> Self {
        Self::LIP
    }
}

/// LIP label ids.
pub mod lip {
    pub const BACKGROUND: u8 = 0;
    pub const HAT: u8 = 1;
    pub const HAIR: u8 = 2;
    pub const GLOVE: u8 = 3;
    pub const SUNGLASSES: u8 = 4;
    pub const UPPER_CLOTHES: u8 = 5;
    pub const DRESS: u8 = 6;
    pub const COAT: u8 = 7;
    pub const SOCKS: u8 = 8;
    pub const PANTS: u8 = 9;
    pub const JUMPSUITS: u8 = 10;
    pub const SCARF: u8 = 11;
    pub const SKIRT: u8 = 12;
    pub const FACE: u8 = 13;
    pub const LEFT_ARM: u8 = 14;
    pub const RIGHT_ARM: u8 = 15;
    pub const LEFT_LEG: u8 = 16;
    pub const RIGHT_LEG: u8 = 17;
    pub const LEFT_SHOE: u8 = 18;
    pub const RIGHT_SHOE: u8 = 19;
}

/// Per-pixel human-parsing labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseMap {
    width: u32,
    height: u32,
    scheme: LabelScheme,
    labels: Vec<u8>,
}

impl ParseMap {
    pub fn new(width: u32, height: u32, labels: Vec<u8>, scheme: LabelScheme) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!("empty parse map {width}x{height}")));
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::Dimension(format!(
                "parse map holds {} labels, {width}x{height} needs {}",
                labels.len(),
                width as usize * height as usize
            )));
        }
        for &l in &labels {
            scheme.check(l)?;
        }
        Ok(Self {
            width,
            height,
            scheme,
            labels,
        })
    }

    pub fn filled(width: u32, height: u32, label: u8, scheme: LabelScheme) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![label; width as usize * height as usize],
            scheme,
        )
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn scheme(&self) -> LabelScheme {
        self.scheme
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.labels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, label: u8) -> Result<()> {
        self.scheme.check(label)?;
        let w = self.width as usize;
        self.labels[y as usize * w + x as usize] = label;
        Ok(())
    }

    /// Fills the inclusive rectangle with `label`, clipped to bounds.
    pub fn fill_rect(&mut self, x0: u32, y0: u32, x1: u32, y1: u32, label: u8) -> Result<()> {
        self.scheme.check(label)?;
        for y in y0..=y1.min(self.height - 1) {
            for x in x0..=x1.min(self.width - 1) {
                self.labels[y as usize * self.width as usize + x as usize] = label;
            }
        }
        Ok(())
    }
}

fn check_same_dims(a: (u32, u32), b: (u32, u32), what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!(
            "{what}: {}x{} vs {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// Sets a bit wherever the single-channel sample exceeds `threshold`.
pub fn binarize(img: &ImageBuffer, threshold: u8) -> Result<BinaryMask> {
    if img.channels != 1 {
        return Err(Error::Channel {
            expected: 1,
            actual: img.channels,
        });
    }
    let bits = img.data.iter().map(|&v| v > threshold).collect();
    BinaryMask::new(img.width, img.height, bits)
}

pub fn mask_intersect(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    check_same_dims(a.dims(), b.dims(), "mask intersection")?;
    let bits = a.bits.iter().zip(&b.bits).map(|(&p, &q)| p && q).collect();
    BinaryMask::new(a.width, a.height, bits)
}

pub fn mask_union(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    check_same_dims(a.dims(), b.dims(), "mask union")?;
    let bits = a.bits.iter().zip(&b.bits).map(|(&p, &q)| p || q).collect();
    BinaryMask::new(a.width, a.height, bits)
}

/// Mask of pixels whose label is in `labels`.
pub fn label_mask(parse: &ParseMap, labels: &[u8]) -> Result<BinaryMask> {
    if labels.is_empty() {
        return Err(Error::Range("label set is empty".into()));
    }
    for &l in labels {
        parse.scheme.check(l)?;
    }
    let mut table = [false; 256];
    for &l in labels {
        table[l as usize] = true;
    }
    let bits = parse.labels.iter().map(|&l| table[l as usize]).collect();
    BinaryMask::new(parse.width, parse.height, bits)
}

/// Pixels whose center lies within `radius` of `center`.
pub fn rasterize_disk(center: (f64, f64), radius: f64, width: u32, height: u32) -> Result<BinaryMask> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::Geometry(format!("disk radius must be >= 0, got {radius}")));
    }
    if !center.0.is_finite() || !center.1.is_finite() {
        return Err(Error::Geometry("disk center is not finite".into()));
    }
    let mut mask = BinaryMask::empty(width, height);
    let (cx, cy) = center;
    let x0 = (cx - radius).floor().max(0.0);
    let x1 = (cx + radius).ceil().min(width as f64 - 1.0);
    let y0 = (cy - radius).floor().max(0.0);
    let y1 = (cy + radius).ceil().min(height as f64 - 1.0);
    if x0 > x1 || y0 > y1 {
        return Ok(mask);
    }
    let r2 = radius * radius;
    for y in y0 as u32..=y1 as u32 {
        for x in x0 as u32..=x1 as u32 {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            if dx * dx + dy * dy <= r2 {
                mask.set(x, y, true);
            }
        }
    }
    Ok(mask)
}

/// Replaces masked pixels with a uniform gray.
pub fn overlay_gray(img: &ImageBuffer, mask: &BinaryMask, gray: u8) -> Result<ImageBuffer> {
    check_same_dims(img.dims(), mask.dims(), "gray overlay")?;
    let mut out = img.clone();
    let c = img.channels as usize;
    for (px, _) in out
        .data
        .chunks_exact_mut(c)
        .zip(&mask.bits)
        .filter(|(_, &m)| m)
    {
        px.fill(gray);
    }
    Ok(out)
}

/// Bilinear resize with half-pixel-centered sampling and edge clamping.
pub fn resize_bilinear(img: &ImageBuffer, width: u32, height: u32) -> Result<ImageBuffer> {
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!("resize target {width}x{height}")));
    }
    if img.dims() == (width, height) {
        return Ok(img.clone());
    }
    let c = img.channels as usize;
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    let max_x = img.width as f64 - 1.0;
    let max_y = img.height as f64 - 1.0;
    let mut data = Vec::with_capacity(width as usize * height as usize * c);
    for y in 0..height {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, max_y);
        let y0 = fy.floor() as u32;
        let y1 = (y0 + 1).min(img.height - 1);
        let wy = fy - y0 as f64;
        for x in 0..width {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, max_x);
            let x0 = fx.floor() as u32;
            let x1 = (x0 + 1).min(img.width - 1);
            let wx = fx - x0 as f64;
            for ch in 0..c {
                let p00 = img.pixel(x0, y0)[ch] as f64;
                let p10 = img.pixel(x1, y0)[ch] as f64;
                let p01 = img.pixel(x0, y1)[ch] as f64;
                let p11 = img.pixel(x1, y1)[ch] as f64;
                let top = p00 + wx * (p10 - p00);
                let bottom = p01 + wx * (p11 - p01);
                let v = top + wy * (bottom - top);
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageBuffer::new(width, height, img.channels, data)
}

/// Nearest-neighbour resize of a label map (labels must not be blended).
pub fn resize_nearest_labels(parse: &ParseMap, width: u32, height: u32) -> Result<ParseMap> {
    let mut labels = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        let sy = (((y as f64 + 0.5) * parse.height as f64 / height as f64) as u32).min(parse.height - 1);
        for x in 0..width {
            let sx = (((x as f64 + 0.5) * parse.width as f64 / width as f64) as u32).min(parse.width - 1);
            labels.push(parse.get(sx, sy));
        }
    }
    ParseMap::new(width, height, labels, parse.scheme)
}
