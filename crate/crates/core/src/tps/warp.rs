//! Inverse-mapping bilinear warps. Each of the four taps reads `fill` when
//! it falls outside the source, so the sampled value stays continuous in
//! the grid coordinates.

use super::grid::WarpGrid;
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;

/// Interleaved f64 image with samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage {
    pub width: u32,
    pub height: u32,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl FloatImage {
    pub fn from_image(img: &ImageBuffer) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            channels: img.channels() as usize,
            data: img.data().iter().map(|&v| v as f64 / 255.0).collect(),
        }
    }

    pub fn to_image(&self) -> Result<ImageBuffer> {
        let data = self
            .data
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        ImageBuffer::new(self.width, self.height, self.channels as u8, data)
    }

    fn tap(&self, x: i64, y: i64, c: usize, fill: f64) -> f64 {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            fill
        } else {
            self.data[(y as usize * self.width as usize + x as usize) * self.channels + c]
        }
    }
}

/// Bilinear sample and its partial derivatives in x and y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub d_dx: f64,
    pub d_dy: f64,
}

pub fn sample_bilinear(src: &FloatImage, x: f64, y: f64, c: usize, fill: f64) -> Sample {
    if !x.is_finite() || !y.is_finite() {
        return Sample {
            value: fill,
            d_dx: 0.0,
            d_dy: 0.0,
        };
    }
    let (x0f, y0f) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0f, y - y0f);
    // far outside: every tap is fill
    if x0f < -1.0 || y0f < -1.0 || x0f >= src.width as f64 || y0f >= src.height as f64 {
        return Sample {
            value: fill,
            d_dx: 0.0,
            d_dy: 0.0,
        };
    }
    let (x0, y0) = (x0f as i64, y0f as i64);
    let v00 = src.tap(x0, y0, c, fill);
    let v10 = src.tap(x0 + 1, y0, c, fill);
    let v01 = src.tap(x0, y0 + 1, c, fill);
    let v11 = src.tap(x0 + 1, y0 + 1, c, fill);
    let top = v00 + fx * (v10 - v00);
    let bottom = v01 + fx * (v11 - v01);
    Sample {
        value: top + fy * (bottom - top),
        d_dx: (1.0 - fy) * (v10 - v00) + fy * (v11 - v01),
        d_dy: bottom - top,
    }
}

/// Warps a float image; output takes the grid's dimensions.
pub fn warp_float(src: &FloatImage, grid: &WarpGrid, fill: f64) -> FloatImage {
    let c = src.channels;
    let mut data = Vec::with_capacity(grid.gx.len() * c);
    for (&x, &y) in grid.gx.iter().zip(&grid.gy) {
        for ch in 0..c {
            data.push(sample_bilinear(src, x, y, ch, fill).value);
        }
    }
    FloatImage {
        width: grid.width(),
        height: grid.height(),
        channels: c,
        data,
    }
}

/// Bilinear inverse warp of an 8-bit image, rounding to nearest.
pub fn warp_image(img: &ImageBuffer, grid: &WarpGrid, fill: u8) -> Result<ImageBuffer> {
    let c = img.channels() as usize;
    let mut data = Vec::with_capacity(grid.gx.len() * c);
    let src = FloatImage {
        width: img.width(),
        height: img.height(),
        channels: c,
        data: img.data().iter().map(|&v| v as f64).collect(),
    };
    for (&x, &y) in grid.gx.iter().zip(&grid.gy) {
        for ch in 0..c {
            let v = sample_bilinear(&src, x, y, ch, fill as f64).value;
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    ImageBuffer::new(grid.width(), grid.height(), img.channels(), data)
        .map_err(|e| Error::Dimension(format!("warp output: {e}")))
}
