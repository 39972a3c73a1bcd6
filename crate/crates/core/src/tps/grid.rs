use rayon::prelude::*;

use super::params::TpsParams;
use super::spline::TpsBasis;
use crate::error::{Error, Result};

/// Per-output-pixel source coordinates, in pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpGrid {
    width: u32,
    height: u32,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
}

impl WarpGrid {
    pub fn new(width: u32, height: u32, gx: Vec<f64>, gy: Vec<f64>) -> Result<Self> {
        let n = width as usize * height as usize;
        if width == 0 || height == 0 || gx.len() != n || gy.len() != n {
            return Err(Error::Dimension(format!(
                "grid {width}x{height} with {} / {} coordinates",
                gx.len(),
                gy.len()
            )));
        }
        Ok(Self {
            width,
            height,
            gx,
            gy,
        })
    }

    pub fn identity(width: u32, height: u32) -> Self {
        Self::from_fn(width, height, |x, y| (x as f64, y as f64))
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> (f64, f64)) -> Self {
        let n = width as usize * height as usize;
        let mut gx = Vec::with_capacity(n);
        let mut gy = Vec::with_capacity(n);
        for y in 0..height {
            for x in 0..width {
                let (sx, sy) = f(x, y);
                gx.push(sx);
                gy.push(sy);
            }
        }
        Self {
            width,
            height,
            gx,
            gy,
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

    pub fn get(&self, x: u32, y: u32) -> (f64, f64) {
        let i = y as usize * self.width as usize + x as usize;
        (self.gx[i], self.gy[i])
    }

    pub fn is_finite(&self) -> bool {
        self.gx.iter().chain(&self.gy).all(|v| v.is_finite())
    }

    /// Mean of `pixel - source` over the selected pixels: the forward
    /// displacement the warp applies to image content there.
    pub fn mean_forward_displacement(&self, select: impl Fn(u32, u32) -> bool) -> Option<(f64, f64)> {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for y in 0..self.height {
            for x in 0..self.width {
                if select(x, y) {
                    let (gx, gy) = self.get(x, y);
                    sx += x as f64 - gx;
                    sy += y as f64 - gy;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (sx / n as f64, sy / n as f64))
    }
}

/// Maps pixel-center coordinates to `[-1, 1]`: pixel 0 to -1 and pixel
/// `extent - 1` to +1.
#[derive(Clone, Copy, Debug)]
pub struct PixelFrame {
    width: u32,
    height: u32,
}

impl PixelFrame {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    /// Pixels per normalized unit along x and y (half the pixel-center span).
    pub fn half_extent(&self) -> (f64, f64) {
        (
            (self.width as f64 - 1.0) / 2.0,
            (self.height as f64 - 1.0) / 2.0,
        )
    }

    pub fn to_normalized(&self, x: f64, y: f64) -> (f64, f64) {
        let (hx, hy) = self.half_extent();
        let u = if hx > 0.0 { x / hx - 1.0 } else { 0.0 };
        let v = if hy > 0.0 { y / hy - 1.0 } else { 0.0 };
        (u, v)
    }

    pub fn to_pixel(&self, u: f64, v: f64) -> (f64, f64) {
        let (hx, hy) = self.half_extent();
        ((u + 1.0) * hx, (v + 1.0) * hy)
    }
}

/// Dense warp grid: each output pixel samples the source at its own position
/// plus the interpolated control displacement.
pub fn tps_grid(params: &TpsParams, width: u32, height: u32) -> Result<WarpGrid> {
    params.validate(f64::INFINITY)?;
    let basis = TpsBasis::new(params.grid_k())?;
    tps_grid_with(&basis, params, width, height)
}

pub fn tps_grid_with(basis: &TpsBasis, params: &TpsParams, width: u32, height: u32) -> Result<WarpGrid> {
    if basis.grid_k() != params.grid_k() {
        return Err(Error::Dimension(format!(
            "basis grid_k {} vs params grid_k {}",
            basis.grid_k(),
            params.grid_k()
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Dimension(format!("grid {width}x{height}")));
    }
    let frame = PixelFrame::new(width, height);
    let (hx, hy) = frame.half_extent();
    let n = basis.num_points();
    let w = width as usize;

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..height)
        .into_par_iter()
        .map(|y| {
            let mut weights = vec![0.0; n];
            let mut gx = Vec::with_capacity(w);
            let mut gy = Vec::with_capacity(w);
            for x in 0..width {
                let (u, v) = frame.to_normalized(x as f64, y as f64);
                basis.weights_into(u, v, &mut weights);
                let fx: f64 = weights.iter().zip(&params.dx).map(|(a, b)| a * b).sum();
                let fy: f64 = weights.iter().zip(&params.dy).map(|(a, b)| a * b).sum();
                gx.push(x as f64 + fx * hx);
                gy.push(y as f64 + fy * hy);
            }
            (gx, gy)
        })
        .collect();

    let mut gx = Vec::with_capacity(w * height as usize);
    let mut gy = Vec::with_capacity(w * height as usize);
    for (rx, ry) in rows {
        gx.extend(rx);
        gy.extend(ry);
    }
    let grid = WarpGrid::new(width, height, gx, gy)?;
    if !grid.is_finite() {
        return Err(Error::Numerical("non-finite warp grid".into()));
    }
    Ok(grid)
}

/// Source position (pixels) the spline assigns to an arbitrary output point.
pub fn tps_map_point(basis: &TpsBasis, params: &TpsParams, frame: PixelFrame, x: f64, y: f64) -> (f64, f64) {
    let (u, v) = frame.to_normalized(x, y);
    let (hx, hy) = frame.half_extent();
    (
        x + basis.eval(&params.dx, u, v) * hx,
        y + basis.eval(&params.dy, u, v) * hy,
    )
}

/// Spline weights for every pixel of a frame, cached for repeated grid
/// evaluation during fitting.
#[derive(Clone, Debug)]
pub struct PixelWeights {
    width: u32,
    height: u32,
    n: usize,
    weights: Vec<f64>,
}

impl PixelWeights {
    pub fn new(basis: &TpsBasis, width: u32, height: u32) -> Self {
        let frame = PixelFrame::new(width, height);
        let n = basis.num_points();
        let mut weights = vec![0.0; width as usize * height as usize * n];
        weights
            .par_chunks_mut(n * width as usize)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, w) in row.chunks_exact_mut(n).enumerate() {
                    let (u, v) = frame.to_normalized(x as f64, y as f64);
                    basis.weights_into(u, v, w);
                }
            });
        Self {
            width,
            height,
            n,
            weights,
        }
    }

    pub fn row(&self, pixel: usize) -> &[f64] {
        &self.weights[pixel * self.n..(pixel + 1) * self.n]
    }

    pub fn grid(&self, params: &TpsParams) -> WarpGrid {
        let (hx, hy) = PixelFrame::new(self.width, self.height).half_extent();
        let w = self.width as usize;
        let count = w * self.height as usize;
        let mut gx = Vec::with_capacity(count);
        let mut gy = Vec::with_capacity(count);
        for p in 0..count {
            let row = self.row(p);
            let fx: f64 = row.iter().zip(&params.dx).map(|(a, b)| a * b).sum();
            let fy: f64 = row.iter().zip(&params.dy).map(|(a, b)| a * b).sum();
            gx.push((p % w) as f64 + fx * hx);
            gy.push((p / w) as f64 + fy * hy);
        }
        WarpGrid {
            width: self.width,
            height: self.height,
            gx,
            gy,
        }
    }

    /// Chain rule from per-pixel grid gradients to control displacements.
    pub fn backprop(&self, grad_gx: &[f64], grad_gy: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (hx, hy) = PixelFrame::new(self.width, self.height).half_extent();
        let mut gdx = vec![0.0; self.n];
        let mut gdy = vec![0.0; self.n];
        for (p, (&ax, &ay)) in grad_gx.iter().zip(grad_gy).enumerate() {
            if ax == 0.0 && ay == 0.0 {
                continue;
            }
            for (i, &w) in self.row(p).iter().enumerate() {
                gdx[i] += ax * w;
                gdy[i] += ay * w;
            }
        }
        gdx.iter_mut().for_each(|g| *g *= hx);
        gdy.iter_mut().for_each(|g| *g *= hy);
        (gdx, gdy)
    }
}
