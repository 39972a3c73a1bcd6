use super::grid::WarpGrid;
use super::warp::FloatImage;
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;

/// Mean absolute difference of two images, samples scaled to `[0, 1]`.
pub fn l1_loss(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if a.dims() != b.dims() || a.channels() != b.channels() {
        return Err(Error::Dimension(format!(
            "l1 loss: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let total: u64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&p, &q)| p.abs_diff(q) as u64)
        .sum();
    Ok(total as f64 / 255.0 / a.data().len() as f64)
}

/// Which grid-consistency penalty to apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GicForm {
    /// For each interior lattice point, `|d(p, right) - d(p, left)| +
    /// |d(p, down) - d(p, up)|` with Euclidean distances between mapped
    /// points. Zero for any uniform grid.
    #[default]
    Distance,
    /// Sum of absolute first differences of the x coordinate toward all
    /// four neighbours. Not zero for the identity; kept for comparison.
    Printed,
}

impl std::str::FromStr for GicForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(GicForm::Distance),
            "printed" => Ok(GicForm::Printed),
            other => Err(Error::Parse(format!("unknown gic form {other:?}"))),
        }
    }
}

/// Lattice of grid points taken every `stride` pixels from the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GicLattice {
    pub stride: u32,
    pub nx: usize,
    pub ny: usize,
}

impl GicLattice {
    pub fn new(width: u32, height: u32, stride: u32) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Range("gic stride must be >= 1".into()));
        }
        let nx = ((width - 1) / stride) as usize + 1;
        let ny = ((height - 1) / stride) as usize + 1;
        if nx < 3 || ny < 3 {
            return Err(Error::Dimension(format!(
                "{width}x{height} grid at stride {stride} gives a {nx}x{ny} lattice, need 3x3"
            )));
        }
        Ok(Self { stride, nx, ny })
    }

    pub fn interior_points(&self) -> usize {
        (self.nx - 2) * (self.ny - 2)
    }

    /// Flat pixel index of lattice point `(a, b)` in a grid `width` wide.
    pub fn pixel_index(&self, a: usize, b: usize, width: u32) -> usize {
        b * self.stride as usize * width as usize + a * self.stride as usize
    }
}

/// Mean absolute difference of float images.
pub fn l1_float(a: &FloatImage, b: &FloatImage) -> Result<f64> {
    if (a.width, a.height, a.channels) != (b.width, b.height, b.channels) {
        return Err(Error::Dimension("l1 loss: float image shapes differ".into()));
    }
    let total: f64 = a.data.iter().zip(&b.data).map(|(p, q)| (p - q).abs()).sum();
    Ok(total / a.data.len() as f64)
}

pub(crate) fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Penalty value and its gradient with respect to lattice point coordinates.
pub fn gic_on_lattice(
    px: &[f64],
    py: &[f64],
    nx: usize,
    ny: usize,
    form: GicForm,
    mut grad: Option<(&mut [f64], &mut [f64])>,
) -> f64 {
    let idx = |a: usize, b: usize| b * nx + a;
    let mut total = 0.0;
    for b in 1..ny - 1 {
        for a in 1..nx - 1 {
            let p = idx(a, b);
            let pairs = [
                (idx(a + 1, b), idx(a - 1, b)),
                (idx(a, b + 1), idx(a, b - 1)),
            ];
            match form {
                GicForm::Distance => {
                    for (q1, q2) in pairs {
                        let (e1x, e1y) = (px[p] - px[q1], py[p] - py[q1]);
                        let (e2x, e2y) = (px[p] - px[q2], py[p] - py[q2]);
                        let d1 = e1x.hypot(e1y);
                        let d2 = e2x.hypot(e2y);
                        total += (d1 - d2).abs();
                        if let Some((gx, gy)) = grad.as_mut() {
                            let s = sign(d1 - d2);
                            if s == 0.0 {
                                continue;
                            }
                            if d1 > 0.0 {
                                let (ux, uy) = (s * e1x / d1, s * e1y / d1);
                                gx[p] += ux;
                                gy[p] += uy;
                                gx[q1] -= ux;
                                gy[q1] -= uy;
                            }
                            if d2 > 0.0 {
                                let (ux, uy) = (s * e2x / d2, s * e2y / d2);
                                gx[p] -= ux;
                                gy[p] -= uy;
                                gx[q2] += ux;
                                gy[q2] += uy;
                            }
                        }
                    }
                }
                GicForm::Printed => {
                    for q in [pairs[0].0, pairs[0].1, pairs[1].0, pairs[1].1] {
                        let diff = px[q] - px[p];
                        total += diff.abs();
                        if let Some((gx, _)) = grad.as_mut() {
                            let s = sign(diff);
                            gx[q] += s;
                            gx[p] -= s;
                        }
                    }
                }
            }
        }
    }
    total
}

fn lattice_points(grid: &WarpGrid, lattice: &GicLattice) -> (Vec<f64>, Vec<f64>) {
    let mut px = Vec::with_capacity(lattice.nx * lattice.ny);
    let mut py = Vec::with_capacity(lattice.nx * lattice.ny);
    for b in 0..lattice.ny {
        for a in 0..lattice.nx {
            let i = lattice.pixel_index(a, b, grid.width());
            px.push(grid.gx[i]);
            py.push(grid.gy[i]);
        }
    }
    (px, py)
}

/// Grid-consistency penalty (distance form) on the lattice every `stride`
/// pixels.
pub fn gic_loss(grid: &WarpGrid, stride: u32) -> Result<f64> {
    gic_loss_with(grid, stride, GicForm::Distance)
}

pub fn gic_loss_with(grid: &WarpGrid, stride: u32, form: GicForm) -> Result<f64> {
    let lattice = GicLattice::new(grid.width(), grid.height(), stride)?;
    let (px, py) = lattice_points(grid, &lattice);
    Ok(gic_on_lattice(&px, &py, lattice.nx, lattice.ny, form, None))
}
