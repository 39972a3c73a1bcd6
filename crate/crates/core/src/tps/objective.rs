use rayon::prelude::*;

use super::grid::{PixelFrame, PixelWeights, WarpGrid};
use super::loss::{gic_on_lattice, sign, GicForm, GicLattice};
use super::params::{TpsParams, DEFAULT_CLAMP, DEFAULT_GRID_K};
use super::spline::TpsBasis;
use super::warp::{sample_bilinear, FloatImage};
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;

/// Objective weights and optimizer settings for warp fitting.
#[derive(Clone, Debug, PartialEq)]
pub struct GmmConfig {
    pub lambda_l1: f64,
    pub lambda_reg: f64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Learning rate is multiplied by `decay_factor` every `decay_every` steps.
    pub decay_every: usize,
    pub decay_factor: f64,
    pub max_steps: usize,
    pub grid_k: usize,
    /// Pixel spacing of the lattice the grid penalty is evaluated on.
    pub gic_stride: u32,
    pub gic_form: GicForm,
    /// Bound on |dx|, |dy| after every update.
    pub clamp: f64,
    /// Sample value read outside the accessory image.
    pub fill: u8,
    /// Sum reductions in a fixed order so losses are bit-reproducible.
    pub deterministic: bool,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            lambda_l1: 1.0,
            lambda_reg: 0.5,
            lr: 0.01,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
            decay_every: 10_000,
            decay_factor: 0.5,
            max_steps: 5_000,
            grid_k: DEFAULT_GRID_K,
            gic_stride: 4,
            gic_form: GicForm::Distance,
            clamp: DEFAULT_CLAMP,
            fill: 255,
            deterministic: true,
        }
    }
}

impl GmmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Range(m));
        if !(self.lambda_l1 >= 0.0) || !(self.lambda_reg >= 0.0) {
            return bad("loss weights must be >= 0".into());
        }
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return bad(format!("learning rate must be > 0, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad(format!("betas must lie in [0, 1), got {} / {}", self.beta1, self.beta2));
        }
        if !(self.eps > 0.0) {
            return bad("eps must be > 0".into());
        }
        if self.decay_every == 0 {
            return bad("decay_every must be >= 1".into());
        }
        if !(self.decay_factor > 0.0 && self.decay_factor <= 1.0) {
            return bad(format!("decay_factor must lie in (0, 1], got {}", self.decay_factor));
        }
        if self.grid_k < 2 {
            return bad(format!("grid_k must be >= 2, got {}", self.grid_k));
        }
        if self.gic_stride == 0 {
            return bad("gic_stride must be >= 1".into());
        }
        if !(self.clamp > 0.0) {
            return bad("clamp must be > 0".into());
        }
        Ok(())
    }
}

/// Loss value with its gradient over `[dx..., dy...]`.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub loss: f64,
    pub l1: f64,
    pub reg: f64,
    pub grad_dx: Vec<f64>,
    pub grad_dy: Vec<f64>,
}

/// An accessory/target pair prepared for repeated objective evaluation.
pub struct GmmProblem {
    cfg: GmmConfig,
    source: FloatImage,
    target: FloatImage,
    weights: PixelWeights,
    lattice: Option<GicLattice>,
}

impl GmmProblem {
    pub fn new(accessory: &ImageBuffer, target: &ImageBuffer, cfg: &GmmConfig) -> Result<Self> {
        cfg.validate()?;
        if accessory.dims() != target.dims() || accessory.channels() != target.channels() {
            return Err(Error::Dimension(format!(
                "accessory {}x{}x{} vs target {}x{}x{}",
                accessory.width(),
                accessory.height(),
                accessory.channels(),
                target.width(),
                target.height(),
                target.channels()
            )));
        }
        let lattice = if cfg.lambda_reg > 0.0 {
            Some(GicLattice::new(accessory.width(), accessory.height(), cfg.gic_stride)?)
        } else {
            None
        };
        let basis = TpsBasis::new(cfg.grid_k)?;
        Ok(Self {
            cfg: cfg.clone(),
            source: FloatImage::from_image(accessory),
            target: FloatImage::from_image(target),
            weights: PixelWeights::new(&basis, accessory.width(), accessory.height()),
            lattice,
        })
    }

    pub fn config(&self) -> &GmmConfig {
        &self.cfg
    }

    pub fn grid(&self, params: &TpsParams) -> WarpGrid {
        self.weights.grid(params)
    }

    pub fn loss(&self, params: &TpsParams) -> Result<f64> {
        Ok(self.evaluate(params, false)?.loss)
    }

    /// Objective and (when `with_grad`) its analytic gradient. L1 and the
    /// grid penalty use the subgradient `sign(0) = 0`.
    pub fn evaluate(&self, params: &TpsParams, with_grad: bool) -> Result<Evaluation> {
        if params.grid_k() != self.cfg.grid_k {
            return Err(Error::Dimension(format!(
                "params grid_k {} vs config grid_k {}",
                params.grid_k(),
                self.cfg.grid_k
            )));
        }
        let grid = self.weights.grid(params);
        let w = grid.width() as usize;
        let h = grid.height() as usize;
        let c = self.source.channels;
        let fill = self.cfg.fill as f64 / 255.0;
        let norm = self.cfg.lambda_l1 / (w * h * c) as f64;

        let mut grad_gx = vec![0.0; w * h];
        let mut grad_gy = vec![0.0; w * h];

        let row_l1 = |y: usize, gx_row: &mut [f64], gy_row: &mut [f64]| -> f64 {
            let mut sum = 0.0;
            for x in 0..w {
                let p = y * w + x;
                let (sx, sy) = (grid.gx[p], grid.gy[p]);
                for ch in 0..c {
                    let s = sample_bilinear(&self.source, sx, sy, ch, fill);
                    let diff = s.value - self.target.data[p * c + ch];
                    sum += diff.abs();
                    if with_grad {
                        let sg = sign(diff) * norm;
                        gx_row[x] += sg * s.d_dx;
                        gy_row[x] += sg * s.d_dy;
                    }
                }
            }
            sum
        };

        let l1_sum: f64 = if self.cfg.deterministic {
            grad_gx
                .chunks_mut(w)
                .zip(grad_gy.chunks_mut(w))
                .enumerate()
                .map(|(y, (a, b))| row_l1(y, a, b))
                .sum()
        } else {
            grad_gx
                .par_chunks_mut(w)
                .zip(grad_gy.par_chunks_mut(w))
                .enumerate()
                .map(|(y, (a, b))| row_l1(y, a, b))
                .sum()
        };
        let l1 = l1_sum / (w * h * c) as f64;

        let mut reg = 0.0;
        if let Some(lattice) = &self.lattice {
            let count = lattice.nx * lattice.ny;
            let mut px = Vec::with_capacity(count);
            let mut py = Vec::with_capacity(count);
            let mut pixel = Vec::with_capacity(count);
            // in units of the larger half extent so the weight does not depend on image size
            let (hx, hy) = PixelFrame::new(grid.width(), grid.height()).half_extent();
            let unit = hx.max(hy).max(1.0);
            for b in 0..lattice.ny {
                for a in 0..lattice.nx {
                    let i = lattice.pixel_index(a, b, grid.width());
                    px.push(grid.gx[i]);
                    py.push(grid.gy[i]);
                    pixel.push(i);
                }
            }
            let mut lgx = vec![0.0; count];
            let mut lgy = vec![0.0; count];
            let grad = with_grad.then_some((lgx.as_mut_slice(), lgy.as_mut_slice()));
            let interior = lattice.interior_points() as f64;
            reg = gic_on_lattice(&px, &py, lattice.nx, lattice.ny, self.cfg.gic_form, grad) / (unit * interior);
            if with_grad {
                let scale = self.cfg.lambda_reg / (unit * interior);
                for (k, &i) in pixel.iter().enumerate() {
                    grad_gx[i] += scale * lgx[k];
                    grad_gy[i] += scale * lgy[k];
                }
            }
        }

        let loss = self.cfg.lambda_l1 * l1 + self.cfg.lambda_reg * reg;
        let (grad_dx, grad_dy) = if with_grad {
            self.weights.backprop(&grad_gx, &grad_gy)
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(Evaluation {
            loss,
            l1,
            reg,
            grad_dx,
            grad_dy,
        })
    }
}

/// `lambda_l1 * L1(warp(accessory), target) + lambda_reg * GIC(grid) / m`,
/// with the warp sampled in floating point, the grid penalty taken on the
/// grid measured in units of the larger half extent `(max(W, H) - 1) / 2`,
/// and `m` the number of interior lattice points, so both terms are
/// per-element means independent of image size.
pub fn gmm_objective(
    params: &TpsParams,
    accessory: &ImageBuffer,
    target: &ImageBuffer,
    cfg: &GmmConfig,
) -> Result<f64> {
    GmmProblem::new(accessory, target, cfg)?.loss(params)
}
