#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tryon_core::imaging::ImageBuffer;
use tryon_core::tps::{
    sample_bilinear, FloatImage, GicForm, GicLattice, GmmConfig, GmmProblem, PixelFrame, PixelWeights,
    TpsBasis, TpsParams,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Low-frequency RGB image: a few random plane waves per channel.
pub fn smooth_image(rng: &mut impl Rng, w: u32, h: u32) -> ImageBuffer {
    let waves: Vec<[f64; 4]> = (0..6)
        .map(|_| {
            [
                rng.random_range(-0.4..0.4),
                rng.random_range(-0.4..0.4),
                rng.random_range(0.0..6.28),
                rng.random_range(10.0..40.0),
            ]
        })
        .collect();
    let mut data = Vec::with_capacity((w * h * 3) as usize);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut v = 128.0;
                for wv in &waves[c * 2..c * 2 + 2] {
                    v += wv[3] * (wv[0] * x as f64 + wv[1] * y as f64 + wv[2]).sin();
                }
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    ImageBuffer::new(w, h, 3, data).unwrap()
}

pub fn random_params(rng: &mut impl Rng, grid_k: usize, scale: f64) -> TpsParams {
    let values: Vec<f64> = (0..2 * grid_k * grid_k)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    TpsParams::from_vec(grid_k, &values).unwrap()
}

/// Central differences of the objective over `[dx..., dy...]`.
pub fn finite_difference_gradient(problem: &GmmProblem, params: &TpsParams, eps: f64) -> Vec<f64> {
    let base = params.to_vec();
    let k = params.grid_k();
    (0..base.len())
        .map(|i| {
            let mut plus = base.clone();
            let mut minus = base.clone();
            plus[i] += eps;
            minus[i] -= eps;
            let fp = problem.loss(&TpsParams::from_vec(k, &plus).unwrap()).unwrap();
            let fm = problem.loss(&TpsParams::from_vec(k, &minus).unwrap()).unwrap();
            (fp - fm) / (2.0 * eps)
        })
        .collect()
}

/// True when a `+-eps` step on any single parameter could carry some pixel
/// residual or grid-penalty term across its |.| kink. Uses the first-order
/// change of each term per parameter (from the spline weights and the local
/// bilinear slopes) with a factor-of-two margin.
pub fn near_kink(
    accessory: &ImageBuffer,
    target: &ImageBuffer,
    cfg: &GmmConfig,
    params: &TpsParams,
    eps: f64,
) -> bool {
    let problem = GmmProblem::new(accessory, target, cfg).unwrap();
    let grid = problem.grid(params);
    let (w, h) = grid.dims();
    let basis = TpsBasis::new(cfg.grid_k).unwrap();
    let weights = PixelWeights::new(&basis, w, h);
    let (hx, hy) = PixelFrame::new(w, h).half_extent();
    let wmax = |p: usize| weights.row(p).iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let src = FloatImage::from_image(accessory);
    let tgt = FloatImage::from_image(target);
    let fill = cfg.fill as f64 / 255.0;
    for (p, (&x, &y)) in grid.gx.iter().zip(&grid.gy).enumerate() {
        let (rx, ry) = (hx * wmax(p) * eps, hy * wmax(p) * eps);
        for c in 0..src.channels {
            let value = sample_bilinear(&src, x, y, c, fill).value;
            // slopes of every cell the reach box can touch
            let (mut sx, mut sy) = (0.0f64, 0.0f64);
            for (ox, oy) in [(-rx, -ry), (rx, -ry), (-rx, ry), (rx, ry)] {
                let s = sample_bilinear(&src, x + ox, y + oy, c, fill);
                sx = sx.max(s.d_dx.abs());
                sy = sy.max(s.d_dy.abs());
            }
            let bound = 2.0 * (sx * rx).max(sy * ry);
            if (value - tgt.data[p * src.channels + c]).abs() <= bound {
                return true;
            }
        }
    }

    let lattice = GicLattice::new(w, h, cfg.gic_stride).unwrap();
    let n = params.num_points();
    let idx = |a: usize, b: usize| b * lattice.stride as usize * w as usize + a * lattice.stride as usize;
    // the penalty's unit scale cancels in the gap/rate comparison
    let at = |i: usize| (grid.gx[i], grid.gy[i]);
    // d/dtheta of the edge vector G(p) - G(q) for parameter k (dx then dy)
    let edge_rate = |p: usize, q: usize, k: usize| {
        if k < n {
            (hx * (weights.row(p)[k] - weights.row(q)[k]), 0.0)
        } else {
            (0.0, hy * (weights.row(p)[k - n] - weights.row(q)[k - n]))
        }
    };
    let dist_rate = |p: usize, q: usize, k: usize| {
        let (ex, ey) = (at(p).0 - at(q).0, at(p).1 - at(q).1);
        let d = ex.hypot(ey);
        let (rx, ry) = edge_rate(p, q, k);
        if d > 0.0 {
            (ex * rx + ey * ry) / d
        } else {
            rx.hypot(ry)
        }
    };
    for b in 1..lattice.ny - 1 {
        for a in 1..lattice.nx - 1 {
            let p = idx(a, b);
            let pairs = [(idx(a + 1, b), idx(a - 1, b)), (idx(a, b + 1), idx(a, b - 1))];
            match cfg.gic_form {
                GicForm::Distance => {
                    for (q1, q2) in pairs {
                        let gap = (dist(at(p), at(q1)) - dist(at(p), at(q2))).abs();
                        let rate = (0..2 * n)
                            .map(|k| (dist_rate(p, q1, k) - dist_rate(p, q2, k)).abs())
                            .fold(0.0, f64::max);
                        if gap <= 2.0 * rate * eps {
                            return true;
                        }
                    }
                }
                GicForm::Printed => {
                    for q in [pairs[0].0, pairs[0].1, pairs[1].0, pairs[1].1] {
                        let gap = (at(q).0 - at(p).0).abs();
                        let rate = (0..n)
                            .map(|k| (hx * (weights.row(q)[k] - weights.row(p)[k])).abs())
                            .fold(0.0, f64::max);
                        if gap <= 2.0 * rate * eps {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

fn dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    (p.0 - q.0).hypot(p.1 - q.1)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(1e-300)
}
