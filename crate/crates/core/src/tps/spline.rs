//! Thin-plate spline over a uniform control lattice on `[-1, 1]^2`.
//!
//! The interpolant of control values `d` is
//! `f(q) = sum_j a_j U(|q - p_j|) + c0 + c1 u + c2 v` with
//! `U(r) = r^2 ln r^2`, solved from
//!
//! ```text
//! [ K   P ] [a]   [d]
//! [ P^T 0 ] [c] = [0]
//! ```
//!
//! Because `f` is linear in `d`, the system inverse is precomputed once and
//! any query point reduces to a weight vector over the control values.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Radial kernel; `U(0) = 0`.
pub fn kernel(r2: f64) -> f64 {
    if r2 == 0.0 {
        0.0
    } else {
        r2 * r2.ln()
    }
}

#[derive(Clone, Debug)]
pub struct TpsBasis {
    grid_k: usize,
    points: Vec<(f64, f64)>,
    /// Rows `0..n+3` of the system inverse, first `n` columns, row-major.
    inverse: Vec<f64>,
}

impl TpsBasis {
    pub fn new(grid_k: usize) -> Result<Self> {
        if grid_k < 2 {
            return Err(Error::Range(format!("grid_k must be >= 2, got {grid_k}")));
        }
        let points = control_points(grid_k);
        let n = points.len();
        let size = n + 3;
        let mut system = DMatrix::<f64>::zeros(size, size);
        for (i, &(ui, vi)) in points.iter().enumerate() {
            for (j, &(uj, vj)) in points.iter().enumerate() {
                let (du, dv) = (ui - uj, vi - vj);
                system[(i, j)] = kernel(du * du + dv * dv);
            }
            for (c, val) in [1.0, ui, vi].into_iter().enumerate() {
                system[(i, n + c)] = val;
                system[(n + c, i)] = val;
            }
        }
        let inv = system
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular thin-plate spline system".into()))?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite thin-plate spline inverse".into()));
        }
        let mut inverse = Vec::with_capacity(size * n);
        for r in 0..size {
            for c in 0..n {
                inverse.push(inv[(r, c)]);
            }
        }
        Ok(Self {
            grid_k,
            points,
            inverse,
        })
    }

    pub fn grid_k(&self) -> usize {
        self.grid_k
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    /// Control lattice in normalized coordinates, row-major.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Weights `w` with `f(u, v) = sum_i w[i] d[i]`.
    pub fn weights_into(&self, u: f64, v: f64, out: &mut [f64]) {
        let n = self.points.len();
        out[..n].fill(0.0);
        for (j, &(pu, pv)) in self.points.iter().enumerate() {
            let (du, dv) = (u - pu, v - pv);
            let phi = kernel(du * du + dv * dv);
            if phi != 0.0 {
                let row = &self.inverse[j * n..(j + 1) * n];
                for (o, &r) in out.iter_mut().zip(row) {
                    *o += phi * r;
                }
            }
        }
        for (c, val) in [1.0, u, v].into_iter().enumerate() {
            let row = &self.inverse[(n + c) * n..(n + c + 1) * n];
            for (o, &r) in out.iter_mut().zip(row) {
                *o += val * r;
            }
        }
    }

    pub fn weights(&self, u: f64, v: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.points.len()];
        self.weights_into(u, v, &mut w);
        w
    }

    /// Interpolated value of control values `d` at `(u, v)`.
    pub fn eval(&self, d: &[f64], u: f64, v: f64) -> f64 {
        self.weights(u, v).iter().zip(d).map(|(w, d)| w * d).sum()
    }
}

/// Uniform `k x k` lattice spanning `[-1, 1]^2`, row-major.
pub fn control_points(grid_k: usize) -> Vec<(f64, f64)> {
    let step = 2.0 / (grid_k - 1) as f64;
    let coord = |i: usize| if i == grid_k - 1 { 1.0 } else { -1.0 + step * i as f64 };
    (0..grid_k)
        .flat_map(|r| (0..grid_k).map(move |c| (coord(c), coord(r))))
        .collect()
}
