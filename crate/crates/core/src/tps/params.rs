use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const DEFAULT_GRID_K: usize = 5;
pub const DEFAULT_CLAMP: f64 = 2.0;

/// Control-point displacements of a `k x k` thin-plate spline, in
/// normalized `[-1, 1]` coordinates. Row-major: index `row * k + col`,
/// rows running along y.
#[derive(Clone, Debug, PartialEq)]
pub struct TpsParams {
    grid_k: usize,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

impl TpsParams {
    pub fn zeros(grid_k: usize) -> Self {
        Self {
            grid_k,
            dx: vec![0.0; grid_k * grid_k],
            dy: vec![0.0; grid_k * grid_k],
        }
    }

    pub fn new(grid_k: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        let p = Self { grid_k, dx, dy };
        p.validate(f64::INFINITY)?;
        Ok(p)
    }

    pub fn uniform(grid_k: usize, dx: f64, dy: f64) -> Self {
        Self {
            grid_k,
            dx: vec![dx; grid_k * grid_k],
            dy: vec![dy; grid_k * grid_k],
        }
    }

    pub fn grid_k(&self) -> usize {
        self.grid_k
    }

    pub fn num_points(&self) -> usize {
        self.grid_k * self.grid_k
    }

    pub fn validate(&self, clamp: f64) -> Result<()> {
        if self.grid_k < 2 {
            return Err(Error::Range(format!("grid_k must be >= 2, got {}", self.grid_k)));
        }
        let n = self.num_points();
        if self.dx.len() != n || self.dy.len() != n {
            return Err(Error::Dimension(format!(
                "grid_k {} needs {n} displacements per axis, got {} and {}",
                self.grid_k,
                self.dx.len(),
                self.dy.len()
            )));
        }
        for &v in self.dx.iter().chain(&self.dy) {
            if !v.is_finite() {
                return Err(Error::Range("non-finite displacement".into()));
            }
            if v.abs() > clamp {
                return Err(Error::Range(format!("displacement {v} exceeds clamp {clamp}")));
            }
        }
        Ok(())
    }

    pub fn clamp_in_place(&mut self, clamp: f64) {
        for v in self.dx.iter_mut().chain(self.dy.iter_mut()) {
            *v = v.clamp(-clamp, clamp);
        }
    }

    /// Flattened `[dx..., dy...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.dx.iter().chain(&self.dy).copied().collect()
    }

    pub fn from_vec(grid_k: usize, values: &[f64]) -> Result<Self> {
        let n = grid_k * grid_k;
        if values.len() != 2 * n {
            return Err(Error::Dimension(format!(
                "expected {} values, got {}",
                2 * n,
                values.len()
            )));
        }
        Self::new(grid_k, values[..n].to_vec(), values[n..].to_vec())
    }

    /// Plain-text form:
    ///
    /// ```text
    /// grid_k=5
    /// dx=0,0.01,...
    /// dy=0,-0.02,...
    /// ```
    ///
    /// Values use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            let mut s = String::new();
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{x:?}").unwrap();
            }
            s
        };
        format!(
            "grid_k={}\ndx={}\ndy={}\n",
            self.grid_k,
            join(&self.dx),
            join(&self.dy)
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut grid_k = None;
        let mut dx = None;
        let mut dy = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {line:?}")))?;
            let parse_list = |v: &str| -> Result<Vec<f64>> {
                if v.trim().is_empty() {
                    return Ok(Vec::new());
                }
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
                    })
                    .collect()
            };
            match key.trim() {
                "grid_k" => {
                    grid_k = Some(
                        value
                            .trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("grid_k: {e}")))?,
                    )
                }
                "dx" => dx = Some(parse_list(value)?),
                "dy" => dy = Some(parse_list(value)?),
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing {k}"));
        Self::new(
            grid_k.ok_or_else(|| missing("grid_k"))?,
            dx.ok_or_else(|| missing("dx"))?,
            dy.ok_or_else(|| missing("dy"))?,
        )
    }
}
