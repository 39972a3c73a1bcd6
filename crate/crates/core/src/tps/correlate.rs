use crate::error::{Error, Result};

/// Dense `h x w x d` feature map, row-major with the feature axis innermost.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureGrid {
    pub height: usize,
    pub width: usize,
    pub depth: usize,
    pub data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(height: usize, width: usize, depth: usize, data: Vec<f64>) -> Result<Self> {
        if depth == 0 || height == 0 || width == 0 {
            return Err(Error::Dimension(format!("feature grid {height}x{width}x{depth}")));
        }
        if data.len() != height * width * depth {
            return Err(Error::Dimension(format!(
                "feature grid {height}x{width}x{depth} with {} values",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            depth,
            data,
        })
    }

    pub fn vector(&self, pos: usize) -> &[f64] {
        &self.data[pos * self.depth..(pos + 1) * self.depth]
    }

    /// Each feature vector scaled to unit L2 norm; zero vectors stay zero.
    pub fn l2_normalized(&self) -> FeatureGrid {
        let mut out = self.clone();
        for v in out.data.chunks_exact_mut(self.depth) {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
        }
        out
    }
}

/// `h x w x (h*w)` volume: entry `[i][j][k]` is the cosine similarity of
/// `a` at `(i, j)` and `b` at flat position `k`.
pub fn correlate_features(a: &FeatureGrid, b: &FeatureGrid) -> Result<Vec<f64>> {
    if (a.height, a.width, a.depth) != (b.height, b.width, b.depth) {
        return Err(Error::Dimension(format!(
            "feature grids {}x{}x{} vs {}x{}x{}",
            a.height, a.width, a.depth, b.height, b.width, b.depth
        )));
    }
    let a = a.l2_normalized();
    let b = b.l2_normalized();
    let positions = a.height * a.width;
    let mut out = Vec::with_capacity(positions * positions);
    for i in 0..positions {
        let va = a.vector(i);
        for k in 0..positions {
            out.push(va.iter().zip(b.vector(k)).map(|(x, y)| x * y).sum());
        }
    }
    Ok(out)
}
