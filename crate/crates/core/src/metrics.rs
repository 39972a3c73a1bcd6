//! Paired-setting SSIM evaluation.
//!
//! SSIM uses an 11x11 Gaussian window (sigma 1.5), `C1 = (0.01 L)^2`,
//! `C2 = (0.03 L)^2` with `L = 255`, averaged over every window position
//! that fits inside the image. RGB input is reduced to BT.601 luma first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::io::load_image;
use crate::imaging::{resize_bilinear, ImageBuffer};

pub const WINDOW: usize = 11;
pub const SIGMA: f64 = 1.5;
pub const DYNAMIC_RANGE: f64 = 255.0;
pub const C1: f64 = (0.01 * DYNAMIC_RANGE) * (0.01 * DYNAMIC_RANGE);
pub const C2: f64 = (0.03 * DYNAMIC_RANGE) * (0.03 * DYNAMIC_RANGE);

fn gaussian_window() -> [f64; WINDOW] {
    let mut w = [0.0; WINDOW];
    let half = (WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    w
}

/// Separable "valid" filtering: output is `(w - 10) x (h - 10)`.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = k.iter().zip(&row[x..x + WINDOW]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(i, a)| a * horiz[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Dimension(format!(
            "ssim: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let (w, h) = (a.width() as usize, a.height() as usize);
    if w < WINDOW || h < WINDOW {
        return Err(Error::Window {
            width: a.width(),
            height: a.height(),
            window: WINDOW,
        });
    }
    let x = a.luma();
    let y = b.luma();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();

    let k = gaussian_window();
    let mu_x = filter_valid(&x, w, h, &k);
    let mu_y = filter_valid(&y, w, h, &k);
    let e_xx = filter_valid(&xx, w, h, &k);
    let e_yy = filter_valid(&yy, w, h, &k);
    let e_xy = filter_valid(&xy, w, h, &k);

    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total += ((2.0 * mx * my + C1) * (2.0 * cov + C2))
            / ((mx * mx + my * my + C1) * (var_x + var_y + C2));
    }
    Ok(total / mu_x.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub tag: String,
    pub width: u32,
    pub height: u32,
}

impl Resolution {
    pub fn new(tag: impl Into<String>, width: u32, height: u32) -> Self {
        Self {
            tag: tag.into(),
            width,
            height,
        }
    }

    /// Portrait try-on sizes: training size and two halvings.
    pub fn defaults() -> Vec<Resolution> {
        vec![
            Resolution::new("large", 768, 1024),
            Resolution::new("medium", 384, 512),
            Resolution::new("small", 192, 256),
        ]
    }
}

impl std::str::FromStr for Resolution {
    type Err = Error;

    /// `WxH` or `tag:WxH`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, dims) = match s.split_once(':') {
            Some((t, d)) => (t.trim().to_string(), d.trim()),
            None => (s.to_string(), s),
        };
        let (w, h) = dims
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Parse(format!("resolution {s:?}: expected WxH")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Parse(format!("resolution {s:?}: bad size {v:?}")))
        };
        Ok(Resolution::new(tag, parse(w)?, parse(h)?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub id: String,
    pub resolution: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageError {
    pub id: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub resolution: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsimReport {
    pub resolutions: Vec<Resolution>,
    pub rows: Vec<ScoreRow>,
    pub errors: Vec<ImageError>,
    pub aggregates: Vec<Aggregate>,
}

impl SsimReport {
    /// Builds the report, computing per-resolution min / max / mean.
    pub fn from_rows(resolutions: Vec<Resolution>, rows: Vec<ScoreRow>, errors: Vec<ImageError>) -> Self {
        let aggregates = resolutions
            .iter()
            .filter_map(|r| {
                let scores: Vec<f64> = rows
                    .iter()
                    .filter(|row| row.resolution == r.tag)
                    .map(|row| row.score)
                    .collect();
                if scores.is_empty() {
                    return None;
                }
                Some(Aggregate {
                    resolution: r.tag.clone(),
                    count: scores.len(),
                    min: scores.iter().copied().fold(f64::INFINITY, f64::min),
                    max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    mean: scores.iter().sum::<f64>() / scores.len() as f64,
                })
            })
            .collect();
        Self {
            resolutions,
            rows,
            errors,
            aggregates,
        }
    }

    fn size_of(&self, tag: &str) -> (u32, u32) {
        self.resolutions
            .iter()
            .find(|r| r.tag == tag)
            .map(|r| (r.width, r.height))
            .unwrap_or((0, 0))
    }

    /// Per-image rows. `lpips` is left empty for externally computed values.
    pub fn scores_csv(&self) -> String {
        let mut out = String::from("id,resolution,width,height,ssim,lpips\n");
        for row in &self.rows {
            let (w, h) = self.size_of(&row.resolution);
            writeln!(out, "{},{},{w},{h},{:.9},", row.id, row.resolution, row.score).unwrap();
        }
        out
    }

    pub fn errors_csv(&self) -> String {
        let mut out = String::from("id,error\n");
        for e in &self.errors {
            writeln!(out, "{},\"{}\"", e.id, e.message.replace('"', "'")).unwrap();
        }
        out
    }

    /// Aggregates, with blank columns for set-level metrics computed elsewhere.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("resolution,width,height,count,min,max,mean,lpips,fid,kid\n");
        for a in &self.aggregates {
            let (w, h) = self.size_of(&a.resolution);
            writeln!(
                out,
                "{},{w},{h},{},{:.9},{:.9},{:.9},,,",
                a.resolution, a.count, a.min, a.max, a.mean
            )
            .unwrap();
        }
        out
    }

    /// `id,score` pairs for one resolution, for bar charts.
    pub fn bars_csv(&self, tag: &str) -> String {
        let mut out = String::from("id,ssim\n");
        for row in self.rows.iter().filter(|r| r.resolution == tag) {
            writeln!(out, "{},{:.9}", row.id, row.score).unwrap();
        }
        out
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<10} {:>11} {:>6} {:>8} {:>8} {:>8}",
            "resolution", "size", "images", "min", "max", "mean"
        )
        .unwrap();
        for a in &self.aggregates {
            let (w, h) = self.size_of(&a.resolution);
            writeln!(
                out,
                "{:<10} {:>11} {:>6} {:>8.4} {:>8.4} {:>8.4}",
                a.resolution,
                format!("{w}x{h}"),
                a.count,
                a.min,
                a.max,
                a.mean
            )
            .unwrap();
        }
        if !self.errors.is_empty() {
            writeln!(out, "\n{} image(s) not scored:", self.errors.len()).unwrap();
            for e in &self.errors {
                writeln!(out, "  {}: {}", e.id, e.message).unwrap();
            }
        }
        out
    }
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Image files in `dir` keyed by file stem.
pub fn images_by_stem(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if !path.is_file() || !ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.entry(stem.to_string()).or_insert(path);
        }
    }
    Ok(out)
}

fn score_pair(generated: &Path, truth: &Path, resolutions: &[Resolution]) -> Result<Vec<(String, f64)>> {
    let a = load_image(generated)?;
    let b = load_image(truth)?;
    resolutions
        .iter()
        .map(|r| {
            let ra = resize_bilinear(&a, r.width, r.height)?;
            let rb = resize_bilinear(&b, r.width, r.height)?;
            Ok((r.tag.clone(), ssim(&ra, &rb)?))
        })
        .collect()
}

/// Scores every id present in both directories at every resolution.
/// Per-image failures are recorded, not fatal.
pub fn evaluate_pairs(dir_generated: &Path, dir_truth: &Path, resolutions: &[Resolution]) -> Result<SsimReport> {
    let generated = images_by_stem(dir_generated)?;
    let truth = images_by_stem(dir_truth)?;
    let matched: Vec<(&String, &PathBuf, &PathBuf)> = generated
        .iter()
        .filter_map(|(id, g)| truth.get(id).map(|t| (id, g, t)))
        .collect();
    if matched.is_empty() {
        return Err(Error::EmptyEval);
    }

    let mut errors = Vec::new();
    let ids: BTreeSet<&String> = generated.keys().chain(truth.keys()).collect();
    for id in ids {
        match (generated.contains_key(id), truth.contains_key(id)) {
            (true, false) => errors.push(ImageError {
                id: id.clone(),
                message: "no ground-truth image".into(),
            }),
            (false, true) => errors.push(ImageError {
                id: id.clone(),
                message: "no generated image".into(),
            }),
            _ => {}
        }
    }

    let scored: Vec<(String, Result<Vec<(String, f64)>>)> = matched
        .par_iter()
        .map(|(id, g, t)| ((*id).clone(), score_pair(g, t, resolutions)))
        .collect();

    let mut rows = Vec::new();
    for (id, result) in scored {
        match result {
            Ok(scores) => rows.extend(scores.into_iter().map(|(resolution, score)| ScoreRow {
                id: id.clone(),
                resolution,
                score,
            })),
            Err(e) => errors.push(ImageError {
                id,
                message: e.to_string(),
            }),
        }
    }
    errors.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(SsimReport::from_rows(resolutions.to_vec(), rows, errors))
}
