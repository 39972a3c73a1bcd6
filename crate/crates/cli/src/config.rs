use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tryon_core::imaging::{lip, LabelScheme};
use tryon_core::locate::DEFAULT_RADIUS_FRAC;
use tryon_core::metrics::Resolution;
use tryon_core::tps::GmmConfig;

use crate::error::PipelineError;

/// Prefix for environment overrides: `TRYON_MAX_STEPS=200` sets `max_steps`.
pub const ENV_PREFIX: &str = "TRYON_";

/// How the accessory image is brought into the person frame before fitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    /// Masked accessory crop scaled to fit the region bounding box, centered.
    Bbox,
    /// Whole accessory image resized to the person frame.
    Frame,
}

impl FromStr for Placement {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bbox" => Ok(Placement::Bbox),
            "frame" => Ok(Placement::Frame),
            other => Err(PipelineError::Config(format!("placement must be bbox or frame, got {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub dataset_root: PathBuf,
    pub label_scheme: LabelScheme,
    /// Parse labels the watch region may cover.
    pub region_labels: Vec<u8>,
    pub gray_value: u8,
    pub crop_fill: u8,
    pub default_radius_frac: f64,
    pub gmm: GmmConfig,
    pub placement: Placement,
    /// Fitting frame margin around the region box, as a fraction of its size.
    pub fit_margin: f64,
    /// Longest side of the frame the warp is fitted on; 0 fits at full size.
    pub fit_max_side: u32,
    pub resolutions: Vec<Resolution>,
    pub jobs: usize,
    pub deterministic: bool,
    /// Directories compared by `eval`, relative to the root unless absolute.
    pub eval_generated: PathBuf,
    pub eval_truth: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset_root: PathBuf::from("."),
            label_scheme: LabelScheme::LIP,
            region_labels: vec![lip::BACKGROUND],
            gray_value: tryon_core::agnostic::DEFAULT_GRAY,
            crop_fill: tryon_core::agnostic::DEFAULT_CROP_FILL,
            default_radius_frac: DEFAULT_RADIUS_FRAC,
            gmm: GmmConfig::default(),
            placement: Placement::Bbox,
            fit_margin: 0.5,
            fit_max_side: 256,
            resolutions: Resolution::defaults(),
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            deterministic: false,
            eval_generated: PathBuf::from("warp-cloth"),
            eval_truth: PathBuf::from("target-crop"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, PipelineError> {
    value
        .parse()
        .map_err(|_| PipelineError::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, PipelineError> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(PipelineError::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl PipelineConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let value = value.trim();
        let g = &mut self.gmm;
        match key {
            "dataset_root" => self.dataset_root = PathBuf::from(value),
            "label_scheme" => {
                self.label_scheme = match value {
                    "lip" | "LIP" => LabelScheme::LIP,
                    other => {
                        let n = other.strip_prefix("custom:").ok_or_else(|| {
                            PipelineError::Config(format!("label_scheme must be lip or custom:N, got {other:?}"))
                        })?;
                        LabelScheme::custom(parse(key, n)?)?
                    }
                }
            }
            "region_labels" => {
                self.region_labels = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<_, _>>()?
            }
            "gray_value" => self.gray_value = parse(key, value)?,
            "crop_fill" => self.crop_fill = parse(key, value)?,
            "default_radius_frac" => self.default_radius_frac = parse(key, value)?,
            "lambda_l1" => g.lambda_l1 = parse(key, value)?,
            "lambda_reg" => g.lambda_reg = parse(key, value)?,
            "lr" => g.lr = parse(key, value)?,
            "beta1" => g.beta1 = parse(key, value)?,
            "beta2" => g.beta2 = parse(key, value)?,
            "eps" => g.eps = parse(key, value)?,
            "decay_every" => g.decay_every = parse(key, value)?,
            "decay_factor" => g.decay_factor = parse(key, value)?,
            "max_steps" => g.max_steps = parse(key, value)?,
            "grid_k" => g.grid_k = parse(key, value)?,
            "gic_stride" => g.gic_stride = parse(key, value)?,
            "gic_form" => g.gic_form = value.parse()?,
            "clamp" => g.clamp = parse(key, value)?,
            "fill" => g.fill = parse(key, value)?,
            "placement" => self.placement = value.parse()?,
            "fit_margin" => self.fit_margin = parse(key, value)?,
            "fit_max_side" => self.fit_max_side = parse(key, value)?,
            "resolutions" => {
                self.resolutions = value
                    .split(',')
                    .map(|s| s.trim().parse::<Resolution>())
                    .collect::<Result<_, _>>()?
            }
            "jobs" => self.jobs = parse(key, value)?,
            "deterministic" => self.deterministic = parse_bool(key, value)?,
            "eval_generated" => self.eval_generated = PathBuf::from(value),
            "eval_truth" => self.eval_truth = PathBuf::from(value),
            other => return Err(PipelineError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a `key = value` document; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), PipelineError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| PipelineError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path.to_path_buf(), e))?;
        self.apply_text(&text)
    }

    /// Applies every `TRYON_<KEY>` variable in `vars`.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<(), PipelineError> {
        let mut found: Vec<(String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|key| (key.to_ascii_lowercase(), v)))
            .collect();
        found.sort();
        for (key, value) in found {
            self.set(&key, &value)
                .map_err(|e| PipelineError::Config(format!("{ENV_PREFIX}{}: {e}", key.to_ascii_uppercase())))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !self.dataset_root.is_dir() {
            return Err(PipelineError::Config(format!(
                "dataset root {} is not a directory",
                self.dataset_root.display()
            )));
        }
        if self.jobs == 0 {
            return Err(PipelineError::Config("jobs must be >= 1".into()));
        }
        if !(self.default_radius_frac > 0.0 && self.default_radius_frac.is_finite()) {
            return Err(PipelineError::Config("default_radius_frac must be > 0".into()));
        }
        if !(self.fit_margin >= 0.0 && self.fit_margin.is_finite()) {
            return Err(PipelineError::Config("fit_margin must be >= 0".into()));
        }
        if self.region_labels.is_empty() {
            return Err(PipelineError::Config("region_labels is empty".into()));
        }
        for &label in &self.region_labels {
            self.label_scheme.check(label)?;
        }
        if self.resolutions.is_empty() {
            return Err(PipelineError::Config("resolutions is empty".into()));
        }
        self.gmm.validate()?;
        Ok(())
    }

    /// Fit settings with the pipeline-wide determinism flag applied.
    pub fn fit_config(&self) -> GmmConfig {
        GmmConfig {
            deterministic: self.deterministic,
            ..self.gmm.clone()
        }
    }

    pub fn resolve(&self, dir: &Path) -> PathBuf {
        if dir.is_absolute() {
            dir.to_path_buf()
        } else {
            self.dataset_root.join(dir)
        }
    }

    /// Text form accepted by [`PipelineConfig::apply_text`].
    pub fn to_text(&self) -> String {
        let g = &self.gmm;
        let scheme = if self.label_scheme == LabelScheme::LIP {
            "lip".to_string()
        } else {
            format!("custom:{}", self.label_scheme.num_labels())
        };
        let labels: Vec<String> = self.region_labels.iter().map(|l| l.to_string()).collect();
        let res: Vec<String> = self
            .resolutions
            .iter()
            .map(|r| format!("{}:{}x{}", r.tag, r.width, r.height))
            .collect();
        let form = match g.gic_form {
            tryon_core::tps::GicForm::Distance => "distance",
            tryon_core::tps::GicForm::Printed => "printed",
        };
        let placement = match self.placement {
            Placement::Bbox => "bbox",
            Placement::Frame => "frame",
        };
        let lines = [
            format!("dataset_root = {}", self.dataset_root.display()),
            format!("label_scheme = {scheme}"),
            format!("region_labels = {}", labels.join(",")),
            format!("gray_value = {}", self.gray_value),
            format!("crop_fill = {}", self.crop_fill),
            format!("default_radius_frac = {:?}", self.default_radius_frac),
            format!("lambda_l1 = {:?}", g.lambda_l1),
            format!("lambda_reg = {:?}", g.lambda_reg),
            format!("lr = {:?}", g.lr),
            format!("beta1 = {:?}", g.beta1),
            format!("beta2 = {:?}", g.beta2),
            format!("eps = {:?}", g.eps),
            format!("decay_every = {}", g.decay_every),
            format!("decay_factor = {:?}", g.decay_factor),
            format!("max_steps = {}", g.max_steps),
            format!("grid_k = {}", g.grid_k),
            format!("gic_stride = {}", g.gic_stride),
            format!("gic_form = {form}"),
            format!("clamp = {:?}", g.clamp),
            format!("fill = {}", g.fill),
            format!("placement = {placement}"),
            format!("fit_margin = {:?}", self.fit_margin),
            format!("fit_max_side = {}", self.fit_max_side),
            format!("resolutions = {}", res.join(",")),
            format!("jobs = {}", self.jobs),
            format!("deterministic = {}", self.deterministic),
            format!("eval_generated = {}", self.eval_generated.display()),
            format!("eval_truth = {}", self.eval_truth.display()),
        ];
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}
