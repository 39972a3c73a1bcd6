use super::objective::{GmmConfig, GmmProblem};
use super::params::TpsParams;
use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(len: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            beta1,
            beta2,
            eps,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Step-decayed learning rate.
pub fn learning_rate(cfg: &GmmConfig, step: usize) -> f64 {
    cfg.lr * cfg.decay_factor.powi((step / cfg.decay_every) as i32)
}

#[derive(Clone, Debug)]
pub struct FitResult {
    /// Lowest-loss parameters seen.
    pub params: TpsParams,
    pub best_loss: f64,
    pub best_step: usize,
    /// `(step, loss)` of the parameters evaluated before each update, plus
    /// the final parameters at index `max_steps`.
    pub history: Vec<(usize, f64)>,
}

impl FitResult {
    /// Loss history as `step,loss` CSV with a header row.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("step,loss\n");
        for (step, loss) in &self.history {
            out.push_str(&format!("{step},{loss:?}\n"));
        }
        out
    }
}

/// Fits control displacements warping `accessory` onto `target` with Adam.
pub fn fit_tps(
    accessory: &ImageBuffer,
    target: &ImageBuffer,
    cfg: &GmmConfig,
    init: &TpsParams,
) -> Result<FitResult> {
    let problem = GmmProblem::new(accessory, target, cfg)?;
    fit_problem(&problem, init)
}

pub fn fit_problem(problem: &GmmProblem, init: &TpsParams) -> Result<FitResult> {
    let cfg = problem.config();
    if init.grid_k() != cfg.grid_k {
        return Err(Error::Dimension(format!(
            "init grid_k {} vs config grid_k {}",
            init.grid_k(),
            cfg.grid_k
        )));
    }
    init.validate(cfg.clamp)?;

    let grid_k = cfg.grid_k;
    let n = init.num_points();
    let mut current = init.clone();
    let mut theta = init.to_vec();
    let mut adam = Adam::new(2 * n, cfg.beta1, cfg.beta2, cfg.eps);
    let mut history = Vec::with_capacity(cfg.max_steps + 1);
    let mut best = (f64::INFINITY, 0usize, init.clone());

    for step in 0..=cfg.max_steps {
        let last = step == cfg.max_steps;
        let eval = problem.evaluate(&current, !last)?;
        if !eval.loss.is_finite() {
            return Err(Error::Divergence {
                step,
                loss: eval.loss,
            });
        }
        history.push((step, eval.loss));
        if eval.loss < best.0 {
            best = (eval.loss, step, current.clone());
        }
        if last {
            break;
        }

        let grad: Vec<f64> = eval.grad_dx.iter().chain(&eval.grad_dy).copied().collect();
        adam.step(&mut theta, &grad, learning_rate(cfg, step));
        for v in theta.iter_mut() {
            *v = v.clamp(-cfg.clamp, cfg.clamp);
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step,
                loss: f64::NAN,
            });
        }
        current = TpsParams::from_vec(grid_k, &theta)?;
    }

    Ok(FitResult {
        params: best.2,
        best_loss: best.0,
        best_step: best.1,
        history,
    })
}
