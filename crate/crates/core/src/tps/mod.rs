//! Thin-plate-spline warping and direct fitting of its control
//! displacements.

mod correlate;
mod fit;
mod grid;
mod loss;
mod objective;
mod params;
mod spline;
mod warp;

pub use correlate::{correlate_features, FeatureGrid};
pub use fit::{fit_problem, fit_tps, learning_rate, Adam, FitResult};
pub use grid::{tps_grid, tps_grid_with, tps_map_point, PixelFrame, PixelWeights, WarpGrid};
pub use loss::{gic_loss, gic_loss_with, gic_on_lattice, l1_float, l1_loss, GicForm, GicLattice};
pub use objective::{gmm_objective, Evaluation, GmmConfig, GmmProblem};
pub use params::{TpsParams, DEFAULT_CLAMP, DEFAULT_GRID_K};
pub use spline::{control_points, kernel, TpsBasis};
pub use warp::{sample_bilinear, warp_float, warp_image, FloatImage, Sample};
