//! Closed forms of the correlation profiles and averaged kernels.

mod kernel;
mod poly;
mod profiles;
mod triangle;
mod unit;

pub use kernel::{eval_kernel, Kernel, KernelSpec};
pub use poly::{PiecewisePoly2D, Quadratic};
pub use profiles::{
    alpha, alpha_fn, beta, beta_fn, conv1d_oracle, gamma, gamma_fn, PiecewiseLinearFn, StepFn1,
};
pub use triangle::{
    fold as triangle_fold, quarter_table, region_polys, region_vertices, support_vertices,
    triangle_g, triangle_g_all, GKind, REGION_LABELS,
};
pub use unit::UnitComplex;
