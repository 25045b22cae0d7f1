//! Penalized-spline additive model numerics: basis construction, penalties,
//! penalized least-squares fitting, GCV smoothing-parameter selection and
//! prediction.

mod basis;
mod fit;

pub use basis::{BasisKind, BasisSpec, Covariate, MarginBasis, SmootherBasis, SplineError};
pub use fit::{
    adjusted_r2, fit_penalized_ls, predict, select_lambda_gcv, FitStats, GamFit, GcvOptions,
    GAM_FIT_FORMAT_VERSION,
};
