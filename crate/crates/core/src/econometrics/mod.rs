//! Fixed-effects growth regressions: design construction, the within
//! estimator with period dummies, CR1 clustered covariance and marginal
//! effects for the density × RCA interaction.

mod design;
mod fit;
mod linalg;
mod marginal;

pub use design::{
    build_design, DensitySource, RegressionDataset, RegressionRow, Subsample, CONSTANT, DELTA_DENSITY,
    DENSITY, INTERACTION, RCA,
};
pub use fit::{
    fit_fe, raw_design, stars, within_transform, ClusterLevel, FitOptions, RawDesign, RegressionResult,
    WithinDesign,
};
pub use linalg::{cluster_robust_vcov, ols, xtx_inverse, OlsFit, RANK_TOL};
pub use marginal::{marginal_effects, sd_impact, MarginalEffects};
