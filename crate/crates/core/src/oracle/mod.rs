//! Numerical checks of the construction on small instances: projections
//! onto the IIA family, the exact χ² of the mixture alternative, and
//! Monte-Carlo risk of concrete tests.

mod chi2;
mod logit;
mod projection;
mod risk;

pub use chi2::{
    exact_chi2_mixture, mixture_tv, verify_lemma_chain, Chi2Report, LemmaChainReport, Link, LINK_TOL,
    MAX_CHI2_FAMILY, MAX_SEQUENCES, PATH_TOL,
};
pub use logit::{kl_projection, kl_projection_with, KlConfig, KlFit};
pub use projection::{
    tv_projection, tv_projection_grid, Convergence, ProjectionConfig, ProjectionMethod, ProjectionResult,
    DEFAULT_STARTS, MAX_GRID_ITEMS, MAX_PROJECTION_NODES,
};
pub use risk::{
    risk_standard_error, simulate_risk, RiskEstimate, TestProcedure, DEFAULT_BOOTSTRAP, DEFAULT_CALIBRATION,
    DEFAULT_LEVEL, DEFAULT_RIDGE,
};
