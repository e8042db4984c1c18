//! Synthetic environments and Monte Carlo validation: coverage runs,
//! tail-dominance and exponential-moment checks, and the input-gradient
//! envelope ratio.

pub mod checks;
pub mod coverage;
pub mod environment;
pub mod logsobolev;
pub mod rng;

pub use checks::{
    check_exp_moment, check_survival_dominance, estimate_exponential_moment_oracle,
    ExpMomentReport, OracleMomentReport, SurvivalReport, SurvivalRow,
};
pub use coverage::{
    run_coverage, CoverageBoundKind, CoverageConfig, CoverageReport, PosteriorRule, TrialRecord,
};
pub use environment::{Coupling, Environment, EnvironmentSpec};
pub use logsobolev::{default_ratio_grid, gradient_ratio_curve, GradientRatioReport};
pub use rng::trial_rng;
