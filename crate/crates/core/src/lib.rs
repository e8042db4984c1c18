//! Computation and empirical validation of PAC-Bayes generalization bounds
//! built on Cramér-Chernoff machinery.
//!
//! The pieces:
//!
//! - [`cgf`]: cumulant generating functions of centered losses and their
//!   convex envelopes, analytic and plug-in.
//! - [`transform`]: Legendre/Cramér transforms, their generalized inverses
//!   with stationarity certificates, and the binary KL with its upper
//!   inverse.
//! - [`bounds`]: every bound evaluator — the optimized-λ bound, fixed-λ
//!   forms, the binary-kl route, closed-form sub-Gaussian/sub-gamma/
//!   parameter-norm/input-gradient corollaries, and the square-root
//!   baselines.
//! - [`posterior`]: finite model classes, the closed-form bound-minimizing
//!   posterior at fixed λ, its MAP index, and the λ-optimized version.
//! - [`harness`]: synthetic environments with known risks, Monte Carlo
//!   coverage, tail-dominance and exponential-moment checks, and the
//!   input-gradient envelope ratio.

pub mod bounds;
pub mod cgf;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod posterior;
pub mod simplex;
pub mod transform;

pub use bounds::{BoundKind, BoundQuery, BoundReport, ComplexityVariant, FixedLambdaVariant};
pub use cgf::{empirical_cgf, expected_rate, LossSampleSet, RateFunction};
pub use error::{Error, Result};
pub use posterior::{FiniteModelClass, ModelEntry, ModelFeatures, OptimizeOutcome};
pub use simplex::SimplexDistribution;
pub use transform::{binary_kl, binary_kl_upper_inverse, inverse_rate, legendre, InversionResult};
