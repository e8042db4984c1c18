//! JSON config schemas for the structured subcommands. Every run echoes its
//! fully-resolved config (defaults filled in) back into the output.

use pacbayes::bounds::FixedLambdaVariant;
use pacbayes::cgf::RateFunction;
use pacbayes::harness::{CoverageBoundKind, EnvironmentSpec, PosteriorRule};
use serde::{Deserialize, Serialize};

/// One bound to evaluate against a query.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundSpec {
    Mcallester,
    Seeger,
    ChernoffBinaryKl,
    PacBayesChernoff {
        psi: RateFunction,
    },
    FixedLambda {
        psi: RateFunction,
        lambda: f64,
        variant: FixedLambdaVariant,
    },
    Subgaussian {
        expected_sigma2: f64,
    },
    Subgamma {
        sigma2: f64,
        c: f64,
    },
    L2 {
        m: f64,
        expected_theta_norm2: f64,
    },
    LogsobolevOracle {
        c: f64,
        expected_grad_norm2: f64,
    },
    EmpiricalGradient {
        c: f64,
        l: f64,
        expected_emp_grad_norm2: f64,
    },
}

/// `bound compute` config: a query plus a single bound spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeConfig {
    pub emp_gibbs_risk: f64,
    pub kl_div: f64,
    pub n: u64,
    pub delta: f64,
    pub bound: BoundSpec,
}

/// `bound compare` config: a query plus a list of bound specs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub emp_gibbs_risk: f64,
    pub kl_div: f64,
    pub n: u64,
    pub delta: f64,
    pub bounds: Vec<BoundSpec>,
}

/// `validate coverage` config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageRunConfig {
    pub environment: EnvironmentSpec,
    pub bound: CoverageBoundKind,
    pub posterior_rule: PosteriorRule,
    pub n: usize,
    pub delta: f64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

/// `validate lemma2` config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurvivalRunConfig {
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub model_index: usize,
    pub n: usize,
    pub c_grid: Vec<f64>,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

/// `validate expmoment` config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpMomentRunConfig {
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub model_index: usize,
    pub n: usize,
    pub m: usize,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}
