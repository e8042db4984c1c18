//! Monte Carlo coverage runs: draw datasets, form a posterior per rule,
//! evaluate a bound, and count how often the true Gibbs risk escapes it.
//!
//! Per-trial results are collected in trial order and aggregated serially,
//! so a report is bit-identical no matter how many worker threads ran it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    chernoff_binary_kl, l2_bound, mcallester_bound, pac_bayes_chernoff, seeger_bound,
    subgaussian_bound, BoundQuery,
};
use crate::cgf::expected_rate;
use crate::error::{Error, Result};
use crate::harness::environment::Environment;
use crate::harness::rng::trial_rng;
use crate::numeric::binomial_se;
use crate::posterior::{kl_discrete, optimize_bound, FiniteModelClass, ModelEntry};
use crate::simplex::SimplexDistribution;

/// Bound evaluated inside a coverage run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageBoundKind {
    Mcallester,
    Seeger,
    ChernoffBinaryKl,
    SubGaussian,
    L2,
    PacBayesChernoff,
}

/// How the per-trial posterior is formed. Data-dependent rules are legal
/// because every bound here holds simultaneously over posteriors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PosteriorRule {
    /// ρ = π (uniform over the environment's models).
    Prior,
    /// A fixed, caller-supplied ρ.
    Fixed { weights: SimplexDistribution },
    /// Gibbs posterior ρ ∝ π·exp(-β·empirical risk).
    Gibbs { beta: f64 },
    /// The bound-minimizing posterior with λ optimized per trial.
    Prop9,
}

/// Run parameters common to the validation drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageConfig {
    pub n: usize,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub record_trials: bool,
}

/// One trial's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub bound: f64,
    pub gibbs_true_risk: f64,
    pub gibbs_emp_risk: f64,
    pub violated: bool,
}

/// Aggregate coverage outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub trials: u64,
    pub violations: u64,
    pub violation_rate: f64,
    pub binomial_se: f64,
    /// Largest oracle standard error among the environment's true risks;
    /// coverage assertions on oracle-backed environments add this to their
    /// slack. Zero for analytic environments.
    pub oracle_se_slack: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<TrialRecord>>,
}

/// Execute `op` on a rayon pool with the requested worker count (the global
/// pool when unspecified).
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, op: impl FnOnce() -> T + Send) -> T {
    match workers {
        None => op(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(op),
    }
}

fn validate_combination(env: &Environment, kind: CoverageBoundKind) -> Result<()> {
    let needs_unit_losses = matches!(
        kind,
        CoverageBoundKind::Mcallester
            | CoverageBoundKind::Seeger
            | CoverageBoundKind::ChernoffBinaryKl
    );
    if needs_unit_losses && !env.bounded_unit_losses() {
        return Err(Error::ConfigMismatch(format!(
            "{kind:?} requires losses in [0, 1], but the environment is not unit-bounded"
        )));
    }
    if matches!(kind, CoverageBoundKind::L2) && env.lipschitz2().is_none() {
        return Err(Error::ConfigMismatch(
            "the parameter-norm bound needs an environment with recorded \
             parameter norms (sigmoid_linear)"
                .into(),
        ));
    }
    Ok(())
}

/// Monte Carlo check of the `P(bound holds) >= 1 - δ` guarantee.
pub fn run_coverage(
    env: &Environment,
    kind: CoverageBoundKind,
    rule: &PosteriorRule,
    cfg: &CoverageConfig,
) -> Result<CoverageReport> {
    validate_combination(env, kind)?;
    if cfg.n < 2 {
        return Err(Error::param("n", format!("{} is below 2", cfg.n)));
    }
    if cfg.trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::param(
            "delta",
            format!("{} is not in (0, 1)", cfg.delta),
        ));
    }
    if let PosteriorRule::Fixed { weights } = rule {
        if weights.len() != env.models() {
            return Err(Error::ConfigMismatch(format!(
                "fixed posterior over {} atoms for {} models",
                weights.len(),
                env.models()
            )));
        }
    }

    let records: Vec<TrialRecord> = with_workers(cfg.workers, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_trial(env, kind, rule, cfg, trial))
            .collect::<Result<Vec<_>>>()
    })?;

    let violations = records.iter().filter(|r| r.violated).count() as u64;
    let violation_rate = violations as f64 / cfg.trials as f64;
    let oracle_se_slack = env.oracle_se().iter().copied().fold(0.0, f64::max);
    Ok(CoverageReport {
        trials: cfg.trials,
        violations,
        violation_rate,
        binomial_se: binomial_se(violation_rate, cfg.trials),
        oracle_se_slack,
        records: cfg.record_trials.then_some(records),
    })
}

fn run_trial(
    env: &Environment,
    kind: CoverageBoundKind,
    rule: &PosteriorRule,
    cfg: &CoverageConfig,
    trial: u64,
) -> Result<TrialRecord> {
    let mut rng = trial_rng(cfg.seed, trial, 0);
    let emp_risks = env.draw_empirical_risks(cfg.n, &mut rng);
    let prior = SimplexDistribution::uniform(env.models())?;

    let rho = match rule {
        PosteriorRule::Prior => prior.clone(),
        PosteriorRule::Fixed { weights } => weights.clone(),
        PosteriorRule::Gibbs { beta } => gibbs_posterior(&prior, &emp_risks, *beta)?,
        PosteriorRule::Prop9 => {
            let class = posterior_class(env, &emp_risks, cfg.n as u64)?;
            optimize_bound(&class, cfg.delta)?.posterior
        }
    };

    let gibbs_emp_risk = rho.expectation(&emp_risks)?;
    let gibbs_true_risk = rho.expectation(env.true_risks())?;
    let kl = kl_discrete(&rho, &prior)?;
    let q = BoundQuery::new(gibbs_emp_risk, kl, cfg.n as u64, cfg.delta)?;

    let bound = match kind {
        CoverageBoundKind::Mcallester => mcallester_bound(&q)?.value,
        CoverageBoundKind::Seeger => seeger_bound(&q)?.value,
        CoverageBoundKind::ChernoffBinaryKl => chernoff_binary_kl(&q)?.value,
        CoverageBoundKind::SubGaussian => {
            let sigma2s: Vec<f64> = (0..env.models()).map(|i| env.sigma2_proxy(i)).collect();
            subgaussian_bound(&q, rho.expectation(&sigma2s)?)?.value
        }
        CoverageBoundKind::L2 => {
            let m = env.lipschitz2().expect("validated");
            let norms: Vec<f64> = (0..env.models())
                .map(|i| env.theta_norm2(i).expect("validated"))
                .collect();
            l2_bound(&q, m, rho.expectation(&norms)?)?.report.value
        }
        CoverageBoundKind::PacBayesChernoff => {
            let members: Vec<_> = (0..env.models())
                .map(|i| env.psi_for_posterior(i))
                .collect();
            let mix = expected_rate(&rho, members)?;
            pac_bayes_chernoff(&q, &mix)?.value
        }
    };

    Ok(TrialRecord {
        trial_id: trial,
        bound,
        gibbs_true_risk,
        gibbs_emp_risk,
        violated: gibbs_true_risk > bound,
    })
}

fn gibbs_posterior(
    prior: &SimplexDistribution,
    emp_risks: &[f64],
    beta: f64,
) -> Result<SimplexDistribution> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::param("beta", format!("{beta} is not finite and >= 0")));
    }
    let exponents: Vec<f64> = prior
        .weights()
        .iter()
        .zip(emp_risks)
        .map(|(p, r)| p.ln() - beta * r)
        .collect();
    let max = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SimplexDistribution::normalized(exponents.iter().map(|e| (e - max).exp()).collect())
}

fn posterior_class(env: &Environment, emp_risks: &[f64], n: u64) -> Result<FiniteModelClass> {
    let k = env.models();
    let models = (0..k)
        .map(|i| ModelEntry {
            emp_risk: emp_risks[i],
            prior: 1.0 / k as f64,
            psi: env.psi_for_posterior(i),
            features: None,
        })
        .collect();
    FiniteModelClass::new(n, models)
}
