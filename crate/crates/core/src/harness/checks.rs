//! Monte Carlo checks of the two tail facts the optimized bound rests on,
//! plus the oracle exponential-moment estimator.
//!
//! For a single model with exact CGF, the scaled transform of the
//! generalization gap is stochastically dominated by a unit exponential:
//!
//! ```text
//! P(n·Λ*(gen) >= c) <= e^{-c}
//! ```
//!
//! and consequently `E[e^{m·Λ*(gen)}] <= n/(n-m)` for m < n (a Pareto(n/m, 1)
//! mean). Both checks draw datasets, reduce each to its hit count k, and look
//! the transform value up in a per-k table (the gap only depends on k).

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::coverage::with_workers;
use crate::harness::environment::{Environment, EnvironmentSpec};
use crate::harness::rng::trial_rng;
use crate::numeric::binomial_se;
use crate::transform::legendre;

/// Marginal law of one model in an exact-CGF environment.
struct BinaryModel {
    p: f64,
    scale: f64,
}

fn binary_model(env: &Environment, model_index: usize) -> Result<BinaryModel> {
    if model_index >= env.models() {
        return Err(Error::param(
            "model_index",
            format!("{model_index} out of range for {} models", env.models()),
        ));
    }
    match env.spec() {
        EnvironmentSpec::Bernoulli { ps, .. } => Ok(BinaryModel {
            p: ps[model_index],
            scale: 1.0,
        }),
        EnvironmentSpec::ScaledBernoulli { ps, scales } => Ok(BinaryModel {
            p: ps[model_index],
            scale: scales[model_index],
        }),
        EnvironmentSpec::SigmoidLinear { .. } => Err(Error::ConfigMismatch(
            "this check needs an environment with an exact CGF".into(),
        )),
    }
}

/// n·Λ*(gen) for every possible hit count k = 0..=n.
fn rate_table(env: &Environment, model: &BinaryModel, model_index: usize, n: usize) -> Result<Vec<f64>> {
    let cgf = env
        .exact_cgf(model_index)
        .ok_or_else(|| Error::ConfigMismatch("no exact CGF".into()))?;
    let true_risk = env.true_risks()[model_index];
    (0..=n)
        .map(|k| {
            let emp = model.scale * k as f64 / n as f64;
            let gen = true_risk - emp;
            Ok(n as f64 * legendre(&cgf, gen)?)
        })
        .collect()
}

/// Hit counts per trial, each drawn from the model's marginal law.
fn hit_counts(
    p: f64,
    n: usize,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Vec<usize> {
    with_workers(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(seed, trial, 0);
                (0..n).filter(|_| rng.gen::<f64>() < p).count()
            })
            .collect()
    })
}

/// One grid row of the survival check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalRow {
    pub c: f64,
    pub survival: f64,
    pub exponential_bound: f64,
    pub se: f64,
}

/// Survival-dominance report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalReport {
    pub trials: u64,
    pub rows: Vec<SurvivalRow>,
    /// True when every row satisfies `survival <= e^{-c} + 3·SE`.
    pub dominated: bool,
}

/// Tabulate `P(n·Λ*(gen) >= c)` against `e^{-c}` over a grid of thresholds.
pub fn check_survival_dominance(
    env: &Environment,
    model_index: usize,
    n: usize,
    c_grid: &[f64],
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<SurvivalReport> {
    let model = binary_model(env, model_index)?;
    if n < 2 {
        return Err(Error::param("n", format!("{n} is below 2")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    for &c in c_grid {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::param("c_grid", format!("threshold {c} is not >= 0")));
        }
    }

    let rates = rate_table(env, &model, model_index, n)?;
    let counts = hit_counts(model.p, n, trials, seed, workers);

    let rows: Vec<SurvivalRow> = c_grid
        .iter()
        .map(|&c| {
            let hits = counts.iter().filter(|&&k| rates[k] >= c).count() as u64;
            let survival = hits as f64 / trials as f64;
            SurvivalRow {
                c,
                survival,
                exponential_bound: (-c).exp(),
                se: binomial_se(survival, trials),
            }
        })
        .collect();
    let dominated = rows
        .iter()
        .all(|r| r.survival <= r.exponential_bound + 3.0 * r.se);
    Ok(SurvivalReport {
        trials,
        rows,
        dominated,
    })
}

/// Exponential-moment report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpMomentReport {
    pub estimate: f64,
    pub se: f64,
    /// The Pareto-mean ceiling n/(n-m).
    pub pareto_bound: f64,
    pub trials: u64,
    /// Set when m > n/3: the dominating Pareto's second moment is no longer
    /// comfortably finite and the standard error is unstable.
    pub high_variance_warning: bool,
    /// True when `estimate <= bound + 3·SE`.
    pub within_bound: bool,
}

/// Monte Carlo estimate of `E[e^{m·Λ*(gen)}]`, checked against `n/(n-m)`.
pub fn check_exp_moment(
    env: &Environment,
    model_index: usize,
    n: usize,
    m: usize,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<ExpMomentReport> {
    let model = binary_model(env, model_index)?;
    if n < 2 {
        return Err(Error::param("n", format!("{n} is below 2")));
    }
    if m >= n {
        return Err(Error::param(
            "m",
            format!("{m} must be below n = {n}: the dominating Pareto has no finite mean"),
        ));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }

    let rates = rate_table(env, &model, model_index, n)?;
    // e^{mΛ*(gen)} per hit count; Λ* here is the n-scaled table over n.
    let values: Vec<f64> = rates
        .iter()
        .map(|r| (m as f64 * r / n as f64).exp())
        .collect();
    let counts = hit_counts(model.p, n, trials, seed, workers);
    let samples: Vec<f64> = counts.iter().map(|&k| values[k]).collect();

    let estimate = samples.iter().sum::<f64>() / trials as f64;
    let se = crate::numeric::standard_error(&samples);
    let pareto_bound = n as f64 / (n - m) as f64;
    Ok(ExpMomentReport {
        estimate,
        se,
        pareto_bound,
        trials,
        high_variance_warning: 3 * m > n,
        within_bound: estimate <= pareto_bound + 3.0 * se,
    })
}

/// Oracle exponential-moment estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleMomentReport {
    pub estimate: f64,
    pub se: f64,
    /// Closed-form value Σ πᵢ e^{nΛᵢ(λ)} for exact-CGF environments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    pub trials: u64,
}

/// Monte Carlo estimate of the prior exponential moment
/// `E_π E[e^{λn(L(θ) - L̂(θ,D))}]`, with the exact value alongside when the
/// environment's CGFs are closed-form.
pub fn estimate_exponential_moment_oracle(
    env: &Environment,
    pi: &crate::simplex::SimplexDistribution,
    n: usize,
    lambda: f64,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<OracleMomentReport> {
    if pi.len() != env.models() {
        return Err(Error::ConfigMismatch(format!(
            "prior over {} atoms for {} models",
            pi.len(),
            env.models()
        )));
    }
    if n < 2 {
        return Err(Error::param("n", format!("{n} is below 2")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be positive"));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::param("lambda", format!("{lambda} is not >= 0")));
    }
    for i in 0..env.models() {
        if let Some(cgf) = env.exact_cgf(i) {
            if lambda >= cgf.domain_sup() {
                return Err(Error::LambdaOutOfDomain {
                    lambda,
                    domain_sup: cgf.domain_sup(),
                });
            }
        }
    }

    let samples: Vec<f64> = with_workers(workers, || {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = trial_rng(seed, trial, 0);
                // Inverse-CDF draw of a model from the prior.
                let u = rng.gen::<f64>();
                let mut acc = 0.0;
                let mut idx = env.models() - 1;
                for (i, w) in pi.weights().iter().enumerate() {
                    acc += w;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                let losses = env.draw_dataset(n, &mut rng);
                let emp = losses[idx].iter().sum::<f64>() / n as f64;
                (lambda * n as f64 * (env.true_risks()[idx] - emp)).exp()
            })
            .collect()
    });

    let estimate = samples.iter().sum::<f64>() / trials as f64;
    let se = crate::numeric::standard_error(&samples);

    let exact = (0..env.models())
        .map(|i| {
            env.exact_cgf(i)
                .map(|cgf| pi[i] * (n as f64 * cgf.eval_unchecked(lambda)).exp())
        })
        .sum::<Option<f64>>();

    Ok(OracleMomentReport {
        estimate,
        se,
        exact,
        trials,
    })
}
