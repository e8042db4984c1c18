//! Synthetic data-generating processes with analytically known per-model
//! true risks and CGFs.
//!
//! Three kinds:
//!
//! - `bernoulli`: {0,1} losses with per-model hit probabilities. True risk
//!   and CGF are exact. Columns are coupled comonotonically by default (one
//!   uniform per data point, shared across models), matching the setting
//!   where every model is scored on the same data; independent coupling is
//!   available for variance studies.
//! - `scaled_bernoulli`: {0, Bᵢ} losses; exact risks and CGFs; sub-Gaussian
//!   proxy σᵢ² = Bᵢ²/4 by boundedness.
//! - `sigmoid_linear`: loss σ(θᵢᵀx) with x uniform in the cube inscribed in
//!   the radius-R ball. Losses lie in (0, 1) (so σ² = 1/4), the input
//!   gradient norm is capped by Lᵢ = ‖θᵢ‖²/16 and the parameter gradient by
//!   M = R²/16. True risks come from a frozen Monte Carlo oracle with a
//!   recorded seed; the oracle standard error is stored next to them.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cgf::RateFunction;
use crate::error::{Error, Result};

/// Joint law across models (marginals are fixed by the environment).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    Comonotone,
    Independent,
}

fn default_oracle_samples() -> u64 {
    1_000_000
}

fn default_oracle_seed() -> u64 {
    0x0E5EED
}

/// Declarative environment description; construction derives true risks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EnvironmentSpec {
    #[serde(rename = "bernoulli")]
    Bernoulli {
        ps: Vec<f64>,
        #[serde(default)]
        coupling: Coupling,
    },
    #[serde(rename = "scaled_bernoulli")]
    ScaledBernoulli { ps: Vec<f64>, scales: Vec<f64> },
    #[serde(rename = "sigmoid_linear")]
    SigmoidLinear {
        radius: f64,
        weights: Vec<Vec<f64>>,
        #[serde(default = "default_oracle_samples")]
        oracle_samples: u64,
        #[serde(default = "default_oracle_seed")]
        oracle_seed: u64,
    },
}

/// A constructed environment: spec plus derived per-model quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    spec: EnvironmentSpec,
    true_risks: Vec<f64>,
    oracle_se: Vec<f64>,
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Environment {
    pub fn from_spec(spec: EnvironmentSpec) -> Result<Self> {
        match &spec {
            EnvironmentSpec::Bernoulli { ps, .. } => {
                check_probabilities(ps)?;
                let true_risks = ps.clone();
                let oracle_se = vec![0.0; ps.len()];
                Ok(Self {
                    spec,
                    true_risks,
                    oracle_se,
                })
            }
            EnvironmentSpec::ScaledBernoulli { ps, scales } => {
                check_probabilities(ps)?;
                if scales.len() != ps.len() {
                    return Err(Error::ConfigMismatch(format!(
                        "{} scales for {} probabilities",
                        scales.len(),
                        ps.len()
                    )));
                }
                for (i, &b) in scales.iter().enumerate() {
                    if !b.is_finite() || b <= 0.0 {
                        return Err(Error::param(
                            "scales",
                            format!("scales[{i}] = {b} is not > 0"),
                        ));
                    }
                }
                let true_risks = ps.iter().zip(scales).map(|(p, b)| p * b).collect();
                let oracle_se = vec![0.0; ps.len()];
                Ok(Self {
                    spec,
                    true_risks,
                    oracle_se,
                })
            }
            EnvironmentSpec::SigmoidLinear {
                radius,
                weights,
                oracle_samples,
                oracle_seed,
            } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::param("radius", format!("{radius} is not > 0")));
                }
                if weights.is_empty() {
                    return Err(Error::ConfigMismatch("no model weight vectors".into()));
                }
                let dim = weights[0].len();
                if dim == 0 {
                    return Err(Error::ConfigMismatch("zero-dimensional inputs".into()));
                }
                for (i, w) in weights.iter().enumerate() {
                    if w.len() != dim {
                        return Err(Error::ConfigMismatch(format!(
                            "weights[{i}] has dimension {}, expected {dim}",
                            w.len()
                        )));
                    }
                    if w.iter().any(|v| !v.is_finite()) {
                        return Err(Error::param(
                            "weights",
                            format!("weights[{i}] contains a non-finite entry"),
                        ));
                    }
                }
                if *oracle_samples < 2 {
                    return Err(Error::param("oracle_samples", "must be at least 2"));
                }
                let (true_risks, oracle_se) =
                    sigmoid_oracle(*radius, weights, *oracle_samples, *oracle_seed);
                Ok(Self {
                    spec,
                    true_risks,
                    oracle_se,
                })
            }
        }
    }

    pub fn bernoulli(ps: Vec<f64>, coupling: Coupling) -> Result<Self> {
        Self::from_spec(EnvironmentSpec::Bernoulli { ps, coupling })
    }

    pub fn scaled_bernoulli(ps: Vec<f64>, scales: Vec<f64>) -> Result<Self> {
        Self::from_spec(EnvironmentSpec::ScaledBernoulli { ps, scales })
    }

    pub fn sigmoid_linear(radius: f64, weights: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_spec(EnvironmentSpec::SigmoidLinear {
            radius,
            weights,
            oracle_samples: default_oracle_samples(),
            oracle_seed: default_oracle_seed(),
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn models(&self) -> usize {
        self.true_risks.len()
    }

    /// Analytic (or frozen-oracle) population risks.
    pub fn true_risks(&self) -> &[f64] {
        &self.true_risks
    }

    /// Oracle standard errors; zero for environments with analytic risks.
    pub fn oracle_se(&self) -> &[f64] {
        &self.oracle_se
    }

    /// Whether every loss value lies in [0, 1] (binary-kl routes need this).
    pub fn bounded_unit_losses(&self) -> bool {
        match &self.spec {
            EnvironmentSpec::Bernoulli { .. } => true,
            EnvironmentSpec::ScaledBernoulli { scales, .. } => {
                scales.iter().all(|&b| b <= 1.0)
            }
            EnvironmentSpec::SigmoidLinear { .. } => true,
        }
    }

    /// The exact centered CGF of model `i`, where one exists.
    pub fn exact_cgf(&self, i: usize) -> Option<RateFunction> {
        match &self.spec {
            EnvironmentSpec::Bernoulli { ps, .. } => {
                Some(RateFunction::Bernoulli { p: ps[i] })
            }
            EnvironmentSpec::ScaledBernoulli { ps, scales } => {
                Some(RateFunction::ScaledBernoulli {
                    p: ps[i],
                    scale: scales[i],
                })
            }
            EnvironmentSpec::SigmoidLinear { .. } => None,
        }
    }

    /// Sub-Gaussian variance proxy from boundedness: B²/4, or 1/4 for losses
    /// in (0, 1).
    pub fn sigma2_proxy(&self, i: usize) -> f64 {
        match &self.spec {
            EnvironmentSpec::Bernoulli { .. } => 0.25,
            EnvironmentSpec::ScaledBernoulli { scales, .. } => {
                scales[i] * scales[i] * 0.25
            }
            EnvironmentSpec::SigmoidLinear { .. } => 0.25,
        }
    }

    /// ψ used for the posterior-optimizing rule: the exact CGF where one
    /// exists, the parameter-norm envelope otherwise.
    pub fn psi_for_posterior(&self, i: usize) -> RateFunction {
        match self.exact_cgf(i) {
            Some(rf) => rf,
            None => RateFunction::L2 {
                m: self.lipschitz2().unwrap(),
                theta_norm2: self.theta_norm2(i).unwrap(),
            },
        }
    }

    /// Parameter-Lipschitz constant M = R²/16 (sigmoid environments only).
    pub fn lipschitz2(&self) -> Option<f64> {
        match &self.spec {
            EnvironmentSpec::SigmoidLinear { radius, .. } => Some(radius * radius / 16.0),
            _ => None,
        }
    }

    /// Squared parameter norm ‖θᵢ‖² (sigmoid environments only).
    pub fn theta_norm2(&self, i: usize) -> Option<f64> {
        match &self.spec {
            EnvironmentSpec::SigmoidLinear { weights, .. } => Some(dot(&weights[i], &weights[i])),
            _ => None,
        }
    }

    /// Input-gradient norm cap Lᵢ = ‖θᵢ‖²/16 (sigmoid environments only).
    pub fn input_grad_bound(&self, i: usize) -> Option<f64> {
        self.theta_norm2(i).map(|t| t / 16.0)
    }

    /// One input point: coordinates uniform in [-R/√k, R/√k], hence ‖x‖ <= R.
    pub fn sample_input(&self, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
        match &self.spec {
            EnvironmentSpec::SigmoidLinear {
                radius, weights, ..
            } => {
                let k = weights[0].len();
                let half = radius / (k as f64).sqrt();
                Some(
                    (0..k)
                        .map(|_| (2.0 * rng.gen::<f64>() - 1.0) * half)
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Squared input-gradient norm ‖∇ₓ σ(θᵀx)‖² = σ'(θᵀx)²‖θ‖² at a point.
    pub fn input_grad_norm2(&self, i: usize, x: &[f64]) -> Option<f64> {
        match &self.spec {
            EnvironmentSpec::SigmoidLinear { weights, .. } => {
                let s = sigmoid(dot(&weights[i], x));
                let slope = s * (1.0 - s);
                Some(slope * slope * dot(&weights[i], &weights[i]))
            }
            _ => None,
        }
    }

    /// Squared parameter-gradient norm ‖∇_θ σ(θᵀx)‖² = σ'(θᵀx)²‖x‖².
    pub fn param_grad_norm2(&self, i: usize, x: &[f64]) -> Option<f64> {
        match &self.spec {
            EnvironmentSpec::SigmoidLinear { weights, .. } => {
                let s = sigmoid(dot(&weights[i], x));
                let slope = s * (1.0 - s);
                Some(slope * slope * dot(x, x))
            }
            _ => None,
        }
    }

    /// Draw one dataset: a per-model loss matrix `[model][sample]`.
    ///
    /// The comonotone coupling spends one uniform per column and thresholds
    /// it against every model's pᵢ; the independent coupling spends one per
    /// (model, column). Sigmoid environments score every model on the same
    /// inputs.
    pub fn draw_dataset(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let m = self.models();
        let mut losses = vec![vec![0.0; n]; m];
        match &self.spec {
            EnvironmentSpec::Bernoulli { ps, coupling } => match coupling {
                Coupling::Comonotone => {
                    for j in 0..n {
                        let u = rng.gen::<f64>();
                        for (i, &p) in ps.iter().enumerate() {
                            losses[i][j] = if u < p { 1.0 } else { 0.0 };
                        }
                    }
                }
                Coupling::Independent => {
                    for j in 0..n {
                        for (i, &p) in ps.iter().enumerate() {
                            losses[i][j] = if rng.gen::<f64>() < p { 1.0 } else { 0.0 };
                        }
                    }
                }
            },
            EnvironmentSpec::ScaledBernoulli { ps, scales } => {
                for j in 0..n {
                    let u = rng.gen::<f64>();
                    for i in 0..m {
                        losses[i][j] = if u < ps[i] { scales[i] } else { 0.0 };
                    }
                }
            }
            EnvironmentSpec::SigmoidLinear { weights, .. } => {
                for j in 0..n {
                    let x = self.sample_input(rng).expect("sigmoid environment");
                    for (i, w) in weights.iter().enumerate() {
                        losses[i][j] = sigmoid(dot(w, &x));
                    }
                }
            }
        }
        losses
    }

    /// Per-model empirical risks of one drawn dataset.
    pub fn draw_empirical_risks(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.draw_dataset(n, rng)
            .iter()
            .map(|row| row.iter().sum::<f64>() / n as f64)
            .collect()
    }
}

fn check_probabilities(ps: &[f64]) -> Result<()> {
    if ps.is_empty() {
        return Err(Error::ConfigMismatch("no models".into()));
    }
    for (i, &p) in ps.iter().enumerate() {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::param("ps", format!("ps[{i}] = {p} is not in [0, 1]")));
        }
    }
    Ok(())
}

/// Frozen Monte Carlo oracle for sigmoid-linear true risks. All models are
/// scored on the same oracle inputs; the per-model standard error of the
/// mean is returned alongside.
fn sigmoid_oracle(
    radius: f64,
    weights: &[Vec<f64>],
    samples: u64,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let m = weights.len();
    let k = weights[0].len();
    let half = radius / (k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; m];
    let mut sum_sq = vec![0.0; m];
    let mut x = vec![0.0; k];
    for _ in 0..samples {
        for coord in x.iter_mut() {
            *coord = (2.0 * rng.gen::<f64>() - 1.0) * half;
        }
        for (i, w) in weights.iter().enumerate() {
            let loss = sigmoid(dot(w, &x));
            sum[i] += loss;
            sum_sq[i] += loss * loss;
        }
    }
    let n = samples as f64;
    let risks: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let se = risks
        .iter()
        .zip(&sum_sq)
        .map(|(mean, sq)| {
            let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0);
            (var / n).sqrt()
        })
        .collect();
    (risks, se)
}
