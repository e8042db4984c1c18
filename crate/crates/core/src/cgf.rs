//! Cumulant generating functions of centered losses and their convex upper
//! bounds ψ.
//!
//! Every kind represents a convex function Λ on a domain `[0, b)` with
//! `Λ(0) = Λ'(0) = 0`:
//!
//! ```text
//! bernoulli(p)            λp + ln(1 - p + p e^{-λ})          b = ∞
//! scaled_bernoulli(p, B)  λBp + ln(1 - p + p e^{-λB})        b = ∞
//! subgaussian(σ²)         λ²σ²/2                             b = ∞
//! subgamma(σ², c)         λ²σ²/(2(1 - cλ))                   b = 1/c
//! l2(M, ‖θ‖²)             2Mλ²‖θ‖²                           b = ∞
//! logsobolev(C, ‖∇ℓ‖²)    (C/2)λ²‖∇ℓ‖²                       b = ∞
//! empirical(ℓ₁..ℓ_M)      λ·mean(ℓ) + ln(mean e^{-λℓ})       b = ∞
//! mixture(w, Λᵢ)          Σ wᵢ Λᵢ(λ)                         b = min over wᵢ>0
//! ```
//!
//! The closed-form kinds are exact CGFs of {0,1} and {0,B} losses; the ψ
//! kinds are the sub-Gaussian, sub-gamma, parameter-norm and input-gradient
//! envelopes; `empirical` is the plug-in estimator from held-out loss
//! samples. `mixture` is the posterior average E_ρ[Λ_θ(λ)], which is what the
//! posterior-level Cramér transform inverts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::mean;
use crate::simplex::SimplexDistribution;

/// A convex rate function Λ (or envelope ψ) on `[0, domain_sup)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RateFunction {
    /// Exact centered CGF of a {0,1}-valued loss with mean `p`.
    #[serde(rename = "bernoulli")]
    Bernoulli { p: f64 },
    /// Exact centered CGF of a {0,B}-valued loss: `P(loss = B) = p`.
    #[serde(rename = "scaled_bernoulli")]
    ScaledBernoulli { p: f64, scale: f64 },
    /// ψ(λ) = λ²σ²/2.
    #[serde(rename = "subgaussian")]
    SubGaussian { sigma2: f64 },
    /// ψ(λ) = λ²σ²/(2(1 - cλ)) on [0, 1/c). `c = 0` degrades to sub-Gaussian.
    #[serde(rename = "subgamma")]
    SubGamma { sigma2: f64, c: f64 },
    /// ψ(λ) = 2Mλ²‖θ‖², the parameter-Lipschitz envelope.
    #[serde(rename = "l2")]
    L2 { m: f64, theta_norm2: f64 },
    /// ψ(λ) = (C/2)λ²‖∇ₓℓ‖², the log-Sobolev envelope.
    #[serde(rename = "logsobolev")]
    LogSobolev { c: f64, grad_norm2: f64 },
    /// Plug-in CGF of a nonnegative loss sample.
    #[serde(rename = "empirical")]
    Empirical { samples: Vec<f64> },
    /// Posterior average Σ wᵢ Λᵢ.
    #[serde(rename = "mixture")]
    Mixture {
        weights: Vec<f64>,
        members: Vec<RateFunction>,
    },
}

impl RateFunction {
    pub fn bernoulli(p: f64) -> Result<Self> {
        let rf = RateFunction::Bernoulli { p };
        rf.validate()?;
        Ok(rf)
    }

    pub fn scaled_bernoulli(p: f64, scale: f64) -> Result<Self> {
        let rf = RateFunction::ScaledBernoulli { p, scale };
        rf.validate()?;
        Ok(rf)
    }

    pub fn sub_gaussian(sigma2: f64) -> Result<Self> {
        let rf = RateFunction::SubGaussian { sigma2 };
        rf.validate()?;
        Ok(rf)
    }

    pub fn sub_gamma(sigma2: f64, c: f64) -> Result<Self> {
        let rf = RateFunction::SubGamma { sigma2, c };
        rf.validate()?;
        Ok(rf)
    }

    pub fn l2(m: f64, theta_norm2: f64) -> Result<Self> {
        let rf = RateFunction::L2 { m, theta_norm2 };
        rf.validate()?;
        Ok(rf)
    }

    pub fn log_sobolev(c: f64, grad_norm2: f64) -> Result<Self> {
        let rf = RateFunction::LogSobolev { c, grad_norm2 };
        rf.validate()?;
        Ok(rf)
    }

    /// Supremum `b` of the domain `[0, b)`.
    pub fn domain_sup(&self) -> f64 {
        match self {
            RateFunction::SubGamma { c, .. } if *c > 0.0 => 1.0 / c,
            RateFunction::Mixture { weights, members } => weights
                .iter()
                .zip(members)
                .filter(|(w, _)| **w > 0.0)
                .map(|(_, m)| m.domain_sup())
                .fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        }
    }

    /// Λ(λ). Errors if `λ` is negative, non-finite, or at/above the domain
    /// supremum.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        Ok(self.eval_unchecked(lambda))
    }

    /// dΛ/dλ, analytic for closed-form kinds and via the exact ratio formula
    /// for the empirical kind. Same domain rules as [`eval`](Self::eval).
    pub fn eval_deriv(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda)?;
        Ok(self.eval_deriv_unchecked(lambda))
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() || lambda < 0.0 || lambda >= self.domain_sup() {
            return Err(Error::LambdaOutOfDomain {
                lambda,
                domain_sup: self.domain_sup(),
            });
        }
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, lambda: f64) -> f64 {
        match self {
            RateFunction::Bernoulli { p } => centered_bernoulli_cgf(*p, 1.0, lambda),
            RateFunction::ScaledBernoulli { p, scale } => {
                centered_bernoulli_cgf(*p, *scale, lambda)
            }
            RateFunction::SubGaussian { sigma2 } => 0.5 * lambda * lambda * sigma2,
            RateFunction::SubGamma { sigma2, c } => {
                0.5 * lambda * lambda * sigma2 / (1.0 - c * lambda)
            }
            RateFunction::L2 { m, theta_norm2 } => 2.0 * m * lambda * lambda * theta_norm2,
            RateFunction::LogSobolev { c, grad_norm2 } => {
                0.5 * c * lambda * lambda * grad_norm2
            }
            RateFunction::Empirical { samples } => empirical_cgf_at(samples, lambda),
            RateFunction::Mixture { weights, members } => weights
                .iter()
                .zip(members)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, m)| w * m.eval_unchecked(lambda))
                .sum(),
        }
    }

    pub(crate) fn eval_deriv_unchecked(&self, lambda: f64) -> f64 {
        match self {
            RateFunction::Bernoulli { p } => centered_bernoulli_cgf_deriv(*p, 1.0, lambda),
            RateFunction::ScaledBernoulli { p, scale } => {
                centered_bernoulli_cgf_deriv(*p, *scale, lambda)
            }
            RateFunction::SubGaussian { sigma2 } => lambda * sigma2,
            RateFunction::SubGamma { sigma2, c } => {
                let one_minus = 1.0 - c * lambda;
                0.5 * sigma2 * lambda * (2.0 - c * lambda) / (one_minus * one_minus)
            }
            RateFunction::L2 { m, theta_norm2 } => 4.0 * m * lambda * theta_norm2,
            RateFunction::LogSobolev { c, grad_norm2 } => c * lambda * grad_norm2,
            RateFunction::Empirical { samples } => empirical_cgf_deriv_at(samples, lambda),
            RateFunction::Mixture { weights, members } => weights
                .iter()
                .zip(members)
                .filter(|(w, _)| **w > 0.0)
                .map(|(w, m)| w * m.eval_deriv_unchecked(lambda))
                .sum(),
        }
    }

    /// True when Λ vanishes identically on its whole domain (constant loss).
    pub fn is_zero(&self) -> bool {
        match self {
            RateFunction::Bernoulli { p } => *p == 0.0 || *p == 1.0,
            RateFunction::ScaledBernoulli { p, scale } => {
                *p == 0.0 || *p == 1.0 || *scale == 0.0
            }
            RateFunction::SubGaussian { sigma2 } => *sigma2 == 0.0,
            RateFunction::SubGamma { sigma2, .. } => *sigma2 == 0.0,
            RateFunction::L2 { m, theta_norm2 } => *m == 0.0 || *theta_norm2 == 0.0,
            RateFunction::LogSobolev { c, grad_norm2 } => *c == 0.0 || *grad_norm2 == 0.0,
            RateFunction::Empirical { samples } => all_equal(samples),
            RateFunction::Mixture { weights, members } => weights
                .iter()
                .zip(members)
                .filter(|(w, _)| **w > 0.0)
                .all(|(_, m)| m.is_zero()),
        }
    }

    /// Validate parameters. Deserialized values must pass through here before
    /// evaluation; the named constructors call it for you.
    pub fn validate(&self) -> Result<()> {
        match self {
            RateFunction::Bernoulli { p } => check_unit_interval("p", *p),
            RateFunction::ScaledBernoulli { p, scale } => {
                check_unit_interval("p", *p)?;
                check_nonnegative("scale", *scale)
            }
            RateFunction::SubGaussian { sigma2 } => check_nonnegative("sigma2", *sigma2),
            RateFunction::SubGamma { sigma2, c } => {
                check_nonnegative("sigma2", *sigma2)?;
                check_nonnegative("c", *c)
            }
            RateFunction::L2 { m, theta_norm2 } => {
                check_nonnegative("m", *m)?;
                check_nonnegative("theta_norm2", *theta_norm2)
            }
            RateFunction::LogSobolev { c, grad_norm2 } => {
                check_nonnegative("c", *c)?;
                check_nonnegative("grad_norm2", *grad_norm2)
            }
            RateFunction::Empirical { samples } => {
                check_samples(samples)?;
                Ok(())
            }
            RateFunction::Mixture { weights, members } => {
                if weights.len() != members.len() {
                    return Err(Error::SimplexViolation(format!(
                        "{} weights for {} mixture members",
                        weights.len(),
                        members.len()
                    )));
                }
                SimplexDistribution::new(weights.clone())?;
                for m in members {
                    m.validate()?;
                }
                Ok(())
            }
        }
    }
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(Error::param(name, format!("{v} is not in [0, 1]")));
    }
    Ok(())
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::param(name, format!("{v} is not finite and >= 0")));
    }
    Ok(())
}

fn all_equal(samples: &[f64]) -> bool {
    samples.windows(2).all(|w| w[0] == w[1])
}

/// Centered CGF of a {0,B} loss: λBp + ln(1 - p + p e^{-λB}).
fn centered_bernoulli_cgf(p: f64, scale: f64, lambda: f64) -> f64 {
    if p == 0.0 || p == 1.0 || scale == 0.0 {
        return 0.0;
    }
    let lb = lambda * scale;
    lb * p + (1.0 - p + p * (-lb).exp()).ln()
}

/// d/dλ of the above: Bp - Bp e^{-λB} / (1 - p + p e^{-λB}).
fn centered_bernoulli_cgf_deriv(p: f64, scale: f64, lambda: f64) -> f64 {
    if p == 0.0 || p == 1.0 || scale == 0.0 {
        return 0.0;
    }
    let lb = lambda * scale;
    let e = (-lb).exp();
    scale * p - scale * p * e / (1.0 - p + p * e)
}

/// Plug-in CGF λ·mean(ℓ) + ln(mean e^{-λℓ}), evaluated with the exponent
/// shifted by the sample minimum so the log never underflows to -∞.
fn empirical_cgf_at(samples: &[f64], lambda: f64) -> f64 {
    if all_equal(samples) {
        return 0.0;
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: f64 = samples.iter().map(|l| (-lambda * (l - min)).exp()).sum();
    let log_mean_exp = -lambda * min + (shifted / samples.len() as f64).ln();
    lambda * mean(samples) + log_mean_exp
}

/// Exact derivative mean(ℓ) - mean(ℓ e^{-λℓ}) / mean(e^{-λℓ}), with the same
/// shift (it cancels in the ratio).
fn empirical_cgf_deriv_at(samples: &[f64], lambda: f64) -> f64 {
    if all_equal(samples) {
        return 0.0;
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let mut num = 0.0;
    let mut den = 0.0;
    for &l in samples {
        let w = (-lambda * (l - min)).exp();
        num += l * w;
        den += w;
    }
    mean(samples) - num / den
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidSamples(format!(
            "need at least 2 loss values, got {}",
            samples.len()
        )));
    }
    for (i, &l) in samples.iter().enumerate() {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::InvalidSamples(format!(
                "sample[{i}] = {l} is not a finite nonnegative loss"
            )));
        }
    }
    Ok(())
}

/// A validated set of nonnegative loss values.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSampleSet {
    values: Vec<f64>,
}

impl LossSampleSet {
    /// Requires at least two finite, nonnegative values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_samples(&values)?;
        Ok(Self { values })
    }

    /// Parse a one-column CSV: one loss per line, `.` decimal separator,
    /// optional single header line (skipped if it does not parse as a number).
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            match trimmed.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if lineno == 0 => continue, // header
                Err(_) => {
                    return Err(Error::InvalidSamples(format!(
                        "line {}: `{trimmed}` is not a number",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(values)
    }

    pub fn from_csv_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::InvalidSamples(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_str(&text)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All values identical: the centered CGF is identically zero and
    /// inversion must report a zero gap rather than solve anything.
    pub fn zero_variance(&self) -> bool {
        all_equal(&self.values)
    }
}

/// Plug-in CGF estimator from loss samples. The domain is all of `[0, ∞)`:
/// with nonnegative losses and λ ≥ 0 every exponential `e^{-λℓ}` lies in
/// (0, 1], so the estimator is finite everywhere.
pub fn empirical_cgf(samples: &LossSampleSet) -> RateFunction {
    RateFunction::Empirical {
        samples: samples.values().to_vec(),
    }
}

/// Posterior-averaged rate function E_ρ[Λ_θ]: the mixture Σ wᵢ Λᵢ with domain
/// supremum min over positively-weighted members.
pub fn expected_rate(
    weights: &SimplexDistribution,
    members: Vec<RateFunction>,
) -> Result<RateFunction> {
    if weights.len() != members.len() {
        return Err(Error::SimplexViolation(format!(
            "{} weights for {} members",
            weights.len(),
            members.len()
        )));
    }
    for m in &members {
        m.validate()?;
    }
    Ok(RateFunction::Mixture {
        weights: weights.weights().to_vec(),
        members,
    })
}
