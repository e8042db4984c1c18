//! Empirical check of the input-gradient CGF envelope: the ratio
//!
//! ```text
//! ratio(λ) = Λ̂(λ) / (0.5 λ² · mean ‖∇ₓℓ‖²)
//! ```
//!
//! evaluated on a λ-grid, together with its λ → 0⁺ limit
//! `V̂(ℓ) / mean ‖∇ₓℓ‖²` (one L'Hôpital pass on the plug-in CGF). The grid
//! supremum is the empirical envelope constant C.

use serde::Serialize;

use crate::cgf::{empirical_cgf, LossSampleSet};
use crate::error::{Error, Result};
use crate::numeric::{mean, population_variance};

/// Ratio-curve report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientRatioReport {
    /// (λ, ratio) pairs over the requested grid.
    pub curve: Vec<(f64, f64)>,
    /// The λ → 0⁺ limit V̂(loss)/mean(grad²).
    pub limit: f64,
    /// Supremum of the ratio over the grid (the empirical C).
    pub empirical_c: f64,
    /// Loss varies but gradients vanish: no finite C exists.
    pub assumption_failure: bool,
}

/// Default grid for the ratio curve: 0.05 to 5.0 in steps of 0.05.
pub fn default_ratio_grid() -> Vec<f64> {
    (1..=100).map(|i| i as f64 * 0.05).collect()
}

/// Compute the ratio curve from `(loss, squared gradient norm)` pairs.
pub fn gradient_ratio_curve(
    pairs: &[(f64, f64)],
    lambda_grid: &[f64],
) -> Result<GradientRatioReport> {
    if pairs.len() < 2 {
        return Err(Error::InvalidSamples(format!(
            "need at least 2 (loss, grad) pairs, got {}",
            pairs.len()
        )));
    }
    for (i, &(loss, grad)) in pairs.iter().enumerate() {
        if !loss.is_finite() || loss < 0.0 {
            return Err(Error::InvalidSamples(format!(
                "pair[{i}] loss = {loss} is not a finite nonnegative value"
            )));
        }
        if !grad.is_finite() || grad < 0.0 {
            return Err(Error::InvalidSamples(format!(
                "pair[{i}] grad_norm2 = {grad} is not a finite nonnegative value"
            )));
        }
    }
    if lambda_grid.is_empty() {
        return Err(Error::param("lambda_grid", "must not be empty"));
    }
    for &l in lambda_grid {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::param(
                "lambda_grid",
                format!("grid point {l} is not > 0"),
            ));
        }
    }

    let losses: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let grads: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mean_grad = mean(&grads);
    let loss_variance = population_variance(&losses);

    if mean_grad == 0.0 {
        // Constant loss with zero gradients holds the envelope with C = 0;
        // varying loss with zero gradients cannot hold it at all.
        let failure = loss_variance > 0.0;
        let flat = if failure { f64::INFINITY } else { 0.0 };
        return Ok(GradientRatioReport {
            curve: lambda_grid.iter().map(|&l| (l, flat)).collect(),
            limit: flat,
            empirical_c: flat,
            assumption_failure: failure,
        });
    }

    let cgf = empirical_cgf(&LossSampleSet::new(losses)?);
    let curve: Vec<(f64, f64)> = lambda_grid
        .iter()
        .map(|&l| {
            let ratio = cgf.eval_unchecked(l) / (0.5 * l * l * mean_grad);
            (l, ratio)
        })
        .collect();
    let limit = loss_variance / mean_grad;
    // The envelope constant is read off the grid; for decreasing curves the
    // limit sits above it.
    let empirical_c = curve
        .iter()
        .map(|&(_, r)| r)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GradientRatioReport {
        curve,
        limit,
        empirical_c,
        assumption_failure: false,
    })
}
