//! Legendre/Cramér transforms, their generalized inverses, and the binary-kl
//! function with its upper inverse.
//!
//! The two workhorses:
//!
//! ```text
//! legendre(Λ, a)     = sup_{λ ∈ [0,b)} { λa - Λ(λ) }
//! inverse_rate(Λ, s) = inf_{λ ∈ (0,b)} { (s + Λ(λ)) / λ }
//! ```
//!
//! The supremum is located by solving Λ'(λ) = a (Λ' is nondecreasing); the
//! infimum by solving the stationarity condition h(λ) = λΛ'(λ) - Λ(λ) - s = 0,
//! which also has nondecreasing h. Both use bracketing bisection with
//! geometric expansion, so the returned stationarity residual is a
//! machine-checkable optimality certificate.

use crate::cgf::RateFunction;
use crate::error::{Error, Result};
use crate::numeric::{bisect_nondecreasing, golden_section_min};

/// Fraction of a finite domain supremum kept as a safety margin, so the
/// sub-gamma pole is never evaluated: λ never exceeds b·(1 - 2⁻³⁰).
const BOUNDARY_MARGIN: f64 = 1.0 / (1u64 << 30) as f64;

/// Expansion cap standing in for b = ∞. Exponentials of bounded losses have
/// fully underflowed long before this, so evaluations here are exact limits.
const LAMBDA_CAP: f64 = (1u64 << 40) as f64;

const MAX_BISECT_ITER: u32 = 200;

/// Hybrid absolute/relative tolerance: `tol · max(1, |target|)`.
fn hybrid_tol(tol: f64, target: f64) -> f64 {
    tol * target.abs().max(1.0)
}

/// Largest usable λ for a rate function: `b - ε_b` for finite b, a large cap
/// otherwise.
fn lambda_limit(rf: &RateFunction) -> f64 {
    let b = rf.domain_sup();
    if b.is_finite() {
        b * (1.0 - BOUNDARY_MARGIN)
    } else {
        LAMBDA_CAP
    }
}

/// Outcome of a generalized-inverse computation `inf (s + Λ(λ))/λ`.
///
/// `lambda_star` is `+∞` when no finite stationary optimizer exists (the
/// infimum is a boundary limit: identically-zero rate functions, or `s` at or
/// beyond the saturation level of a bounded-derivative CGF). `residual` is
/// the stationarity defect `λΛ'(λ) - Λ(λ) - s` at the reported optimizer and
/// is only meaningful when `lambda_star` is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionResult {
    pub gap: f64,
    pub lambda_star: f64,
    pub residual: f64,
    pub iterations: u32,
}

/// The bound gap read at a specific λ: `(s + Λ(λ)) / λ`.
///
/// This is the single arithmetic path shared by the inverse transform and the
/// fixed-λ bound evaluators, so that a fixed-λ bound at the reported λ*
/// reproduces the optimized bound bit for bit.
pub fn parametric_gap(rf: &RateFunction, s: f64, lambda: f64) -> Result<f64> {
    if lambda <= 0.0 {
        return Err(Error::LambdaOutOfDomain {
            lambda,
            domain_sup: rf.domain_sup(),
        });
    }
    Ok((s + rf.eval(lambda)?) / lambda)
}

/// Legendre transform of `rf` at `a`: `sup_{λ ∈ [0,b)} { λa - Λ(λ) }`.
///
/// Returns 0 for `a <= 0` (the supremum sits at λ = 0 since Λ ≥ 0), a finite
/// value when Λ'(λ) = a has a solution in the domain, the limiting value when
/// `a` equals the derivative's supremum exactly, and `+∞` when `a` exceeds it
/// and the objective diverges.
pub fn legendre(rf: &RateFunction, a: f64) -> Result<f64> {
    if a.is_nan() {
        return Err(Error::param("a", "NaN"));
    }
    if a <= 0.0 {
        return Ok(0.0);
    }
    if a == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let hi_limit = lambda_limit(rf);
    let objective = |lambda: f64| lambda * a - rf.eval_unchecked(lambda);

    // Geometric expansion until the nondecreasing derivative crosses `a`.
    let mut lo = 0.0;
    let mut hi = 1e-6_f64.min(hi_limit);
    let mut bracketed = rf.eval_deriv_unchecked(hi) >= a;
    while !bracketed && hi < hi_limit {
        lo = hi;
        hi = (hi * 2.0).min(hi_limit);
        bracketed = rf.eval_deriv_unchecked(hi) >= a;
    }

    if !bracketed {
        // Derivative never reaches `a`: the objective is nondecreasing over
        // the whole domain and the supremum is its value at the boundary.
        // Distinguish a finite limit (a equals the derivative supremum, e.g.
        // a = p for a Bernoulli CGF) from divergence by comparing the last
        // two expansion points.
        let at_cap = objective(hi_limit);
        let at_half = objective(0.5 * hi_limit);
        if at_cap - at_half > hybrid_tol(1e-9, at_cap) {
            return Ok(f64::INFINITY);
        }
        return Ok(at_cap.max(0.0));
    }

    let (lambda_star, _) =
        bisect_nondecreasing(|l| rf.eval_deriv_unchecked(l) - a, lo, hi, MAX_BISECT_ITER);
    Ok(objective(lambda_star).max(0.0))
}

/// Generalized inverse of the Cramér transform: `inf_{λ ∈ (0,b)} (s + Λ(λ))/λ`.
///
/// Solved through the stationarity condition `h(λ) = λΛ'(λ) - Λ(λ) - s = 0`
/// (h is nondecreasing, so bracketing bisection applies). When h never
/// crosses zero inside the domain the infimum is a boundary limit and is
/// evaluated there; a golden-section pass backs the bisection up if the
/// stationarity residual is not certified (flat-curvature rate functions).
pub fn inverse_rate(rf: &RateFunction, s: f64) -> Result<InversionResult> {
    if !(s >= 0.0) {
        return Err(Error::param("s", format!("{s} is not a nonnegative real")));
    }
    if s == f64::INFINITY {
        return Ok(InversionResult {
            gap: f64::INFINITY,
            lambda_star: f64::NAN,
            residual: 0.0,
            iterations: 0,
        });
    }
    if s == 0.0 {
        // inf (Λ(λ))/λ → Λ'(0) = 0 as λ → 0⁺; reported with the degenerate
        // optimizer λ* = 0.
        return Ok(InversionResult {
            gap: 0.0,
            lambda_star: 0.0,
            residual: 0.0,
            iterations: 0,
        });
    }

    let hi_limit = lambda_limit(rf);
    if rf.is_zero() && !rf.domain_sup().is_finite() {
        // (s + 0)/λ → 0 as λ → ∞: zero gap, no finite optimizer.
        return Ok(InversionResult {
            gap: 0.0,
            lambda_star: f64::INFINITY,
            residual: 0.0,
            iterations: 0,
        });
    }

    let stationarity =
        |lambda: f64| lambda * rf.eval_deriv_unchecked(lambda) - rf.eval_unchecked(lambda) - s;

    // h(0) = -s < 0; expand geometrically until h turns positive.
    let mut lo = 0.0;
    let mut hi = 1e-6_f64.min(hi_limit);
    let mut iterations = 0;
    let mut bracketed = stationarity(hi) > 0.0;
    while !bracketed && hi < hi_limit {
        lo = hi;
        hi = (hi * 2.0).min(hi_limit);
        iterations += 1;
        bracketed = stationarity(hi) > 0.0;
    }

    if !bracketed {
        // No stationary point inside the domain: the objective decreases all
        // the way to the boundary. Evaluate there (for bounded-derivative
        // CGFs this is the saturation value sup Λ'; for a finite domain with
        // a vanishing rate function it is s/b).
        let gap = (s + rf.eval_unchecked(hi_limit)) / hi_limit;
        return Ok(InversionResult {
            gap: gap.max(0.0),
            lambda_star: f64::INFINITY,
            residual: 0.0,
            iterations,
        });
    }

    let (mut lambda_star, bisect_iter) =
        bisect_nondecreasing(stationarity, lo, hi, MAX_BISECT_ITER);
    iterations += bisect_iter;
    let mut residual = stationarity(lambda_star);

    if residual.abs() > hybrid_tol(1e-10, s) {
        // Flat-curvature fallback: minimize the objective directly.
        let (l, _) = golden_section_min(
            |l| (s + rf.eval_unchecked(l)) / l,
            lo.max(1e-300),
            hi,
            200,
        );
        let better = stationarity(l);
        if better.abs() < residual.abs() {
            lambda_star = l;
            residual = better;
        }
        iterations += 200;
    }

    let gap = (s + rf.eval_unchecked(lambda_star)) / lambda_star;
    Ok(InversionResult {
        gap: gap.max(0.0),
        lambda_star,
        residual,
        iterations,
    })
}

/// Binary KL divergence `kl(a, b) = a ln(a/b) + (1-a) ln((1-a)/(1-b))` with
/// the `0·ln 0 = 0` convention; `+∞` when `b ∈ {0, 1}` disagrees with `a`.
pub fn binary_kl(a: f64, b: f64) -> Result<f64> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    let mut total = 0.0;
    if a > 0.0 {
        if b == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += a * (a / b).ln();
    }
    if a < 1.0 {
        if b == 1.0 {
            return Ok(f64::INFINITY);
        }
        total += (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
    }
    Ok(total.max(0.0))
}

fn check_probability(name: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(Error::param(name, format!("{v} is not in [0, 1]")));
    }
    Ok(())
}

/// `kl(a, 1-u)` evaluated in terms of `u = 1 - b`, stable for `u` near 0.
fn binary_kl_complement(a: f64, u: f64) -> f64 {
    let mut total = 0.0;
    if a > 0.0 {
        total += a * (a.ln() - (-u).ln_1p());
    }
    if a < 1.0 {
        total += (1.0 - a) * ((1.0 - a).ln() - u.ln());
    }
    total
}

/// Upper inverse of the binary KL: the largest `b ∈ [a, 1)` with
/// `kl(a, b) <= s`.
///
/// Bisection runs on `ln(1 - b)`, which keeps the kl residual at machine
/// precision even when the inverse is extremely close to 1. Closed forms:
/// `s = 0` returns `a`, and `a = 0` returns `1 - e^{-s}`.
pub fn binary_kl_upper_inverse(a: f64, s: f64) -> Result<f64> {
    check_probability("a", a)?;
    if a >= 1.0 {
        return Err(Error::param("a", "must be < 1 for the upper inverse"));
    }
    if !(s >= 0.0) {
        return Err(Error::param("s", format!("{s} is not a nonnegative real")));
    }
    if s == 0.0 {
        return Ok(a);
    }
    if s == f64::INFINITY {
        return Ok(1.0);
    }
    if a == 0.0 {
        // kl(0, b) = -ln(1 - b), whose inverse is 1 - e^{-s}.
        return Ok(-(-s).exp_m1());
    }

    // Feasible set {kl(a, 1-u) <= s} is an upper interval in t = ln u.
    let mut t_lo: f64 = -745.0; // u ≈ 5e-324, kl far above any finite s of interest
    let mut t_hi = (1.0 - a).ln();
    if binary_kl_complement(a, t_lo.exp()) <= s {
        // s so large the inverse saturates at the representable edge of 1.
        return Ok(1.0 - t_lo.exp());
    }
    for _ in 0..120 {
        let mid = 0.5 * (t_lo + t_hi);
        if binary_kl_complement(a, mid.exp()) <= s {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }
    Ok((1.0 - t_hi.exp()).clamp(a, 1.0))
}
