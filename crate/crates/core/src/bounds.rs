//! Tail upper bounds `T(t) ≤ exp(−ν*(ln(t/γ)))` and their verification
//! against exact tails.

use serde::Serialize;
use std::f64::consts::E;

use crate::error::{domain, Result};
use crate::fenchel::fenchel_conjugate;
use crate::model::{tail_of, FunctionSpec, GeneratingFunction, Support, TailFunction};
use crate::numerics::Extended;

/// Tolerance handed to the conjugate when it has to be found numerically.
pub const BOUND_TOL: f64 = 1e-10;

/// Relative slack allowed when comparing a bound with the exact tail.
pub const DOMINATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub value: f64,
    /// `t > e·γ`.
    pub in_theorem_region: bool,
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite and > 0, got {x}"))
    }
}

/// `exp(−ν*(ln(t/γ)))`; zero where the conjugate is infinite.
pub fn tail_upper_bound(psi: &GeneratingFunction, gamma: f64, t: f64) -> Result<TailBound> {
    check_positive("gamma", gamma)?;
    check_positive("t", t)?;
    let conj = fenchel_conjugate(psi, (t / gamma).ln(), BOUND_TOL)?;
    let value = match conj.value {
        Extended::Finite(v) => (-v).exp(),
        Extended::PosInfinity => 0.0,
    };
    Ok(TailBound {
        value,
        in_theorem_region: t > E * gamma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub t_grid: Vec<f64>,
    pub bound: Vec<f64>,
    pub actual: Vec<f64>,
    pub in_region: Vec<bool>,
    pub dominated: bool,
    /// Range of `bound/actual` over points where both are positive and finite.
    pub ratio_range: Option<(f64, f64)>,
    /// Points left out of `ratio_range`.
    pub excluded: usize,
    pub validity_region_start: f64,
}

/// Compare the bound with the exact tail of `spec` on `t_grid`.
pub fn verify_domination(spec: &FunctionSpec, psi: &GeneratingFunction, gamma: f64, t_grid: &[f64]) -> Result<BoundReport> {
    verify_domination_tail(&tail_of(spec)?, psi, gamma, t_grid)
}

/// [`verify_domination`] against an explicit tail.
pub fn verify_domination_tail(
    tail: &TailFunction,
    psi: &GeneratingFunction,
    gamma: f64,
    t_grid: &[f64],
) -> Result<BoundReport> {
    check_positive("gamma", gamma)?;
    let mut report = BoundReport {
        t_grid: t_grid.to_vec(),
        bound: Vec::with_capacity(t_grid.len()),
        actual: Vec::with_capacity(t_grid.len()),
        in_region: Vec::with_capacity(t_grid.len()),
        dominated: true,
        ratio_range: None,
        excluded: 0,
        validity_region_start: E * gamma,
    };
    for &t in t_grid {
        let b = tail_upper_bound(psi, gamma, t)?;
        let actual = crate::model::eval_tail(tail, t)?.value;
        if b.in_theorem_region && b.value < actual * (1.0 - DOMINATION_SLACK) {
            report.dominated = false;
        }
        if actual > 0.0 && b.value > 0.0 && actual.is_finite() && b.value.is_finite() {
            let r = b.value / actual;
            report.ratio_range = Some(match report.ratio_range {
                None => (r, r),
                Some((lo, hi)) => (lo.min(r), hi.max(r)),
            });
        } else {
            report.excluded += 1;
        }
        report.bound.push(b.value);
        report.actual.push(actual);
        report.in_region.push(b.in_theorem_region);
    }
    Ok(report)
}

/// Range of `bound(t)/T(t)` for `exp(−x^θ)` and its natural generating
/// function, on points `t ∈ (0, 1)` where the bound is used outside the
/// theorem region.
pub fn sharpness_ratio(theta: f64, t_grid: &[f64]) -> Result<(f64, f64)> {
    check_positive("theta", theta)?;
    if t_grid.is_empty() {
        return domain("sharpness grid is empty");
    }
    let psi = GeneratingFunction::natural_stretched_exp(1.0, theta, Support::positive_half_line())?;
    let tail = TailFunction::log_power(theta)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in t_grid {
        if !(t > 0.0 && t < 1.0) {
            return domain(format!("sharpness grid points must lie in (0, 1), got {t}"));
        }
        let r = tail_upper_bound(&psi, 1.0, t)?.value / tail.value(t);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// `C(θ) = e^{1/θ}·θ^{1/θ−1}·Γ(1/θ)`, the constant in `bound = C(θ)·T(t)`.
pub fn sharpness_constant(theta: f64) -> Result<f64> {
    check_positive("theta", theta)?;
    Ok((1.0 / theta + (1.0 / theta - 1.0) * theta.ln() + crate::numerics::ln_gamma(1.0 / theta)?).exp())
}

/// `exp(−(t/C₁)^m/(m·e))`, the bound for `‖f‖_p ≤ C₁·p^{1/m}`.
pub fn subgaussian_bound(m: f64, c1: f64, t: f64) -> Result<f64> {
    check_positive("m", m)?;
    check_positive("C1", c1)?;
    check_positive("t", t)?;
    Ok((-(t / c1).powf(m) / (m * E)).exp())
}
