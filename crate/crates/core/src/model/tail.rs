//! Tail functions `T(t) = μ{x : |f(x)| > t}`.
//!
//! Every variant is evaluated in log space through [`TailFunction::ln_value_log`],
//! which takes `v = ln t` rather than `t`. Moment and Stieltjes integrals run
//! in the `v` variable, so tails can be probed far beyond the range where
//! `t = e^v` would underflow or overflow.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::log_sum_exp;

/// Nonincreasing table of `(t, T(t))` pairs with strictly increasing `t > 0`.
///
/// Between nodes `T` is interpolated linearly in `ln T` where both neighbours
/// are positive, linearly otherwise. Left of the first node the first value is
/// held; right of the last node the tail is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct TailTable {
    t: Vec<f64>,
    value: Vec<f64>,
}

impl TailTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parse("a tail table needs at least two rows".into()));
        }
        for (i, &(t, v)) in points.iter().enumerate() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Parse(format!("row {i}: t must be finite and > 0, got {t}")));
            }
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parse(format!("row {i}: T must be finite and >= 0, got {v}")));
            }
            if i > 0 {
                let (pt, pv) = points[i - 1];
                if t <= pt {
                    return Err(Error::Parse(format!("row {i}: t must be strictly increasing")));
                }
                if v > pv {
                    return Err(Error::Parse(format!("row {i}: T must be nonincreasing")));
                }
            }
        }
        let (t, value) = points.into_iter().unzip();
        Ok(TailTable { t, value })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.value.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    /// Interpolated value and whether `t` lay outside the table.
    pub fn lookup(&self, t: f64) -> (f64, bool) {
        let n = self.t.len();
        if t < self.t[0] {
            return (self.value[0], true);
        }
        if t > self.t[n - 1] {
            return (0.0, true);
        }
        let i = self.t.partition_point(|&x| x <= t).clamp(1, n - 1);
        let (t0, t1) = (self.t[i - 1], self.t[i]);
        let (v0, v1) = (self.value[i - 1], self.value[i]);
        let w = (t - t0) / (t1 - t0);
        let v = if v0 > 0.0 && v1 > 0.0 {
            (v0.ln() + w * (v1.ln() - v0.ln())).exp()
        } else {
            v0 + w * (v1 - v0)
        };
        (v, false)
    }
}

impl TryFrom<Vec<(f64, f64)>> for TailTable {
    type Error = Error;
    fn try_from(points: Vec<(f64, f64)>) -> Result<Self> {
        TailTable::new(points)
    }
}

impl From<TailTable> for Vec<(f64, f64)> {
    fn from(table: TailTable) -> Self {
        table.t.into_iter().zip(table.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TailFunction {
    /// `exp(−c·t^m)`; equal to 1 at `t = 0`.
    StretchedExpTail { c: f64, m: f64 },
    /// `(ln(1/t)/c)^{1/θ}` on `(0, 1)`, zero from `t = 1` on.
    LogPowerTail {
        #[serde(default = "one")]
        c: f64,
        theta: f64,
    },
    /// Tail of a disjoint union: the sum of the parts' tails.
    PiecewiseSum { parts: Vec<TailFunction> },
    Tabulated { points: TailTable },
    /// `T(t/λ)`, the tail of `λ·f`.
    Scaled { factor: f64, inner: Box<TailFunction> },
    /// `min(cap, T(t))`, the tail of `f` restricted to a set of measure `cap`
    /// when `f` decreases away from the origin.
    Capped { cap: f64, inner: Box<TailFunction> },
}

fn one() -> f64 {
    1.0
}

/// Checked pointwise tail evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEval {
    pub value: f64,
    /// Set when a tabulated tail was evaluated outside its table.
    pub extrapolated: bool,
}

/// `T(t)` for `t > 0`. The value may be `+∞` only in the limit `t → 0`.
pub fn eval_tail(tail: &TailFunction, t: f64) -> Result<TailEval> {
    if !(t > 0.0) || t.is_nan() {
        return domain(format!("tail evaluation needs t > 0, got {t}"));
    }
    tail.validate()?;
    Ok(TailEval {
        value: tail.value(t),
        extrapolated: tail.extrapolates_at(t),
    })
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} must be finite and > 0, got {x}"))
    }
}

impl TailFunction {
    pub fn stretched_exp(c: f64, m: f64) -> Result<Self> {
        let tail = TailFunction::StretchedExpTail { c, m };
        tail.validate()?;
        Ok(tail)
    }

    pub fn log_power(theta: f64) -> Result<Self> {
        Self::log_power_scaled(1.0, theta)
    }

    pub fn log_power_scaled(c: f64, theta: f64) -> Result<Self> {
        let tail = TailFunction::LogPowerTail { c, theta };
        tail.validate()?;
        Ok(tail)
    }

    pub fn piecewise_sum(parts: Vec<TailFunction>) -> Result<Self> {
        let tail = TailFunction::PiecewiseSum { parts };
        tail.validate()?;
        Ok(tail)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(TailFunction::Tabulated {
            points: TailTable::new(points)?,
        })
    }

    pub fn scaled(factor: f64, inner: TailFunction) -> Result<Self> {
        let tail = TailFunction::Scaled {
            factor,
            inner: Box::new(inner),
        };
        tail.validate()?;
        Ok(tail)
    }

    pub fn capped(cap: f64, inner: TailFunction) -> Result<Self> {
        let tail = TailFunction::Capped {
            cap,
            inner: Box::new(inner),
        };
        tail.validate()?;
        Ok(tail)
    }

    /// Parameter checks; deserialized values should pass through here.
    pub fn validate(&self) -> Result<()> {
        match self {
            TailFunction::StretchedExpTail { c, m } => {
                positive("C", *c)?;
                positive("m", *m)
            }
            TailFunction::LogPowerTail { c, theta } => {
                positive("c", *c)?;
                positive("theta", *theta)
            }
            TailFunction::PiecewiseSum { parts } => {
                if parts.is_empty() {
                    return domain("piecewise sum needs at least one part");
                }
                parts.iter().try_for_each(TailFunction::validate)
            }
            TailFunction::Tabulated { .. } => Ok(()),
            TailFunction::Scaled { factor, inner } => {
                positive("factor", *factor)?;
                inner.validate()
            }
            TailFunction::Capped { cap, inner } => {
                positive("cap", *cap)?;
                inner.validate()
            }
        }
    }

    /// `ln T(e^v)`; `-∞` where the tail vanishes.
    pub fn ln_value_log(&self, v: f64) -> f64 {
        match self {
            TailFunction::StretchedExpTail { c, m } => -c * (m * v).exp(),
            TailFunction::LogPowerTail { c, theta } => {
                if v >= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    ((-v).ln() - c.ln()) / theta
                }
            }
            TailFunction::PiecewiseSum { parts } => {
                let logs: Vec<f64> = parts.iter().map(|p| p.ln_value_log(v)).collect();
                log_sum_exp(&logs)
            }
            TailFunction::Tabulated { points } => {
                let (value, _) = points.lookup(v.exp());
                value.ln()
            }
            TailFunction::Scaled { factor, inner } => inner.ln_value_log(v - factor.ln()),
            TailFunction::Capped { cap, inner } => inner.ln_value_log(v).min(cap.ln()),
        }
    }

    /// `ln T(t)` for `t > 0`.
    pub fn ln_value(&self, t: f64) -> f64 {
        self.ln_value_log(t.ln())
    }

    /// `T(t)` for `t ≥ 0`; at `t = 0` this is the measure of the support
    /// (possibly `+∞`).
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TailFunction::Tabulated { points } => points.lookup(t).0,
            TailFunction::PiecewiseSum { parts } => parts.iter().map(|p| p.value(t)).sum(),
            TailFunction::Capped { cap, inner } => inner.value(t).min(*cap),
            TailFunction::Scaled { factor, inner } => inner.value(t / factor),
            _ => {
                if t == 0.0 {
                    match self {
                        TailFunction::StretchedExpTail { .. } => 1.0,
                        _ => f64::INFINITY,
                    }
                } else {
                    self.ln_value(t).exp()
                }
            }
        }
    }

    fn extrapolates_at(&self, t: f64) -> bool {
        match self {
            TailFunction::Tabulated { points } => points.lookup(t).1,
            TailFunction::PiecewiseSum { parts } => parts.iter().any(|p| p.extrapolates_at(t)),
            TailFunction::Scaled { factor, inner } => inner.extrapolates_at(t / factor),
            TailFunction::Capped { inner, .. } => inner.extrapolates_at(t),
            _ => false,
        }
    }

    /// `ln |T'(e^v)|`, or an error when the tail carries no derivative
    /// information (tables must go through finite differences instead).
    pub fn ln_abs_derivative_log(&self, v: f64) -> Result<f64> {
        Ok(match self {
            TailFunction::StretchedExpTail { c, m } => (c * m).ln() + (m - 1.0) * v - c * (m * v).exp(),
            TailFunction::LogPowerTail { c, theta } => {
                if v >= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let ln_l = (-v).ln();
                    -theta.ln() + (1.0 / theta - 1.0) * (ln_l - c.ln()) - c.ln() - v
                }
            }
            TailFunction::PiecewiseSum { parts } => {
                let logs = parts
                    .iter()
                    .map(|p| p.ln_abs_derivative_log(v))
                    .collect::<Result<Vec<_>>>()?;
                log_sum_exp(&logs)
            }
            TailFunction::Tabulated { .. } => {
                return Err(Error::Precondition(
                    "tabulated tail has no exponent form; supply an analytic tail".into(),
                ))
            }
            TailFunction::Scaled { factor, inner } => inner.ln_abs_derivative_log(v - factor.ln())? - factor.ln(),
            TailFunction::Capped { cap, inner } => {
                if inner.ln_value_log(v) > cap.ln() {
                    f64::NEG_INFINITY
                } else {
                    inner.ln_abs_derivative_log(v)?
                }
            }
        })
    }

    /// True when the tail (or one of its parts) is tabulated.
    pub fn is_tabulated(&self) -> bool {
        match self {
            TailFunction::Tabulated { .. } => true,
            TailFunction::PiecewiseSum { parts } => parts.iter().any(TailFunction::is_tabulated),
            TailFunction::Scaled { inner, .. } | TailFunction::Capped { inner, .. } => inner.is_tabulated(),
            _ => false,
        }
    }

    /// Smallest `t` with `T = 0` on `[t, ∞)`; `+∞` when the tail never vanishes.
    pub fn support_end(&self) -> f64 {
        match self {
            TailFunction::StretchedExpTail { .. } => f64::INFINITY,
            TailFunction::LogPowerTail { .. } => 1.0,
            TailFunction::PiecewiseSum { parts } => {
                parts.iter().map(TailFunction::support_end).fold(0.0, f64::max)
            }
            TailFunction::Tabulated { points } => {
                let last = points.len() - 1;
                // trailing zero rows do not extend the support
                let mut end = points.nodes()[last];
                for i in (0..last).rev() {
                    if points.values()[i + 1] == 0.0 && points.values()[i] == 0.0 {
                        end = points.nodes()[i];
                    } else {
                        break;
                    }
                }
                end
            }
            TailFunction::Scaled { factor, inner } => factor * inner.support_end(),
            TailFunction::Capped { inner, .. } => inner.support_end(),
        }
    }

    /// Points in `(0, support_end)` where the tail is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let end = self.support_end();
        let mut pts = match self {
            TailFunction::StretchedExpTail { .. } | TailFunction::LogPowerTail { .. } => Vec::new(),
            TailFunction::PiecewiseSum { parts } => parts
                .iter()
                .flat_map(|p| {
                    let mut b = p.breakpoints();
                    b.push(p.support_end());
                    b
                })
                .collect(),
            TailFunction::Tabulated { points } => points.nodes().to_vec(),
            TailFunction::Scaled { factor, inner } => inner.breakpoints().into_iter().map(|b| b * factor).collect(),
            TailFunction::Capped { cap, inner } => {
                let mut b = inner.breakpoints();
                if let Some(x) = inner.crossing(cap.ln()) {
                    b.push(x);
                }
                b
            }
        };
        pts.retain(|&b| b > 0.0 && b < end && b.is_finite());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// The `t` at which the (nonincreasing) tail drops through `e^level`.
    fn crossing(&self, level: f64) -> Option<f64> {
        let end = self.support_end();
        let mut lo = -745.0_f64;
        let mut hi = if end.is_finite() { end.ln() } else { 745.0 };
        if self.ln_value_log(lo) <= level || self.ln_value_log(hi - 1e-12) >= level {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.ln_value_log(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some((0.5 * (lo + hi)).exp())
    }
}
