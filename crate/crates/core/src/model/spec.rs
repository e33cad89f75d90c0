//! Measurable functions on real intervals with Lebesgue measure.

use serde::{Deserialize, Serialize};

use super::tail::TailFunction;
use crate::error::{domain, Error, Result};

/// An open interval `(lower, upper)`; `upper` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Interval { lower, upper }
    }

    pub fn measure(&self) -> f64 {
        self.upper - self.lower
    }

    fn overlaps(&self, other: &Interval) -> bool {
        self.lower.max(other.lower) < self.upper.min(other.upper)
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lower = self.lower.max(other.lower);
        let upper = self.upper.min(other.upper);
        (lower < upper).then_some(Interval { lower, upper })
    }
}

/// A closed-form function family or a combination of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `exp(−c·x^θ)` on `(0, ∞)`.
    StretchedExp { c: f64, theta: f64 },
    /// `|ln|x||` on `(−1, 0)`.
    LogSingular,
    /// `e^{−y}` on `(0, ∞)`.
    TruncatedExp,
    /// `h₀(x)·1[x ∈ (0,1)]`.
    #[serde(rename = "indicator_01")]
    Indicator01 { inner: Box<FunctionSpec> },
    /// Sum of functions with pairwise-disjoint domains.
    DisjointUnion { parts: Vec<FunctionSpec> },
    /// `λ·f` for `λ > 0`.
    Scaled { factor: f64, inner: Box<FunctionSpec> },
}

const UNIT: Interval = Interval { lower: 0.0, upper: 1.0 };

impl FunctionSpec {
    pub fn stretched_exp(c: f64, theta: f64) -> Result<Self> {
        let spec = FunctionSpec::StretchedExp { c, theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn indicator(inner: FunctionSpec) -> Result<Self> {
        let spec = FunctionSpec::Indicator01 { inner: Box::new(inner) };
        spec.validate()?;
        Ok(spec)
    }

    /// Fails when two parts share domain.
    pub fn disjoint_union(parts: Vec<FunctionSpec>) -> Result<Self> {
        let spec = FunctionSpec::DisjointUnion { parts };
        spec.validate()?;
        Ok(spec)
    }

    pub fn scaled(factor: f64, inner: FunctionSpec) -> Result<Self> {
        let spec = FunctionSpec::Scaled {
            factor,
            inner: Box::new(inner),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::StretchedExp { c, theta } => {
                if !(*c > 0.0 && c.is_finite() && *theta > 0.0 && theta.is_finite()) {
                    return domain(format!("stretched_exp needs c > 0 and theta > 0, got c = {c}, theta = {theta}"));
                }
                Ok(())
            }
            FunctionSpec::LogSingular | FunctionSpec::TruncatedExp => Ok(()),
            FunctionSpec::Indicator01 { inner } => inner.validate(),
            FunctionSpec::DisjointUnion { parts } => {
                if parts.is_empty() {
                    return domain("disjoint_union needs at least one part");
                }
                parts.iter().try_for_each(FunctionSpec::validate)?;
                let domains: Vec<Vec<Interval>> = parts.iter().map(FunctionSpec::domain).collect();
                for i in 0..domains.len() {
                    for j in (i + 1)..domains.len() {
                        let clash = domains[i].iter().any(|a| domains[j].iter().any(|b| a.overlaps(b)));
                        if clash {
                            return domain(format!("disjoint_union parts {i} and {j} have overlapping domains"));
                        }
                    }
                }
                Ok(())
            }
            FunctionSpec::Scaled { factor, inner } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return domain(format!("scale factor must be > 0, got {factor}"));
                }
                inner.validate()
            }
        }
    }

    /// Domain as a list of disjoint open intervals (possibly empty).
    pub fn domain(&self) -> Vec<Interval> {
        match self {
            FunctionSpec::StretchedExp { .. } | FunctionSpec::TruncatedExp => vec![Interval::new(0.0, f64::INFINITY)],
            FunctionSpec::LogSingular => vec![Interval::new(-1.0, 0.0)],
            FunctionSpec::Indicator01 { inner } => inner.domain().iter().filter_map(|d| d.intersect(&UNIT)).collect(),
            FunctionSpec::DisjointUnion { parts } => parts.iter().flat_map(FunctionSpec::domain).collect(),
            FunctionSpec::Scaled { inner, .. } => inner.domain(),
        }
    }

    /// `f(x)`; zero outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        let inside = |d: &[Interval]| d.iter().any(|i| x > i.lower && x < i.upper);
        match self {
            FunctionSpec::StretchedExp { c, theta } => {
                if x > 0.0 {
                    (-c * x.powf(*theta)).exp()
                } else {
                    0.0
                }
            }
            FunctionSpec::LogSingular => {
                if x > -1.0 && x < 0.0 {
                    x.abs().ln().abs()
                } else {
                    0.0
                }
            }
            FunctionSpec::TruncatedExp => {
                if x > 0.0 {
                    (-x).exp()
                } else {
                    0.0
                }
            }
            FunctionSpec::Indicator01 { inner } => {
                if x > 0.0 && x < 1.0 {
                    inner.eval(x)
                } else {
                    0.0
                }
            }
            FunctionSpec::DisjointUnion { parts } => parts
                .iter()
                .find(|p| inside(&p.domain()))
                .map_or(0.0, |p| p.eval(x)),
            FunctionSpec::Scaled { factor, inner } => factor * inner.eval(x),
        }
    }

    /// True for functions on `(0, ∞)` that decrease away from the origin, so
    /// that `{f > t}` is an interval `(0, x_t)`.
    fn decreasing_from_origin(&self) -> bool {
        match self {
            FunctionSpec::StretchedExp { .. } | FunctionSpec::TruncatedExp => true,
            FunctionSpec::Indicator01 { inner } | FunctionSpec::Scaled { inner, .. } => inner.decreasing_from_origin(),
            FunctionSpec::LogSingular | FunctionSpec::DisjointUnion { .. } => false,
        }
    }
}

/// Exact tail function of a spec.
pub fn tail_of(spec: &FunctionSpec) -> Result<TailFunction> {
    spec.validate()?;
    Ok(match spec {
        FunctionSpec::StretchedExp { c, theta } => TailFunction::LogPowerTail { c: *c, theta: *theta },
        FunctionSpec::LogSingular => TailFunction::StretchedExpTail { c: 1.0, m: 1.0 },
        FunctionSpec::TruncatedExp => TailFunction::LogPowerTail { c: 1.0, theta: 1.0 },
        FunctionSpec::Indicator01 { inner } => {
            if !inner.decreasing_from_origin() {
                return Err(Error::Unsupported(
                    "indicator_01 needs an inner function on (0, inf) decreasing from the origin".into(),
                ));
            }
            TailFunction::Capped {
                cap: 1.0,
                inner: Box::new(tail_of(inner)?),
            }
        }
        FunctionSpec::DisjointUnion { parts } => TailFunction::PiecewiseSum {
            parts: parts.iter().map(tail_of).collect::<Result<_>>()?,
        },
        FunctionSpec::Scaled { factor, inner } => TailFunction::Scaled {
            factor: *factor,
            inner: Box::new(tail_of(inner)?),
        },
    })
}
