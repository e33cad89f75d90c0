//! Generating functions ψ(p) of Grand Lebesgue Spaces.

use super::tail::TailFunction;
use crate::error::{domain, Error, Result};
use crate::numerics::{ln_gamma, Extended};

/// Open support `(lower, upper)` with `0 < lower < upper ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower > 0.0 && lower.is_finite() && upper > lower) || upper.is_nan() {
            return domain(format!("support needs 0 < a < b <= inf, got ({lower}, {upper})"));
        }
        Ok(Support { lower, upper })
    }

    /// `(0, ∞)` is not representable with `lower > 0`; the natural functions of
    /// the closed-form families accept every `p > 0`, so this uses the
    /// smallest positive normal float as the lower end.
    pub fn positive_half_line() -> Self {
        Support {
            lower: f64::MIN_POSITIVE,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        p > self.lower && p < self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }
}

/// Nodes `(p_i, ψ_i)` of a tabulated generating function.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    p: Vec<f64>,
    psi: Vec<f64>,
}

impl PsiTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parse("a psi table needs at least two rows".into()));
        }
        for (i, &(p, psi)) in points.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Parse(format!("row {i}: p must be finite and > 0, got {p}")));
            }
            if !(psi > 0.0 && psi.is_finite()) {
                return Err(Error::Parse(format!("row {i}: psi must be finite and > 0, got {psi}")));
            }
            if i > 0 && p <= points[i - 1].0 {
                return Err(Error::Parse(format!("row {i}: p must be strictly increasing")));
            }
        }
        let (p, psi) = points.into_iter().unzip();
        Ok(PsiTable { p, psi })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.p
    }

    pub fn values(&self) -> &[f64] {
        &self.psi
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.p.iter().copied().zip(self.psi.iter().copied())
    }

    /// `ln ψ` interpolated linearly in `ln p`; `None` outside the node range.
    fn ln_psi(&self, p: f64) -> Option<f64> {
        let n = self.p.len();
        if p < self.p[0] || p > self.p[n - 1] {
            return None;
        }
        let i = self.p.partition_point(|&x| x <= p).clamp(1, n - 1);
        let (x0, x1) = (self.p[i - 1].ln(), self.p[i].ln());
        let w = (p.ln() - x0) / (x1 - x0);
        Some(self.psi[i - 1].ln() + w * (self.psi[i].ln() - self.psi[i - 1].ln()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsiKind {
    /// `C₁·p^{1/m}`.
    Power { c1: f64, m: f64 },
    /// `θ^{−1/p}(cp)^{−1/(pθ)}Γ(1/θ)^{1/p}`, the natural function of `exp(−c·x^θ)`.
    NaturalStretchedExp { c: f64, theta: f64 },
    Tabulated(PsiTable),
    /// `p ↦ ‖f‖_p` computed on demand from a tail.
    NumericNatural { tail: TailFunction, tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction {
    support: Support,
    kind: PsiKind,
    /// Constant multiplier applied on top of `kind`.
    factor: f64,
}

impl GeneratingFunction {
    pub fn power(c1: f64, m: f64, support: Support) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite() && m > 0.0 && m.is_finite()) {
            return domain(format!("power psi needs C1 > 0 and m > 0, got C1 = {c1}, m = {m}"));
        }
        Ok(Self::from_parts(support, PsiKind::Power { c1, m }))
    }

    pub fn natural_stretched_exp(c: f64, theta: f64, support: Support) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && theta > 0.0 && theta.is_finite()) {
            return domain(format!("natural psi needs c > 0 and theta > 0, got c = {c}, theta = {theta}"));
        }
        Ok(Self::from_parts(support, PsiKind::NaturalStretchedExp { c, theta }))
    }

    /// Support is the closed node range `[p_first, p_last]`.
    pub fn tabulated(table: PsiTable) -> Self {
        let support = Support {
            lower: table.p[0],
            upper: *table.p.last().unwrap(),
        };
        Self::from_parts(support, PsiKind::Tabulated(table))
    }

    pub fn numeric_natural(tail: TailFunction, support: Support, tol: f64) -> Result<Self> {
        tail.validate()?;
        if !(tol > 0.0) {
            return domain("tolerance must be positive");
        }
        Ok(Self::from_parts(support, PsiKind::NumericNatural { tail, tol }))
    }

    fn from_parts(support: Support, kind: PsiKind) -> Self {
        GeneratingFunction { support, kind, factor: 1.0 }
    }

    /// `c·ψ` for `c > 0`.
    pub fn scaled_by(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("psi multiplier must be > 0, got {c}"));
        }
        let mut out = self.clone();
        out.factor *= c;
        Ok(out)
    }

    /// The same function on another support. Tables keep their node range.
    pub fn with_support(&self, support: Support) -> Self {
        let mut out = self.clone();
        if out.table().is_none() {
            out.support = support;
        }
        out
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn kind(&self) -> &PsiKind {
        &self.kind
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn table(&self) -> Option<&PsiTable> {
        match &self.kind {
            PsiKind::Tabulated(t) => Some(t),
            _ => None,
        }
    }

    /// Membership in the support; tables include their end nodes.
    pub fn in_support(&self, p: f64) -> bool {
        match &self.kind {
            PsiKind::Tabulated(_) => p >= self.support.lower && p <= self.support.upper,
            _ => self.support.contains(p),
        }
    }

    /// `ln ψ(p)`, or `+∞` outside the support.
    pub fn ln_psi(&self, p: f64) -> Result<Extended> {
        Ok(match self.nu(p)? {
            Extended::Finite(v) => Extended::Finite(v / p),
            Extended::PosInfinity => Extended::PosInfinity,
        })
    }

    /// `ν(p) = p·ln ψ(p) = ln ψ(p)^p`, or `+∞` outside the support.
    pub fn nu(&self, p: f64) -> Result<Extended> {
        if !(p > 0.0) || p.is_nan() {
            return domain(format!("psi is defined for p > 0, got {p}"));
        }
        if !self.in_support(p) {
            return Ok(Extended::PosInfinity);
        }
        let base = match &self.kind {
            PsiKind::Power { c1, m } => p * (c1.ln() + p.ln() / m),
            PsiKind::NaturalStretchedExp { c, theta } => -theta.ln() - (c * p).ln() / theta + ln_gamma(1.0 / theta)?,
            PsiKind::Tabulated(t) => match t.ln_psi(p) {
                Some(v) => p * v,
                None => return Ok(Extended::PosInfinity),
            },
            PsiKind::NumericNatural { tail, tol } => crate::moments::ln_moment_from_tail(tail, p, *tol)?,
        };
        Ok(Extended::Finite(base + p * self.factor.ln()))
    }

    /// `ψ(p)`, or `+∞` outside the support.
    pub fn eval(&self, p: f64) -> Result<Extended> {
        Ok(match self.ln_psi(p)? {
            Extended::Finite(v) => Extended::Finite(v.exp()),
            Extended::PosInfinity => Extended::PosInfinity,
        })
    }
}

/// `ψ(p)` or the `+∞` marker outside the support.
pub fn eval_psi(psi: &GeneratingFunction, p: f64) -> Result<Extended> {
    psi.eval(p)
}
