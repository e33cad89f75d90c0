//! Young–Orlicz functions `N = 1/T`, the integrability condition
//! `∫ |dT(t)|/T(t/k) < ∞`, and Orlicz modulars `∫ N(t/K)|dT_f(t)|`.
//!
//! Stieltjes integrals against `|dT|` are evaluated over growing truncations
//! `[ε_j, M_j]` with `ε_j = 10^{−2^j}` and `M_j = 10^{2^j}`, `j = 1..8`; the
//! sequence of partial values decides convergence.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{TailFunction, TailTable};
use crate::numerics::{integrate_with, Extended, QuadOptions, Tolerance};

/// Partial integrals above this count as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;
/// Number of truncation levels.
pub const TRUNCATIONS: usize = 8;
/// Doublings tried by [`find_finite_scale`].
pub const MAX_DOUBLINGS: usize = 20;

/// `N(u) = 1/T(u)` for `u ≥ 1` and `u²/T(1)` below.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczFunction {
    source: TailFunction,
    ln_t1: f64,
}

impl OrliczFunction {
    pub fn source(&self) -> &TailFunction {
        &self.source
    }

    /// `ln N(u)` for `u ≥ 0`.
    pub fn ln_eval(&self, u: f64) -> f64 {
        if u >= 1.0 {
            -self.source.ln_value(u)
        } else {
            2.0 * u.ln() - self.ln_t1
        }
    }

    /// `N(u)`; `+∞` past the point where the tail vanishes.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return domain(format!("Orlicz function is defined for u >= 0, got {u}"));
        }
        Ok(self.ln_eval(u).exp())
    }
}

/// The Young–Orlicz function of a tail; fails when `T(1) = 0`.
pub fn young_orlicz_from_tail(tail: &TailFunction) -> Result<OrliczFunction> {
    tail.validate()?;
    let ln_t1 = tail.ln_value(1.0);
    if ln_t1 == f64::NEG_INFINITY {
        return Err(Error::Precondition(
            "T(1) = 0: the function is bounded by 1 and 1/T is undefined on [1, inf)".into(),
        ));
    }
    Ok(OrliczFunction {
        source: tail.clone(),
        ln_t1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Convergent,
    Divergent,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialValue {
    pub epsilon: f64,
    pub upper: f64,
    #[serde(serialize_with = "serialize_value")]
    pub value: f64,
}

fn serialize_value<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *v == f64::INFINITY {
        Extended::PosInfinity.serialize(s)
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub verdict: Verdict,
    pub k: f64,
    pub partial_values: Vec<PartialValue>,
}

/// Classify `∫₀^∞ |dT(t)|/T(t/k)` for `k > 1`.
pub fn condition_check(tail: &TailFunction, k: f64, tol: f64) -> Result<ConditionVerdict> {
    if !(k > 1.0 && k.is_finite()) {
        return domain(format!("k must be finite and > 1, got {k}"));
    }
    check_tol(tol)?;
    tail.validate()?;
    let ln_k = k.ln();
    let weight = |v: f64| -tail.ln_value_log(v - ln_k);
    let mut kinks = vec![0.0];
    for b in tail.breakpoints().into_iter().chain([tail.support_end()]) {
        kinks.push(b.ln());
        kinks.push(b.ln() + ln_k);
    }
    let (verdict, partial_values) = stieltjes(tail, &weight, &kinks, tol)?;
    Ok(ConditionVerdict {
        verdict,
        k,
        partial_values,
    })
}

/// `∫₀^∞ N(t/K)|dT_f(t)|`; `+∞` when the truncations diverge.
pub fn orlicz_modular(tail_f: &TailFunction, n: &OrliczFunction, k: f64, tol: f64) -> Result<Extended> {
    if !(k > 0.0 && k.is_finite()) {
        return domain(format!("scale K must be finite and > 0, got {k}"));
    }
    check_tol(tol)?;
    tail_f.validate()?;
    let ln_k = k.ln();
    let weight = |v: f64| n.ln_eval((v - ln_k).exp());
    let mut kinks = vec![0.0, ln_k];
    for b in tail_f.breakpoints().into_iter().chain([tail_f.support_end()]) {
        kinks.push(b.ln());
    }
    for b in n.source().breakpoints().into_iter().chain([n.source().support_end()]) {
        kinks.push(b.ln() + ln_k);
    }
    let (verdict, partials) = stieltjes(tail_f, &weight, &kinks, tol)?;
    let last = partials.last().map_or(0.0, |p| p.value);
    match verdict {
        Verdict::Convergent => Ok(Extended::Finite(last)),
        Verdict::Divergent => Ok(Extended::PosInfinity),
        Verdict::Indeterminate => Err(Error::NonConvergence {
            estimate: last,
            error: partials.len().checked_sub(2).map_or(last, |i| last - partials[i].value),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteScale {
    pub k: f64,
    pub modular: f64,
}

/// A scale `K > k_hint` with finite modular, searched by doubling from
/// `2·k_hint`. The condition must hold for `N`'s own tail at `k_hint`.
pub fn find_finite_scale(tail_f: &TailFunction, n: &OrliczFunction, k_hint: f64, tol: f64) -> Result<FiniteScale> {
    let check = condition_check(n.source(), k_hint, tol)?;
    if check.verdict != Verdict::Convergent {
        return Err(Error::Precondition(format!(
            "the integrability condition is {:?} at k = {k_hint}, not Convergent",
            check.verdict
        )));
    }
    let mut k = 2.0 * k_hint;
    for _ in 0..=MAX_DOUBLINGS {
        match orlicz_modular(tail_f, n, k, tol) {
            Ok(Extended::Finite(modular)) => return Ok(FiniteScale { k, modular }),
            Ok(Extended::PosInfinity) | Err(Error::NonConvergence { .. }) => {}
            Err(e) => return Err(e),
        }
        k *= 2.0;
    }
    Err(Error::Inconsistent(format!(
        "condition is Convergent at k = {k_hint} but no finite modular up to K = {}",
        k / 2.0
    )))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        domain(format!("tolerance must lie in (0, 1), got {tol}"))
    }
}

/// `ln` of the largest integrand value handled before overflow is assumed.
const LN_OVERFLOW: f64 = 690.0;

/// Truncated values of `∫ exp(weight(ln t)) |dT(t)|` and their verdict.
fn stieltjes(
    tail: &TailFunction,
    weight: &dyn Fn(f64) -> f64,
    kinks: &[f64],
    tol: f64,
) -> Result<(Verdict, Vec<PartialValue>)> {
    let mut kinks: Vec<f64> = kinks.iter().copied().filter(|k| k.is_finite()).collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let table = match tail {
        TailFunction::Tabulated { points } => Some(points),
        _ => None,
    };

    let mut partials: Vec<PartialValue> = Vec::with_capacity(TRUNCATIONS);
    let mut total = 0.0_f64;
    let mut prev = (1.0_f64, 1.0_f64);
    let mut clean = true;
    for j in 1..=TRUNCATIONS {
        let decades = f64::from(1u32 << j);
        let (eps, upper) = (10f64.powf(-decades), 10f64.powf(decades));
        let pieces = [(eps, prev.0), (prev.1, upper)];
        for (a, b) in pieces {
            let piece = match table {
                Some(points) => Some((difference_sum(points, weight, a, b), true)),
                None => smooth_piece(tail, weight, &kinks, a.ln(), b.ln(), tol * (1.0 + total.abs()))?,
            };
            match piece {
                Some((v, ok)) => {
                    total += v;
                    clean &= ok;
                }
                None => total = f64::INFINITY,
            }
        }
        partials.push(PartialValue {
            epsilon: eps,
            upper,
            value: total,
        });
        if !(total <= DIVERGENCE_THRESHOLD) {
            return Ok((Verdict::Divergent, partials));
        }
        prev = (eps, upper);
    }
    Ok((classify(&partials, tol, clean), partials))
}

fn classify(partials: &[PartialValue], tol: f64, clean: bool) -> Verdict {
    let values: Vec<f64> = partials.iter().map(|p| p.value).collect();
    let n = values.len();
    let inc: Vec<f64> = (0..n).map(|i| values[i] - if i == 0 { 0.0 } else { values[i - 1] }).collect();
    let last = values[n - 1];
    let significant = |d: f64| d > tol * (1.0 + last.abs());
    let steady = (n - 3..n).all(|i| significant(inc[i]) && inc[i] >= 0.9 * inc[i - 1]);
    let doubled = significant(inc[n - 1]) && values[n - 1] >= 2.0 * values[n - 4];
    if steady || doubled {
        Verdict::Divergent
    } else if !significant(inc[n - 1].abs()) && clean {
        Verdict::Convergent
    } else {
        Verdict::Indeterminate
    }
}

/// `∫_{va}^{vb} exp(weight(v) + ln|T'(e^v)| + v) dv`. `None` signals
/// overflow, `Some((value, converged))` otherwise.
fn smooth_piece(
    tail: &TailFunction,
    weight: &dyn Fn(f64) -> f64,
    kinks: &[f64],
    va: f64,
    vb: f64,
    abs_tol: f64,
) -> Result<Option<(f64, bool)>> {
    let end = tail.support_end().ln();
    let vb = vb.min(end);
    if !(vb > va) {
        return Ok(Some((0.0, true)));
    }
    let log_integrand = |v: f64| -> Result<f64> {
        let d = tail.ln_abs_derivative_log(v)?;
        if d == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(weight(v) + d + v)
    };

    let mut edges = vec![va];
    edges.extend(kinks.iter().copied().filter(|&k| k > va && k < vb));
    edges.push(vb);
    let mut total = 0.0;
    let mut converged = true;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = ((b - a) * 2.0).ceil().clamp(4.0, 600.0) as usize;
        // overflow probe on the scan the quadrature would start from
        for i in 0..=4 * pieces {
            let v = a + (b - a) * i as f64 / (4 * pieces) as f64;
            let l = log_integrand(v)?;
            if l.is_nan() || l > LN_OVERFLOW {
                return Ok(None);
            }
        }
        let f = |v: f64| match log_integrand(v) {
            Ok(l) if l == f64::NEG_INFINITY => 0.0,
            Ok(l) => l.min(LN_OVERFLOW).exp(),
            Err(_) => f64::NAN,
        };
        let opts = QuadOptions::new(Tolerance {
            abs: 1e-3 * abs_tol,
            rel: 1e-12,
        })
        .with_pieces(pieces);
        let r = integrate_with(f, a, b, &opts)?;
        total += r.value;
        converged &= r.converged;
    }
    Ok(Some((total, converged)))
}

/// First-order Stieltjes sum `Σ exp(weight)·|ΔT|` of a tabulated tail over
/// `[a, b)`, with the weight taken at the geometric midpoint of each cell.
/// The drop to zero after the last row is an atom at that row.
fn difference_sum(points: &TailTable, weight: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let nodes = points.nodes();
    let last = *nodes.last().expect("tables are non-empty");
    let mut cuts = vec![a];
    cuts.extend(nodes.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1].min(last));
        if x1 <= x0 {
            continue;
        }
        let drop = points.lookup(x0).0 - points.lookup(x1).0;
        if drop > 0.0 {
            total += weight((x0 * x1).sqrt().ln()).exp() * drop;
        }
    }
    let jump = points.values().last().copied().unwrap_or(0.0);
    if jump > 0.0 && last >= a && last < b {
        total += weight(last.ln()).exp() * jump;
    }
    total
}
