//! Lebesgue–Riesz norms from closed forms, from quadrature over the domain
//! or from the tail via `p·∫ t^{p−1} T(t) dt`. Also natural generating
//! functions.
//!
//! The tail route integrates in `v = ln t`: the integrand `t^p·T(t)` becomes
//! `exp(φ(v))` with `φ(v) = p·v + ln T(e^v)`, shifted by its maximum before
//! quadrature. Moments come back as logarithms, e.g. `ln Γ(1001)`.

use crate::error::{domain, Error, Result};
use crate::model::{tail_of, FunctionSpec, GeneratingFunction, PsiTable, Support, TailFunction};
use crate::numerics::{
    geometric_grid, integrate_with, ln_gamma, log_sum_exp, maximize_1d_with, MaxOptions, QuadOptions, Tolerance,
};

/// Upper end of the natural-ψ grid when the support is unbounded.
pub const NATURAL_GRID_CAP: f64 = 1e3;

/// Default relative tolerance for moment quadrature.
pub const DEFAULT_MOMENT_TOL: f64 = 1e-10;

/// `ln ‖f‖_p^p` from the closed-form family formulas.
pub fn ln_moment_closed(spec: &FunctionSpec, p: f64) -> Result<f64> {
    check_p(p)?;
    spec.validate()?;
    match spec {
        FunctionSpec::StretchedExp { c, theta } => Ok(-theta.ln() - (c * p).ln() / theta + ln_gamma(1.0 / theta)?),
        FunctionSpec::LogSingular => ln_gamma(p + 1.0),
        FunctionSpec::TruncatedExp => Ok(-p.ln()),
        FunctionSpec::DisjointUnion { parts } => {
            let logs = parts.iter().map(|s| ln_moment_closed(s, p)).collect::<Result<Vec<_>>>()?;
            Ok(log_sum_exp(&logs))
        }
        FunctionSpec::Scaled { factor, inner } => Ok(p * factor.ln() + ln_moment_closed(inner, p)?),
        FunctionSpec::Indicator01 { .. } => Err(Error::Unavailable("indicator_01 (incomplete Gamma)".into())),
    }
}

/// Whether [`ln_moment_closed`] has a formula for this spec.
pub fn has_closed_form(spec: &FunctionSpec) -> bool {
    match spec {
        FunctionSpec::StretchedExp { .. } | FunctionSpec::LogSingular | FunctionSpec::TruncatedExp => true,
        FunctionSpec::DisjointUnion { parts } => parts.iter().all(has_closed_form),
        FunctionSpec::Scaled { inner, .. } => has_closed_form(inner),
        FunctionSpec::Indicator01 { .. } => false,
    }
}

/// `‖f‖_p` from the closed form; [`Error::Unavailable`] for families without one.
pub fn lp_norm_closed(spec: &FunctionSpec, p: f64) -> Result<f64> {
    Ok((ln_moment_closed(spec, p)? / p).exp())
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        domain(format!("moment order must be finite and > 0, got {p}"))
    }
}

/// `‖f‖_p^p` by adaptive quadrature of `|f|^p` over the domain, to relative
/// tolerance `tol`. Meant for moderate `p`; large orders overflow `|f|^p`.
pub fn moment_direct(spec: &FunctionSpec, p: f64, tol: f64) -> Result<f64> {
    check_p(p)?;
    spec.validate()?;
    match spec {
        FunctionSpec::DisjointUnion { parts } => parts.iter().map(|s| moment_direct(s, p, tol)).sum(),
        FunctionSpec::Scaled { factor, inner } => Ok(factor.powf(p) * moment_direct(inner, p, tol)?),
        _ => {
            let mut total = 0.0;
            for piece in spec.domain() {
                let g = |x: f64| spec.eval(x).abs().powf(p);
                let mut opts = QuadOptions::new(Tolerance { abs: 0.0, rel: tol });
                if piece.upper.is_infinite() {
                    opts = opts.with_scale(characteristic_scale(&g, piece.lower));
                }
                let r = integrate_with(g, piece.lower, piece.upper, &opts)?;
                if !r.converged {
                    return Err(Error::NonConvergence {
                        estimate: r.value,
                        error: r.abs_error_estimate,
                    });
                }
                total += r.value;
            }
            Ok(total)
        }
    }
}

/// `‖f‖_p` by direct quadrature.
pub fn lp_norm_direct(spec: &FunctionSpec, p: f64, tol: f64) -> Result<f64> {
    Ok(moment_direct(spec, p, tol)?.powf(1.0 / p))
}

/// Offset `x` maximizing `x·g(lower + x)` over a dyadic probe set: the length
/// over which a decaying integrand carries its mass.
fn characteristic_scale(g: &dyn Fn(f64) -> f64, lower: f64) -> f64 {
    let mut best = (1.0, f64::NEG_INFINITY);
    for k in -40..=60 {
        let x = 2f64.powi(k);
        let w = x * g(lower + x);
        if w.is_finite() && w > best.1 {
            best = (x, w);
        }
    }
    best.0
}

/// `ln ‖f‖_p^p = ln(p·∫₀^∞ t^{p−1}T(t)dt)`; `-∞` for an identically zero tail.
pub fn ln_moment_from_tail(tail: &TailFunction, p: f64, tol: f64) -> Result<f64> {
    check_p(p)?;
    tail.validate()?;
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let end = tail.support_end();
    let v_end = if end.is_finite() { end.ln() } else { f64::INFINITY };
    let kinks: Vec<f64> = tail.breakpoints().iter().map(|b| b.ln()).collect();
    let phi = |v: f64| p * v + tail.ln_value_log(v);
    let reach = V_REACH.max(100.0 / p);
    let ln_integral = ln_integral_exp(&phi, &kinks, v_end, reach, tol).map_err(|e| match e {
        Error::Divergent { reason, .. } => Error::Divergent { p, reason },
        other => other,
    })?;
    Ok(p.ln() + ln_integral)
}

/// `‖f‖_p` from the tail.
pub fn lp_norm_from_tail(tail: &TailFunction, p: f64, tol: f64) -> Result<f64> {
    Ok((ln_moment_from_tail(tail, p, tol)? / p).exp())
}

/// How far below the peak `φ` must fall at the ends of the probed range.
const DECAY_MARGIN: f64 = 40.0;
/// Farthest `|v|` probed, at least.
const V_REACH: f64 = 1e6;

/// `ln ∫_{−∞}^{v_end} exp(φ(v)) dv` for a log-density with at most a few
/// maxima. `kinks` are points where `φ` is not smooth; `φ` must have decayed
/// within `|v| ≤ reach`.
pub(crate) fn ln_integral_exp(
    phi: &dyn Fn(f64) -> f64,
    kinks: &[f64],
    v_end: f64,
    reach: f64,
    tol: f64,
) -> Result<f64> {
    let grid = scan_grid(kinks, v_end, reach);
    let mut values = Vec::with_capacity(grid.len());
    for &v in &grid {
        let y = phi(v);
        if y.is_nan() || y == f64::INFINITY {
            return Err(Error::NonFinite { x: v.exp(), value: y });
        }
        values.push(y);
    }
    let (mut i_best, mut peak) = (0, f64::NEG_INFINITY);
    for (i, &y) in values.iter().enumerate() {
        if y > peak {
            i_best = i;
            peak = y;
        }
    }
    if peak == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if values[0] > peak - DECAY_MARGIN {
        return Err(Error::Divergent {
            p: f64::NAN,
            reason: "integrand does not decay as t -> 0+".into(),
        });
    }
    if v_end.is_infinite() && values[values.len() - 1] > peak - DECAY_MARGIN {
        return Err(Error::Divergent {
            p: f64::NAN,
            reason: "integrand does not decay as t -> inf".into(),
        });
    }

    // refine the global peak inside its scan cell
    let (lo, hi) = (grid[i_best.saturating_sub(1)], grid[(i_best + 1).min(grid.len() - 1)]);
    let mut v_peak = grid[i_best];
    if hi > lo {
        let mut opts = MaxOptions::new(1e-12 * (1.0 + v_peak.abs()));
        opts.scan_points = 9;
        opts.boundary_offset = 0.0;
        if let Ok(r) = maximize_1d_with(|v| phi(v), lo, hi, &opts) {
            if let Some(y) = r.max_value.finite() {
                if y > peak {
                    peak = y;
                    v_peak = r.argmax;
                }
            }
        }
    }

    // split at kinks and at every significant local maximum
    let mut cuts: Vec<f64> = kinks.iter().copied().filter(|&k| k < v_end).collect();
    cuts.push(v_peak);
    for i in 1..grid.len().saturating_sub(1) {
        if values[i] >= values[i - 1] && values[i] >= values[i + 1] && values[i] > peak - DECAY_MARGIN {
            cuts.push(grid[i]);
        }
    }
    cuts.retain(|c| c.is_finite() && *c < v_end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));

    let shifted = |v: f64| {
        let y = phi(v);
        if y == f64::NEG_INFINITY {
            0.0
        } else {
            (y - peak).exp()
        }
    };
    let width = drop_width(phi, v_peak, peak, -1.0, f64::NEG_INFINITY) + drop_width(phi, v_peak, peak, 1.0, v_end);
    let tolerance = Tolerance {
        abs: 1e-2 * tol * width,
        rel: tol,
    };

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(f64::NEG_INFINITY);
    edges.extend(cuts);
    edges.push(v_end);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut converged = true;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let mut opts = QuadOptions::new(tolerance);
        if a.is_infinite() {
            let y = phi(b);
            opts = opts.with_scale(drop_width(phi, b, y, -1.0, f64::NEG_INFINITY));
        } else if b.is_infinite() {
            let y = phi(a);
            opts = opts.with_scale(drop_width(phi, a, y, 1.0, f64::INFINITY));
        } else {
            opts = opts.with_pieces(4);
        }
        let r = integrate_with(shifted, a, b, &opts)?;
        total += r.value;
        total_err += r.abs_error_estimate;
        converged &= r.converged;
    }
    if !converged && total_err > tol * total.abs().max(1e-2 * width) {
        return Err(Error::NonConvergence {
            estimate: peak + total.ln(),
            error: total_err / total.max(f64::MIN_POSITIVE),
        });
    }
    Ok(peak + total.ln())
}

/// Scan abscissae in `v`: a fine uniform core, geometric wings out to
/// `±reach`, and points closing in on every kink and on the upper end.
fn scan_grid(kinks: &[f64], v_end: f64, reach: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let core = 40.0;
    let step = 0.05;
    let n = (2.0 * core / step) as usize;
    for i in 0..=n {
        grid.push(-core + step * i as f64);
    }
    let mut x = core;
    while x < reach {
        x *= 1.05;
        grid.push(-x.min(reach));
        grid.push(x.min(reach));
    }
    for &k in kinks.iter().chain(std::iter::once(&v_end)) {
        if !k.is_finite() {
            continue;
        }
        for j in 1..=14 {
            let d = 10f64.powi(-j) * (1.0 + k.abs());
            grid.push(k - d);
            grid.push(k + d);
        }
    }
    grid.retain(|&v| v < v_end);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Distance from `v0` (in direction `dir`) at which `φ` has dropped by one
/// unit below `level`, bounded by `limit`.
fn drop_width(phi: &dyn Fn(f64) -> f64, v0: f64, level: f64, dir: f64, limit: f64) -> f64 {
    let room = (limit - v0).abs();
    let dropped = |d: f64| phi(v0 + dir * d) < level - 1.0;
    let mut d = 1.0_f64.min(0.5 * room);
    if !(d > 0.0) {
        return 1e-12;
    }
    if dropped(d) {
        for _ in 0..200 {
            if !dropped(d * 0.5) || d < 1e-14 * (1.0 + v0.abs()) {
                break;
            }
            d *= 0.5;
        }
    } else {
        for _ in 0..60 {
            if 2.0 * d >= room || dropped(2.0 * d) {
                break;
            }
            d *= 2.0;
        }
    }
    d.max(1e-14 * (1.0 + v0.abs()))
}

/// Where a natural generating function comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum NaturalSource {
    Spec(FunctionSpec),
    Tail(TailFunction),
}

/// The natural generating function `p ↦ ‖f‖_p` on `support`.
///
/// `exp(−c·x^θ)` yields its closed form. Every other source is tabulated on a
/// geometric grid of `grid_size` nodes spanning `[a, min(b, 10³)]` (end nodes
/// included), each node computed from the tail.
pub fn natural_psi(source: &NaturalSource, support: Support, grid_size: usize, tol: f64) -> Result<GeneratingFunction> {
    if let NaturalSource::Spec(FunctionSpec::StretchedExp { c, theta }) = source {
        return GeneratingFunction::natural_stretched_exp(*c, *theta, support);
    }
    if grid_size < 2 {
        return domain(format!("natural psi grid needs at least 2 points, got {grid_size}"));
    }
    let tail = match source {
        NaturalSource::Spec(spec) => tail_of(spec)?,
        NaturalSource::Tail(t) => {
            t.validate()?;
            t.clone()
        }
    };
    let upper = support.upper.min(NATURAL_GRID_CAP);
    if support.lower >= upper {
        return domain(format!(
            "support lower end {} must lie below the grid cap {upper}",
            support.lower
        ));
    }
    let mut rows = Vec::with_capacity(grid_size);
    for p in geometric_grid(support.lower, upper, grid_size) {
        let ln_m = ln_moment_from_tail(&tail, p, tol)?;
        if ln_m == f64::NEG_INFINITY {
            return Err(Error::Degenerate(format!(
                "norm of order p = {p} is zero; the natural function needs a non-zero function"
            )));
        }
        rows.push((p, (ln_m / p).exp()));
    }
    Ok(GeneratingFunction::tabulated(PsiTable::new(rows)?))
}
