//! Maximization of a scalar function over an open interval `(a, b)`,
//! `b` possibly infinite.
//!
//! The objective need not be unimodal: a coarse scan (geometric when the
//! interval spans more than a decade of positive values) locates the best
//! cell, golden-section search refines it and a final three-point parabola
//! polishes the argmax. On an unbounded interval a best value at the end of
//! the scan triggers geometric expansion up to [`SEARCH_CAP`].

use super::Extended;
use crate::error::{domain, Error, Result};

/// Largest abscissa visited when the interval is unbounded.
pub const SEARCH_CAP: f64 = 1e6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy)]
pub struct MaxOptions {
    /// Target width of the final bracket around the argmax.
    pub tol: f64,
    pub scan_points: usize,
    pub cap: f64,
    /// Finite open endpoints are probed at `a + offset·(b−a)` and `b − offset·(b−a)`.
    pub boundary_offset: f64,
}

impl MaxOptions {
    pub fn new(tol: f64) -> Self {
        MaxOptions {
            tol,
            scan_points: 512,
            cap: SEARCH_CAP,
            boundary_offset: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxResult {
    pub argmax: f64,
    pub max_value: Extended,
    /// False when the supremum sits at an open endpoint or at infinity.
    pub attained_interior: bool,
}

/// Maximize an infallible objective over `(lower, upper)`.
pub fn maximize_1d<F>(h: F, lower: f64, upper: f64, tol: f64) -> Result<MaxResult>
where
    F: Fn(f64) -> f64,
{
    try_maximize_1d(|x| Ok(h(x)), lower, upper, &MaxOptions::new(tol))
}

pub fn maximize_1d_with<F>(h: F, lower: f64, upper: f64, opts: &MaxOptions) -> Result<MaxResult>
where
    F: Fn(f64) -> f64,
{
    try_maximize_1d(|x| Ok(h(x)), lower, upper, opts)
}

fn noise(v: f64) -> f64 {
    1e-12 * (1.0 + v.abs())
}

fn checked<F>(h: &F, x: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let v = h(x)?;
    if v.is_nan() {
        return Err(Error::NonFinite { x, value: v });
    }
    Ok(v)
}

/// Maximize a fallible objective. `-∞` values mark excluded points; `+∞`
/// anywhere short-circuits to an infinite supremum.
pub fn try_maximize_1d<F>(h: F, lower: f64, upper: f64, opts: &MaxOptions) -> Result<MaxResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !lower.is_finite() || upper.is_nan() || upper <= lower {
        return domain(format!("empty or invalid search interval ({lower}, {upper})"));
    }
    if !(opts.tol > 0.0) || opts.scan_points < 3 {
        return domain("maximize_1d needs tol > 0 and at least 3 scan points");
    }
    let unbounded = upper == f64::INFINITY;
    let (lo, hi) = if unbounded {
        let lo = lower + opts.boundary_offset * lower.abs().max(1.0);
        let hi = (1e3 * lower.abs().max(1.0)).min(opts.cap);
        if hi <= lo {
            return domain(format!("search interval starts beyond the cap {}", opts.cap));
        }
        (lo, hi)
    } else {
        let eps = opts.boundary_offset * (upper - lower);
        (lower + eps, upper - eps)
    };
    let log_scale = lo > 0.0 && hi / lo >= 10.0;
    let grid = if log_scale {
        super::geometric_grid(lo, hi, opts.scan_points)
    } else {
        super::linear_grid(lo, hi, opts.scan_points)
    };

    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid {
        let v = checked(&h, x)?;
        if v == f64::INFINITY {
            return Ok(MaxResult {
                argmax: x,
                max_value: Extended::PosInfinity,
                attained_interior: true,
            });
        }
        values.push(v);
    }
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    if values[best] == f64::NEG_INFINITY {
        return domain("objective is -inf at every scan point");
    }

    let last = grid.len() - 1;
    if unbounded && best == last {
        return expand_upward(&h, &grid, &values, opts, log_scale);
    }

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(last)];
    let (x, v) = refine(&h, a, b, (grid[best], values[best]), log_scale, opts.tol)?;
    let near = |edge: f64| (x - edge).abs() <= (10.0 * opts.tol).max(1e-12 * x.abs());
    let at_lower = best == 0 && near(lo);
    let at_upper = !unbounded && best == last && near(hi);
    Ok(MaxResult {
        argmax: x,
        max_value: Extended::Finite(v),
        attained_interior: !(at_lower || at_upper),
    })
}

fn expand_upward<F>(h: &F, grid: &[f64], values: &[f64], opts: &MaxOptions, log_scale: bool) -> Result<MaxResult>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = grid.len();
    let mut xs = vec![grid[n - 2], grid[n - 1]];
    let mut vs = vec![values[n - 2], values[n - 1]];
    loop {
        let prev = *xs.last().unwrap();
        if prev >= opts.cap {
            break;
        }
        let x = (2.0 * prev).min(opts.cap);
        let v = checked(h, x)?;
        if v == f64::INFINITY {
            return Ok(MaxResult {
                argmax: x,
                max_value: Extended::PosInfinity,
                attained_interior: true,
            });
        }
        let best = *vs.last().unwrap();
        xs.push(x);
        vs.push(v);
        if v <= best + noise(best) {
            // the maximum is bracketed by the last three probes
            let k = xs.len();
            let (x, v) = refine(h, xs[k - 3], xs[k - 1], (xs[k - 2], vs[k - 2]), log_scale, opts.tol)?;
            return Ok(MaxResult {
                argmax: x,
                max_value: Extended::Finite(v),
                attained_interior: true,
            });
        }
    }

    // still increasing at the cap: extrapolate a geometrically converging
    // sequence of increments, otherwise report +∞
    let k = vs.len();
    let argmax = xs[k - 1];
    if k >= 5 {
        let d: Vec<f64> = vs.windows(2).map(|w| w[1] - w[0]).collect();
        let m = d.len();
        let ratios = [d[m - 3] / d[m - 4], d[m - 2] / d[m - 3], d[m - 1] / d[m - 2]];
        if ratios.iter().all(|r| r.is_finite() && *r > 0.0 && *r < 0.8) {
            let r = ratios[2];
            let limit = vs[k - 1] + d[m - 1] * r / (1.0 - r);
            return Ok(MaxResult {
                argmax,
                max_value: Extended::Finite(limit),
                attained_interior: false,
            });
        }
    }
    Ok(MaxResult {
        argmax,
        max_value: Extended::PosInfinity,
        attained_interior: false,
    })
}

/// Golden-section search on `[a, b]` (in `ln x` when `log_scale`) followed
/// by a parabolic polish; never returns a point worse than `start`.
fn refine<F>(h: &F, a: f64, b: f64, start: (f64, f64), log_scale: bool, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let to_x = |y: f64| if log_scale { y.exp() } else { y };
    let (mut ya, mut yb) = if log_scale { (a.ln(), b.ln()) } else { (a, b) };
    let mut best = start;
    let mut yc = yb - INV_PHI * (yb - ya);
    let mut yd = ya + INV_PHI * (yb - ya);
    let mut fc = checked(h, to_x(yc))?;
    let mut fd = checked(h, to_x(yd))?;
    for _ in 0..300 {
        let width = (to_x(yb) - to_x(ya)).abs();
        let scale = to_x(ya).abs().max(to_x(yb).abs());
        if width <= tol.max(4.0 * f64::EPSILON * scale) {
            break;
        }
        if fc >= fd {
            yb = yd;
            yd = yc;
            fd = fc;
            yc = yb - INV_PHI * (yb - ya);
            fc = checked(h, to_x(yc))?;
        } else {
            ya = yc;
            yc = yd;
            fc = fd;
            yd = ya + INV_PHI * (yb - ya);
            fd = checked(h, to_x(yd))?;
        }
    }
    for (x, v) in [(to_x(yc), fc), (to_x(yd), fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }

    // parabolic polish through (x−s, x, x+s)
    let (x0, v0) = best;
    let s = 1e-4 * (b - a);
    if s > 0.0 && x0 - s >= a && x0 + s <= b {
        let vm = checked(h, x0 - s)?;
        let vp = checked(h, x0 + s)?;
        let curvature = vp - 2.0 * v0 + vm;
        if curvature < 0.0 && vm.is_finite() && vp.is_finite() {
            let xv = x0 - 0.5 * s * (vp - vm) / curvature;
            if xv > x0 - s && xv < x0 + s {
                let vv = checked(h, xv)?;
                if vv > best.1 {
                    best = (xv, vv);
                }
            }
        }
    }
    Ok(best)
}
