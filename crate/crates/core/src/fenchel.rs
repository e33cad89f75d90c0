//! `ν(p) = p·ln ψ(p)` and its regional Young–Fenchel conjugate
//! `ν*(u) = sup_{p ∈ supp ψ} (p·u − ν(p))`.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{GeneratingFunction, PsiKind, PsiTable};
use crate::numerics::{ln_gamma, try_maximize_1d, Extended, MaxOptions, MaxResult};

/// Where the supremum defining `ν*(u)` is reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "p", rename_all = "snake_case")]
pub enum Argmax {
    Interior(f64),
    /// Approached at a finite end of the support.
    Boundary(f64),
    /// Approached as `p → ∞`.
    Infinity,
}

impl Argmax {
    pub fn p(&self) -> Option<f64> {
        match *self {
            Argmax::Interior(p) | Argmax::Boundary(p) => Some(p),
            Argmax::Infinity => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugateResult {
    pub u: f64,
    pub value: Extended,
    pub argmax: Argmax,
    pub method: Method,
}

/// `ν(p) = p·ln ψ(p)`; a domain error outside the support.
pub fn nu(psi: &GeneratingFunction, p: f64) -> Result<f64> {
    match psi.nu(p)? {
        Extended::Finite(v) => Ok(v),
        Extended::PosInfinity => domain(format!("p = {p} lies outside the support of psi")),
    }
}

/// `ν*(u)`, in closed form for power and natural stretched-exponential ψ,
/// by node maximization for tables, and numerically otherwise.
pub fn fenchel_conjugate(psi: &GeneratingFunction, u: f64, tol: f64) -> Result<ConjugateResult> {
    if !u.is_finite() {
        return domain(format!("conjugate argument must be finite, got {u}"));
    }
    let support = psi.support();
    let shifted = u - psi.factor().ln();
    let (value, argmax, method) = match psi.kind() {
        PsiKind::Power { c1, m } => {
            // concave objective p·(u − ln C₁) − (p/m)·ln p
            let w = shifted - c1.ln();
            let objective = |p: f64| p * w - p * p.ln() / m;
            let p_star = (m * w - 1.0).exp();
            let (value, argmax) = clamp_concave(objective, p_star, support.lower, support.upper);
            (Extended::Finite(value), argmax, Method::ClosedForm)
        }
        PsiKind::NaturalStretchedExp { c, theta } => {
            let k = theta.ln() + c.ln() / theta - ln_gamma(1.0 / theta)?;
            let objective = |p: f64| p * shifted + p.ln() / theta + k;
            if shifted >= 0.0 {
                if support.upper.is_infinite() {
                    (Extended::PosInfinity, Argmax::Infinity, Method::ClosedForm)
                } else {
                    let b = support.upper;
                    (Extended::Finite(objective(b)), Argmax::Boundary(b), Method::ClosedForm)
                }
            } else {
                let p_star = -1.0 / (theta * shifted);
                let (value, argmax) = clamp_concave(objective, p_star, support.lower, support.upper);
                (Extended::Finite(value), argmax, Method::ClosedForm)
            }
        }
        PsiKind::Tabulated(table) => {
            let (value, argmax) = conjugate_on_nodes(psi, table, u)?;
            (Extended::Finite(value), argmax, Method::Numeric)
        }
        PsiKind::NumericNatural { .. } => return fenchel_conjugate_numeric(psi, u, tol),
    };
    Ok(ConjugateResult { u, value, argmax, method })
}

/// Objective value of a concave function at its stationary point `p_star`,
/// clamped to `[lower, upper]`.
fn clamp_concave(objective: impl Fn(f64) -> f64, p_star: f64, lower: f64, upper: f64) -> (f64, Argmax) {
    if p_star <= lower {
        (objective(lower), Argmax::Boundary(lower))
    } else if p_star >= upper {
        (objective(upper), Argmax::Boundary(upper))
    } else {
        (objective(p_star), Argmax::Interior(p_star))
    }
}

/// Discrete maximum of `p·u − ν(p)` over the nodes, refined inside the two
/// neighbouring cells by the vertex of the three-point parabola.
fn conjugate_on_nodes(psi: &GeneratingFunction, table: &PsiTable, u: f64) -> Result<(f64, Argmax)> {
    let nodes = table.nodes();
    let mut objective = Vec::with_capacity(nodes.len());
    for &p in nodes {
        objective.push(p * u - nu(psi, p)?);
    }
    let (j, &best) = objective
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("psi tables have at least two rows");
    let n = nodes.len();
    if j == 0 || j == n - 1 {
        return Ok((best, Argmax::Boundary(nodes[j])));
    }
    let (x0, x1, x2) = (nodes[j - 1], nodes[j], nodes[j + 1]);
    let (y0, y1, y2) = (objective[j - 1], objective[j], objective[j + 1]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den != 0.0 {
        let vertex = x1 - 0.5 * num / den;
        if vertex > x0 && vertex < x2 {
            let value = vertex * u - nu(psi, vertex)?;
            if value > best {
                return Ok((value, Argmax::Interior(vertex)));
            }
        }
    }
    Ok((best, Argmax::Interior(x1)))
}

/// `ν*(u)` by direct numerical maximization, whatever the kind of ψ.
pub fn fenchel_conjugate_numeric(psi: &GeneratingFunction, u: f64, tol: f64) -> Result<ConjugateResult> {
    if !u.is_finite() {
        return domain(format!("conjugate argument must be finite, got {u}"));
    }
    let support = psi.support();
    let objective = |p: f64| -> Result<f64> {
        Ok(match psi.nu(p)? {
            Extended::Finite(v) => p * u - v,
            Extended::PosInfinity => f64::NEG_INFINITY,
        })
    };
    let r = try_maximize_1d(objective, support.lower, support.upper, &MaxOptions::new(tol))?;
    Ok(ConjugateResult {
        u,
        value: r.max_value,
        argmax: argmax_of(&r),
        method: Method::Numeric,
    })
}

fn argmax_of(r: &MaxResult) -> Argmax {
    if r.max_value == Extended::PosInfinity {
        Argmax::Infinity
    } else if r.attained_interior {
        Argmax::Interior(r.argmax)
    } else {
        Argmax::Boundary(r.argmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Support;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn half_line() -> Support {
        Support::positive_half_line()
    }

    #[test]
    fn nu_examples() {
        let psi = GeneratingFunction::power(1.0, 2.0, half_line()).unwrap();
        assert!((nu(&psi, E * E).unwrap() - E * E).abs() < 1e-13);
        let nse = GeneratingFunction::natural_stretched_exp(1.0, 2.0, half_line()).unwrap();
        assert!((nu(&nse, 1.0).unwrap() - (-0.120_782_237_635_245_22)).abs() < 1e-14);
        let flat = GeneratingFunction::tabulated(PsiTable::new(vec![(1.0, 1.0), (2.0, 1.0)]).unwrap());
        assert_eq!(nu(&flat, 1.5).unwrap(), 0.0);
        let bounded = GeneratingFunction::power(1.0, 2.0, Support::new(1.0, 2.0).unwrap()).unwrap();
        assert!(nu(&bounded, 3.0).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let psi = GeneratingFunction::power(1.0, 2.0, half_line()).unwrap();
        let r = fenchel_conjugate(&psi, 1.0, 1e-10).unwrap();
        assert!((r.value.to_f64() - E / 2.0).abs() < 1e-14);
        assert_eq!(r.method, Method::ClosedForm);
        assert!((r.argmax.p().unwrap() - E).abs() < 1e-14);

        let flat = GeneratingFunction::tabulated(PsiTable::new(vec![(1.0, 1.0), (2.0, 1.0)]).unwrap());
        let r = fenchel_conjugate(&flat, 3.0, 1e-10).unwrap();
        assert_eq!(r.value, Extended::Finite(6.0));
        assert_eq!(r.argmax, Argmax::Boundary(2.0));

        let nse = GeneratingFunction::natural_stretched_exp(1.0, 1.0, half_line()).unwrap();
        for &u in &[1e-3, 0.5, 2.0] {
            let r = fenchel_conjugate(&nse, u, 1e-10).unwrap();
            assert_eq!(r.value, Extended::PosInfinity);
            let n = fenchel_conjugate_numeric(&nse, u, 1e-10).unwrap();
            assert_eq!(n.value, Extended::PosInfinity);
        }
    }

    #[test]
    fn closed_forms_match_brute_force() {
        // dense grid over (0, 10⁶) in ln p
        let brute = |psi: &GeneratingFunction, u: f64| {
            (0..200_000)
                .map(|i| (-12.0 + 25.8 * i as f64 / 200_000.0).exp())
                .map(|p| p * u - nu(psi, p).unwrap())
                .fold(f64::NEG_INFINITY, f64::max)
        };
        for &(c, theta) in &[(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)] {
            let psi = GeneratingFunction::natural_stretched_exp(c, theta, half_line()).unwrap();
            for &u in &[-3.0, -1.0, -0.1] {
                let closed = fenchel_conjugate(&psi, u, 1e-10).unwrap().value.to_f64();
                let b = brute(&psi, u);
                assert!(closed >= b - 1e-12 && closed - b < 1e-6 * (1.0 + closed.abs()), "{closed} vs {b}");
            }
        }
        for &m in &[0.5, 1.0, 2.0, 4.0] {
            let psi = GeneratingFunction::power(2.0, m, half_line()).unwrap();
            for &u in &[-2.0, 0.0, 1.5] {
                let closed = fenchel_conjugate(&psi, u, 1e-10).unwrap().value.to_f64();
                let b = brute(&psi, u);
                assert!(closed >= b - 1e-12 && closed - b < 1e-6 * (1.0 + closed.abs()), "{closed} vs {b}");
            }
        }
    }

    #[test]
    fn numeric_matches_closed_for_power() {
        for &m in &[0.5, 1.0, 2.0, 4.0] {
            for &c1 in &[1.0, 2.0] {
                let psi = GeneratingFunction::power(c1, m, half_line()).unwrap();
                for i in 0..=10 {
                    let u = -2.0 + 0.5 * i as f64;
                    let closed = fenchel_conjugate(&psi, u, 1e-10).unwrap().value.to_f64();
                    let numeric = fenchel_conjugate_numeric(&psi, u, 1e-10).unwrap().value.to_f64();
                    assert!((closed - numeric).abs() <= 1e-6 * (1.0 + closed.abs()), "m={m} C1={c1} u={u}");
                }
            }
        }
    }

    #[test]
    fn support_clamps_the_stationary_point() {
        let psi = GeneratingFunction::power(1.0, 2.0, Support::new(1.0, 2.0).unwrap()).unwrap();
        // unconstrained p* = e^{2u−1} = e^5 lies beyond the support
        let r = fenchel_conjugate(&psi, 3.0, 1e-10).unwrap();
        assert_eq!(r.argmax, Argmax::Boundary(2.0));
        assert!((r.value.to_f64() - (6.0 - 2f64.ln())).abs() < 1e-14);
        let nse = GeneratingFunction::natural_stretched_exp(1.0, 1.0, Support::new(1.0, 4.0).unwrap()).unwrap();
        let r = fenchel_conjugate(&nse, 1.0, 1e-10).unwrap();
        assert_eq!(r.argmax, Argmax::Boundary(4.0));
        assert!((r.value.to_f64() - (4.0 + 4f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn scaled_psi_shifts_the_argument() {
        let psi = GeneratingFunction::power(1.0, 2.0, half_line()).unwrap();
        let scaled = psi.scaled_by(3.0).unwrap();
        let a = fenchel_conjugate(&scaled, 1.0, 1e-10).unwrap().value.to_f64();
        let b = fenchel_conjugate(&psi, 1.0 - 3f64.ln(), 1e-10).unwrap().value.to_f64();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn tabulated_refinement_tracks_the_smooth_conjugate() {
        // ψ(p) = p^{1/2} tabulated on a fine grid is linear in log-log space
        let rows: Vec<(f64, f64)> = crate::numerics::geometric_grid(0.1, 100.0, 200)
            .into_iter()
            .map(|p| (p, p.sqrt()))
            .collect();
        let table = GeneratingFunction::tabulated(PsiTable::new(rows).unwrap());
        let exact = GeneratingFunction::power(1.0, 2.0, half_line()).unwrap();
        for &u in &[0.0, 0.5, 1.0, 2.0] {
            let t = fenchel_conjugate(&table, u, 1e-10).unwrap().value.to_f64();
            let e = fenchel_conjugate(&exact, u, 1e-10).unwrap().value.to_f64();
            assert!(t <= e + 1e-12 && e - t < 1e-6 * (1.0 + e), "u = {u}: {t} vs {e}");
        }
    }

    #[test]
    fn numeric_natural_agrees_with_closed_form() {
        use crate::model::TailFunction;
        // T = exp(−t) is the tail of |ln|x|| with ‖·‖_p = Γ(p+1)^{1/p}
        let tail = TailFunction::stretched_exp(1.0, 1.0).unwrap();
        let psi = GeneratingFunction::numeric_natural(tail, Support::new(0.5, 50.0).unwrap(), 1e-11).unwrap();
        let u = 2.0;
        let r = fenchel_conjugate(&psi, u, 1e-9).unwrap();
        let brute = (0..4000)
            .map(|i| 0.5 + 49.5 * i as f64 / 3999.0)
            .map(|p| p * u - ln_gamma(p + 1.0).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((r.value.to_f64() - brute).abs() < 1e-5 * (1.0 + brute.abs()));
    }

    proptest! {
        #[test]
        fn fenchel_young_inequality(m in 0.5f64..4.0, c1 in 0.5f64..3.0, p in 0.01f64..1e3, u in -3.0f64..3.0) {
            let psi = GeneratingFunction::power(c1, m, half_line()).unwrap();
            let v = fenchel_conjugate(&psi, u, 1e-10).unwrap().value.to_f64();
            prop_assert!(v + nu(&psi, p).unwrap() >= p * u - 1e-9 * (1.0 + (p * u).abs()));
        }

        #[test]
        fn conjugate_is_convex_and_monotone(theta in 0.3f64..3.0, u1 in -4.0f64..-0.05, u2 in -4.0f64..-0.05) {
            let psi = GeneratingFunction::natural_stretched_exp(1.0, theta, half_line()).unwrap();
            let f = |u: f64| fenchel_conjugate(&psi, u, 1e-10).unwrap().value.to_f64();
            let mid = f(0.5 * (u1 + u2));
            prop_assert!(mid <= 0.5 * (f(u1) + f(u2)) + 1e-10 * (1.0 + mid.abs()));
            let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
            prop_assert!(f(lo) <= f(hi) + 1e-12);
        }
    }
}
