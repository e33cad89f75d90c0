//! Grand Lebesgue Space norms `‖f‖_Gψ = sup_p ‖f‖_p / ψ(p)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{tail_of, FunctionSpec, GeneratingFunction, PsiKind, TailFunction};
use crate::moments::{has_closed_form, ln_moment_closed, ln_moment_from_tail, DEFAULT_MOMENT_TOL};
use crate::numerics::{try_maximize_1d, Extended, MaxOptions};

/// Largest relative gap tolerated between closed-form and quadrature norms.
pub const CROSS_CHECK_TOL: f64 = 1e-5;

/// Smallest order searched. Below it `(ln ‖f‖_p^p − ν(p))/p` loses most of
/// its digits to cancellation.
pub const P_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlsNorm {
    pub value: Extended,
    /// Maximizing `p`, or the order at which a moment diverged.
    pub argmax_p: Option<f64>,
    pub attained_interior: bool,
}

/// `p ↦ ln ‖f‖_p^p`, from the closed form when there is one and from the tail
/// otherwise.
struct LnNorm {
    closed: Option<FunctionSpec>,
    tail: TailFunction,
    tol: f64,
}

impl LnNorm {
    fn new(spec: &FunctionSpec, tol: f64) -> Result<Self> {
        spec.validate()?;
        Ok(LnNorm {
            closed: has_closed_form(spec).then(|| spec.clone()),
            tail: tail_of(spec)?,
            tol,
        })
    }

    fn eval(&self, p: f64) -> Result<f64> {
        match &self.closed {
            Some(spec) => ln_moment_closed(spec, p),
            None => ln_moment_from_tail(&self.tail, p, self.tol),
        }
    }

    /// Compare the closed form with the tail quadrature at `p`.
    fn cross_check(&self, p: f64) -> Result<()> {
        let Some(spec) = &self.closed else {
            return Ok(());
        };
        let closed = ln_moment_closed(spec, p)? / p;
        let quad = ln_moment_from_tail(&self.tail, p, DEFAULT_MOMENT_TOL)? / p;
        let gap = (quad - closed).exp_m1().abs();
        if gap > CROSS_CHECK_TOL {
            return Err(Error::Inconsistent(format!(
                "closed-form and quadrature norms differ by {gap:.3e} (relative) at p = {p}"
            )));
        }
        Ok(())
    }
}

/// `sup_p ‖f‖_p/ψ(p)` over the support of ψ, maximized in log space as
/// `(ln ‖f‖_p^p − ν(p))/p`.
/// A moment that diverges inside the support makes the norm `+∞`.
pub fn gls_norm(spec: &FunctionSpec, psi: &GeneratingFunction, tol: f64) -> Result<GlsNorm> {
    let ln_norm = LnNorm::new(spec, tol.min(DEFAULT_MOMENT_TOL))?;
    let result = match psi.kind() {
        PsiKind::Tabulated(table) => sup_over_nodes(&ln_norm, psi, table.nodes()),
        _ => sup_continuous(&ln_norm, psi, tol),
    };
    let norm = match result {
        Err(Error::Divergent { p, .. }) => {
            return Ok(GlsNorm {
                value: Extended::PosInfinity,
                argmax_p: Some(p),
                attained_interior: true,
            })
        }
        other => other?,
    };
    if let (Extended::Finite(_), Some(p)) = (norm.value, norm.argmax_p) {
        ln_norm.cross_check(p)?;
    }
    Ok(norm)
}

fn sup_over_nodes(ln_norm: &LnNorm, psi: &GeneratingFunction, nodes: &[f64]) -> Result<GlsNorm> {
    let mut best = (f64::NEG_INFINITY, nodes[0], 0);
    for (i, &p) in nodes.iter().enumerate() {
        let v = (ln_norm.eval(p)? - psi.nu(p)?.to_f64()) / p;
        if v > best.0 {
            best = (v, p, i);
        }
    }
    Ok(GlsNorm {
        value: Extended::Finite(best.0.exp()),
        argmax_p: Some(best.1),
        attained_interior: best.2 != 0 && best.2 != nodes.len() - 1,
    })
}

fn sup_continuous(ln_norm: &LnNorm, psi: &GeneratingFunction, tol: f64) -> Result<GlsNorm> {
    let support = psi.support();
    let objective = |p: f64| -> Result<f64> {
        match psi.nu(p)? {
            Extended::Finite(nu) => Ok((ln_norm.eval(p)? - nu) / p),
            Extended::PosInfinity => Ok(f64::NEG_INFINITY),
        }
    };
    let lower = support.lower.max(P_FLOOR);
    if lower >= support.upper {
        return Err(Error::Domain(format!("support lies below p = {P_FLOOR}")));
    }
    let r = try_maximize_1d(objective, lower, support.upper, &MaxOptions::new(tol))?;
    Ok(match r.max_value {
        Extended::Finite(v) => GlsNorm {
            value: Extended::Finite(v.exp()),
            argmax_p: Some(r.argmax),
            attained_interior: r.attained_interior,
        },
        Extended::PosInfinity => GlsNorm {
            value: Extended::PosInfinity,
            argmax_p: None,
            attained_interior: false,
        },
    })
}

/// Whether `‖f‖_Gψ < ∞`.
pub fn membership(spec: &FunctionSpec, psi: &GeneratingFunction) -> Result<bool> {
    Ok(gls_norm(spec, psi, 1e-8)?.value.is_finite())
}
