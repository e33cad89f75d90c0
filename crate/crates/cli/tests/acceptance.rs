//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails or overruns its time limit.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gls_tail::bounds::{sharpness_ratio, subgaussian_bound, tail_upper_bound, verify_domination};
use gls_tail::fenchel::{fenchel_conjugate, fenchel_conjugate_numeric, nu, Method};
use gls_tail::gls::gls_norm;
use gls_tail::model::{tail_of, FunctionSpec, GeneratingFunction, Support, TailFunction};
use gls_tail::moments::{lp_norm_closed, lp_norm_direct, lp_norm_from_tail, moment_direct, natural_psi, NaturalSource};
use gls_tail::numerics::{gamma, geometric_grid, integrate, linear_grid, ln_gamma};
use gls_tail::orlicz::{condition_check, find_finite_scale, young_orlicz_from_tail, Verdict};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const PARAMS: [f64; 3] = [0.5, 1.0, 2.0];
const ORDERS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: gls_tail::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn stretched_exp_grid() -> Vec<FunctionSpec> {
    let mut out = Vec::new();
    for &c in &PARAMS {
        for &theta in &PARAMS {
            out.push(FunctionSpec::stretched_exp(c, theta).unwrap());
        }
    }
    out
}

/// Every family with a closed-form moment.
fn closed_form_specs() -> Vec<FunctionSpec> {
    let mut out = stretched_exp_grid();
    let union = FunctionSpec::disjoint_union(vec![FunctionSpec::LogSingular, FunctionSpec::TruncatedExp]).unwrap();
    out.extend([
        FunctionSpec::LogSingular,
        FunctionSpec::TruncatedExp,
        union.clone(),
        FunctionSpec::scaled(2.0, FunctionSpec::stretched_exp(1.0, 1.0).unwrap()).unwrap(),
        FunctionSpec::scaled(3.0, union).unwrap(),
    ]);
    out
}

fn stretched_exp_norm(c: f64, theta: f64, p: f64) -> f64 {
    theta.powf(-1.0 / p) * (c * p).powf(-1.0 / (p * theta)) * gamma(1.0 / theta).unwrap().powf(1.0 / p)
}

fn c1_closed_form_moments() -> Outcome {
    let mut worst = 0.0_f64;
    for &c in &PARAMS {
        for &theta in &PARAMS {
            let spec = FunctionSpec::stretched_exp(c, theta).unwrap();
            for &p in &ORDERS {
                let want = stretched_exp_norm(c, theta, p);
                let direct = lib(lp_norm_direct(&spec, p, 1e-11))?;
                let closed = lib(lp_norm_closed(&spec, p))?;
                let e = rel(direct, want).max(rel(closed, want));
                check(e <= 1e-7, || format!("c={c} theta={theta} p={p}: direct {direct}, closed {closed}, want {want}"))?;
                worst = worst.max(e);
            }
        }
    }
    let exp1 = FunctionSpec::stretched_exp(1.0, 1.0).unwrap();
    let gauss = FunctionSpec::stretched_exp(1.0, 2.0).unwrap();
    for &p in &ORDERS {
        let a = lib(lp_norm_closed(&exp1, p))?;
        check(rel(a, p.powf(-1.0 / p)) <= 1e-14, || format!("p^(-1/p) at p={p}: {a}"))?;
        let b = lib(lp_norm_closed(&gauss, p))?.powf(p);
        let want = 0.5 * std::f64::consts::PI.sqrt() / p.sqrt();
        check(rel(b, want) <= 1e-14, || format!("0.5 sqrt(pi)/sqrt(p) at p={p}: {b}"))?;
    }
    Ok(format!("45 cases, worst relative error {worst:.2e}"))
}

fn c2_moments_from_tail() -> Outcome {
    let mut worst = 0.0_f64;
    for spec in stretched_exp_grid() {
        let tail = lib(tail_of(&spec))?;
        for &p in &ORDERS {
            let from_tail = lib(lp_norm_from_tail(&tail, p, 1e-10))?;
            let closed = lib(lp_norm_closed(&spec, p))?;
            let e = rel(from_tail, closed);
            check(e <= 1e-6, || format!("{spec:?} p={p}: tail {from_tail}, closed {closed}"))?;
            worst = worst.max(e);
        }
    }
    Ok(format!("45 cases, worst relative error {worst:.2e}"))
}

fn c3_union_reconstruction() -> Outcome {
    let g = FunctionSpec::LogSingular;
    let h = FunctionSpec::TruncatedExp;
    let union = FunctionSpec::disjoint_union(vec![g.clone(), h.clone()]).unwrap();
    let union_tail = lib(tail_of(&union))?;
    let mut worst = 0.0_f64;
    for &p in &[1.0, 2.0, 3.0, 5.0] {
        let mg = lib(moment_direct(&g, p, 1e-11))?;
        let want_g = gamma(p + 1.0).unwrap();
        check(rel(mg, want_g) <= 1e-6, || format!("g at p={p}: {mg} vs {want_g}"))?;
        let mh = lib(moment_direct(&h, p, 1e-12))?;
        check(rel(mh, 1.0 / p) <= 1e-8, || format!("h at p={p}: {mh} vs {}", 1.0 / p))?;

        let mu = lib(moment_direct(&union, p, 1e-11))?;
        check(rel(mu, mg + mh) <= 4.0 * f64::EPSILON, || format!("union at p={p}: {mu} != {mg} + {mh}"))?;
        let closed = lib(lp_norm_closed(&union, p))?.powf(p);
        let sum = want_g + 1.0 / p;
        check(rel(closed, sum) <= 1e-12, || format!("closed union at p={p}: {closed} vs {sum}"))?;

        // tail side, with T(t) = e^{-t} + ln(1/t) on (0, 1)
        let explicit = p * (integrate(|t: f64| t.powf(p - 1.0) * (-t).exp(), 0.0, f64::INFINITY, 1e-13).unwrap().value
            + integrate(|t: f64| t.powf(p - 1.0) * (1.0 / t).ln(), 0.0, 1.0, 1e-13).unwrap().value);
        let from_tail = lib(lp_norm_from_tail(&union_tail, p, 1e-11))?.powf(p);
        let e = rel(explicit, sum).max(rel(from_tail, sum));
        check(e <= 1e-6, || format!("tail side at p={p}: explicit {explicit}, library {from_tail}, want {sum}"))?;
        worst = worst.max(e);
    }
    // the alternative tail 1/ln(1/t) on (0, 1) is not integrable at t = 1
    let partial = |delta: f64| integrate(|t: f64| 1.0 / (1.0 / t).ln(), 0.0, 1.0 - delta, 1e-10).unwrap().value;
    let growth = partial(1e-8) - partial(1e-4);
    check((growth - 1e4_f64.ln()).abs() < 1e-2, || format!("1/ln(1/t) partial growth {growth}"))?;
    Ok(format!(
        "p in {{1,2,3,5}}, worst tail-side error {worst:.2e}; 1/ln(1/t) partials grow by {growth:.4} per 4 decades"
    ))
}

fn natural_support() -> Support {
    Support::new(0.5, 50.0).unwrap()
}

fn c4_natural_normalization() -> Outcome {
    let mut worst = 0.0_f64;
    let specs = closed_form_specs();
    for spec in &specs {
        let psi = lib(natural_psi(&NaturalSource::Spec(spec.clone()), natural_support(), 24, 1e-11))?;
        let n = lib(gls_norm(spec, &psi, 1e-9))?;
        let v = n.value.finite().ok_or_else(|| format!("{spec:?}: infinite norm"))?;
        check((v - 1.0).abs() <= 1e-7, || format!("{spec:?}: norm {v}"))?;
        worst = worst.max((v - 1.0).abs());
    }
    Ok(format!("{} families, worst |norm - 1| {worst:.2e}", specs.len()))
}

fn c5_domination() -> Outcome {
    let grid = geometric_grid(3.0, 100.0, 50);
    let specs = closed_form_specs();
    let mut compared = 0;
    for spec in &specs {
        let psi = lib(natural_psi(&NaturalSource::Spec(spec.clone()), natural_support(), 24, 1e-11))?;
        let report = lib(verify_domination(spec, &psi, 1.0, &grid))?;
        check(report.dominated, || format!("{spec:?}: not dominated"))?;
        compared += grid.len() - report.excluded;
    }
    Ok(format!("{} families, {compared} points with a positive tail", specs.len()))
}

fn c6_sharpness() -> Outcome {
    let grid: Vec<f64> = (2..=20).map(|k| (-f64::from(k)).exp()).collect();
    let mut details = Vec::new();
    for &theta in &[1.0, 2.0] {
        let (lo, hi) = lib(sharpness_ratio(theta, &grid))?;
        check(hi / lo <= 1.0 + 1e-4, || format!("theta={theta}: ratio spread {}", hi / lo))?;
        let c = (1.0 / theta).exp() * theta.powf(1.0 / theta - 1.0) * gamma(1.0 / theta).unwrap();
        check(rel(lo, c) <= 1e-5 && rel(hi, c) <= 1e-5, || format!("theta={theta}: [{lo}, {hi}] vs C = {c}"))?;
        for &t in &[(-3.0_f64).exp(), (-12.0_f64).exp()] {
            let brute = brute_force_ratio(theta, t);
            check(rel(brute, c) <= 1e-5, || format!("theta={theta}, t={t}: brute-force ratio {brute} vs {c}"))?;
        }
        details.push(format!("C({theta}) = {c:.10}"));
    }
    Ok(details.join(", "))
}

/// `exp(-sup_p (p ln t - ν(p))) / T(t)` for `exp(-x^θ)`, the sup taken over
/// a dense grid in `p`.
fn brute_force_ratio(theta: f64, t: f64) -> f64 {
    let u = t.ln();
    let nu = |p: f64| -theta.ln() - p.ln() / theta + ln_gamma(1.0 / theta).unwrap();
    let sup = geometric_grid(1e-4, 1e2, 400_000)
        .into_iter()
        .map(|p| p * u - nu(p))
        .fold(f64::NEG_INFINITY, f64::max);
    (-sup).exp() / (1.0 / t).ln().powf(1.0 / theta)
}

fn c7_fenchel() -> Outcome {
    let us = linear_grid(-2.0, 3.0, 26);
    let mut worst = 0.0_f64;
    for &m in &[0.5, 1.0, 2.0, 4.0] {
        for &c1 in &[1.0, 2.0] {
            let psi = lib(GeneratingFunction::power(c1, m, Support::positive_half_line()))?;
            for &u in &us {
                let formula = (m * (u - c1.ln()) - 1.0).exp() / m;
                let closed = lib(fenchel_conjugate(&psi, u, 1e-10))?;
                check(closed.method == Method::ClosedForm, || "closed form not used".into())?;
                let numeric = lib(fenchel_conjugate_numeric(&psi, u, 1e-10))?;
                let numeric = numeric.value.finite().ok_or("numeric conjugate is infinite")?;
                let closed = closed.value.finite().ok_or("closed conjugate is infinite")?;
                let e = (formula - numeric).abs().max((formula - closed).abs()) / (1.0 + formula);
                check(e <= 1e-6, || format!("m={m} C1={c1} u={u}: formula {formula}, numeric {numeric}, closed {closed}"))?;
                worst = worst.max(e);
            }
            for &p in &geometric_grid(0.05, 50.0, 20) {
                for &u in &linear_grid(-2.0, 3.0, 20) {
                    let lhs = lib(nu(&psi, p))? + lib(fenchel_conjugate(&psi, u, 1e-10))?.value.to_f64();
                    check(lhs >= p * u - 1e-12 * (1.0 + (p * u).abs()), || {
                        format!("Fenchel-Young fails at m={m} C1={c1} p={p} u={u}: {lhs} < {}", p * u)
                    })?;
                }
            }
        }
    }
    Ok(format!("8 generating functions x 26 points, worst scaled gap {worst:.2e}; 3200 Fenchel-Young checks"))
}

fn c8_subgaussian() -> Outcome {
    let ts = geometric_grid(5.0, 50.0, 40);
    let mut worst = 0.0_f64;
    for &m in &[0.5, 1.0, 1.5, 2.0] {
        for &c1 in &[1.0, 2.0] {
            let psi = lib(GeneratingFunction::power(c1, m, Support::positive_half_line()))?;
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for &t in &ts {
                let s = lib(subgaussian_bound(m, c1, t))?;
                let b = lib(tail_upper_bound(&psi, 1.0, t))?.value;
                check(rel(s, b) <= 1e-9, || format!("m={m} C1={c1} t={t}: {s} vs {b}"))?;
                check(s > 0.0, || format!("m={m} C1={c1} t={t}: bound underflows"))?;
                xs.push(t.ln());
                ys.push((-s.ln()).ln());
            }
            let slope = regression_slope(&xs, &ys);
            check((slope - m).abs() <= 1e-3, || format!("m={m} C1={c1}: slope {slope}"))?;
            worst = worst.max((slope - m).abs());
        }
    }
    Ok(format!("8 pairs, worst |slope - m| {worst:.2e}"))
}

fn regression_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn c9_orlicz() -> Outcome {
    for &c in &PARAMS {
        for &m in &PARAMS {
            for &k in &[1.5, 2.0, 4.0] {
                let tail = lib(TailFunction::stretched_exp(c, m))?;
                let v = lib(condition_check(&tail, k, 1e-8))?;
                check(v.verdict == Verdict::Convergent, || format!("C={c} m={m} k={k}: {:?}", v.verdict))?;
            }
        }
    }
    for &theta in &PARAMS {
        let tail = lib(TailFunction::log_power(theta))?;
        let v = lib(condition_check(&tail, 2.0, 1e-8))?;
        check(v.verdict == Verdict::Divergent, || format!("log-power theta={theta}: {:?}", v.verdict))?;
    }
    let tail = lib(TailFunction::stretched_exp(1.0, 2.0))?;
    let n = lib(young_orlicz_from_tail(&tail))?;
    let scale = lib(find_finite_scale(&tail, &n, 2.0, 1e-10))?;
    // f(x) = sqrt(ln(1/x)) on (0, 1) has tail e^{-t^2}
    let oracle = integrate(|x: f64| n.eval((1.0 / x).ln().sqrt() / scale.k).unwrap(), 0.0, 1.0, 1e-13)
        .map_err(|e| e.to_string())?
        .value;
    check(rel(scale.modular, oracle) <= 1e-5, || format!("modular {} vs oracle {oracle}", scale.modular))?;
    Ok(format!("27 convergent, 3 divergent; K = {}, modular {:.12} vs oracle {oracle:.12}", scale.k, scale.modular))
}

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_gls-tail")
}

fn work_dir() -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(binary()).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn norm_from_json(bytes: &[u8]) -> Result<f64, String> {
    let v: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    v["norm"].as_f64().ok_or_else(|| format!("no finite norm in {v}"))
}

fn c10_cli_round_trip() -> Outcome {
    let dir = work_dir();
    let write = |name: &str, text: &str| -> String {
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    };
    let gauss = r#"{"family":"stretched_exp","c":1.0,"theta":2.0}"#;
    // (name, spec, spec whose natural table is exported, matching closed-form psi)
    let cases = [
        (
            "exp",
            r#"{"family":"stretched_exp","c":1.0,"theta":1.0}"#,
            r#"{"family":"stretched_exp","c":1.0,"theta":1.0}"#,
            r#"{"family":"natural_stretched_exp","c":1.0,"theta":1.0}"#,
        ),
        (
            "gauss_scaled",
            r#"{"family":"scaled","factor":2.0,"inner":{"family":"stretched_exp","c":1.0,"theta":2.0}}"#,
            gauss,
            r#"{"family":"natural_stretched_exp","c":1.0,"theta":2.0}"#,
        ),
    ];
    let mut details = Vec::new();
    for (name, spec_text, source_text, psi_text) in cases {
        let spec = write(&format!("{name}.json"), spec_text);
        let source = write(&format!("{name}_source.json"), source_text);
        let psi = write(&format!("{name}_psi.json"), psi_text);
        let table = dir.join(format!("{name}_psi.csv")).to_string_lossy().into_owned();

        let psi_args = ["psi", "--spec", &source, "--a", "0.5", "--b", "50", "--grid-size", "16"];
        let first = run_cli(&psi_args)?;
        let second = run_cli(&psi_args)?;
        check(first == second, || format!("{name}: psi output differs between runs"))?;
        std::fs::write(&table, &first).map_err(|e| e.to_string())?;

        let tabulated_args = ["gls-norm", "--spec", &spec, "--psi", &table];
        let from_table = run_cli(&tabulated_args)?;
        check(from_table == run_cli(&tabulated_args)?, || format!("{name}: gls-norm output differs between runs"))?;
        let from_table = norm_from_json(&from_table)?;
        let closed = norm_from_json(&run_cli(&["gls-norm", "--spec", &spec, "--psi", &psi])?)?;
        check(rel(from_table, closed) <= 1e-4, || format!("{name}: table {from_table} vs closed form {closed}"))?;
        details.push(format!("{name}: {from_table} vs {closed}"));
    }
    Ok(details.join("; "))
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, name: "closed-form moment identities", limit: s(5), run: c1_closed_form_moments },
        Criterion { id: 2, name: "moments from the tail", limit: s(10), run: c2_moments_from_tail },
        Criterion { id: 3, name: "disjoint union reconstruction", limit: s(5), run: c3_union_reconstruction },
        Criterion { id: 4, name: "natural generating function normalization", limit: s(10), run: c4_natural_normalization },
        Criterion { id: 5, name: "tail bound domination", limit: s(10), run: c5_domination },
        Criterion { id: 6, name: "log-power sharpness", limit: s(5), run: c6_sharpness },
        Criterion { id: 7, name: "Fenchel conjugate closed form vs numeric", limit: s(5), run: c7_fenchel },
        Criterion { id: 8, name: "subgaussian chain", limit: s(5), run: c8_subgaussian },
        Criterion { id: 9, name: "Orlicz condition classification", limit: s(30), run: c9_orlicz },
        Criterion { id: 10, name: "CLI determinism and round trip", limit: s(10), run: c10_cli_round_trip },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("over time limit; {d}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "{status} criterion {:>2} {} ({:.2} s, limit {} s): {detail}",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
