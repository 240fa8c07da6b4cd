//! One-dimensional minimisation over the listening fraction.

use crate::analytic::{lambda_breakpoints, LambdaKind};
use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on `[a, b]`; returns the best point seen.
pub fn golden_section<E>(
    mut a: f64,
    mut b: f64,
    tol: f64,
    mut g: impl FnMut(f64) -> Result<f64, E>,
) -> Result<(f64, f64), E> {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut g1 = g(x1)?;
    let mut g2 = g(x2)?;
    while b - a > tol {
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - GOLDEN * (b - a);
            g1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + GOLDEN * (b - a);
            g2 = g(x2)?;
        }
    }
    Ok(if g1 <= g2 { (x1, g1) } else { (x2, g2) })
}

/// Scan of `scan_points` evenly spaced points followed by golden-section in
/// the brackets of the `brackets` best scan points. Endpoints are always
/// evaluated. Returns `(argmin, min)`; `+inf` values mark infeasibility.
pub fn minimize_1d<E>(
    lo: f64,
    hi: f64,
    scan_points: usize,
    brackets: usize,
    tol: f64,
    mut g: impl FnMut(f64) -> Result<f64, E>,
) -> Result<(f64, f64), E> {
    if hi <= lo {
        return Ok((lo, g(lo)?));
    }
    let n = scan_points.max(2);
    let xs: Vec<f64> = (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect();
    let mut vals = Vec::with_capacity(n);
    for &x in &xs {
        vals.push(g(x)?);
    }
    let mut best = (xs[0], vals[0]);
    for (&x, &v) in xs.iter().zip(&vals) {
        if v < best.1 {
            best = (x, v);
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&k| vals[k].is_finite()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    for &k in order.iter().take(brackets) {
        let a = xs[k.saturating_sub(1)];
        let b = xs[(k + 1).min(n - 1)];
        let (x, v) = golden_section(a, b, tol, &mut g)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// Infimum of `a(f) + b(f)` over `domain`, golden-section on each interval
/// between consecutive `breakpoints` (after a short scan), plus the
/// endpoints and the breakpoints themselves.
pub fn infimum_over_f(
    a: impl Fn(f64) -> Result<f64>,
    b: impl Fn(f64) -> Result<f64>,
    domain: (f64, f64),
    breakpoints: &[f64],
) -> Result<(f64, f64)> {
    let (lo, hi) = domain;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty listening-fraction domain [{lo}, {hi}]"
        )));
    }
    let sum = |f: f64| -> Result<f64> { Ok(a(f)? + b(f)?) };
    let mut cuts = vec![lo];
    cuts.extend(breakpoints.iter().copied().filter(|&x| x > lo && x < hi));
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best = (lo, sum(lo)?);
    for w in cuts.windows(2) {
        let (x, v) = minimize_1d(w[0], w[1], 17, 2, 1e-12, sum)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

/// `inf_f lambda_a(f, r) + lambda_b(f, r)` over the `f`-domain where both
/// are defined.
pub fn lambda_composition(a: LambdaKind, b: LambdaKind, r: f64, domain: (f64, f64)) -> Result<f64> {
    let mut bps = lambda_breakpoints(a, r);
    bps.extend(lambda_breakpoints(b, r));
    infimum_over_f(|f| a.eval(f, r), |f| b.eval(f, r), domain, &bps).map(|p| p.1)
}

/// `d_{1}(r)` from the lambda pair.
pub fn d_type1_by_composition(r: f64) -> Result<f64> {
    lambda_composition(LambdaKind::Type1, LambdaKind::Sources, r, (r, 1.0))
}

/// `d_{1,2}(r)` from the lambda pair.
pub fn d_type12_by_composition(r: f64) -> Result<f64> {
    lambda_composition(LambdaKind::Type12, LambdaKind::Sources, r, (r, 1.0))
}

/// Inferior-user exponent from the lambda pair.
pub fn d_inferior_by_composition(r1: f64) -> Result<f64> {
    lambda_composition(LambdaKind::CvmaInferior, LambdaKind::CvmaListen, r1, (r1 / 2.0, 1.0))
}
