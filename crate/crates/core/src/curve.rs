//! Exact piecewise curves `d(r)`.
//!
//! Every closed-form tradeoff curve in this crate is piecewise
//! linear-fractional: on each segment `d(r) = (a + b r) / (c + d r)` with
//! rational coefficients, and the breakpoints are rational. Keeping both
//! exact lets curve algebra (pointwise minimum, rescaling `r -> r / L`,
//! equality) be decided without floating point tolerance; floats appear only
//! when a curve is evaluated or exported.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Shorthand for the rational `n / d`.
pub fn rat(n: i128, d: i128) -> Rational {
    Ratio::new(n, d)
}

pub fn int(n: i128) -> Rational {
    Ratio::from_integer(n)
}

pub fn to_f64(q: Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// One segment `(a + b r) / (c + d r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    a: Rational,
    b: Rational,
    c: Rational,
    d: Rational,
}

impl Segment {
    /// `intercept + slope * r`
    pub fn linear(intercept: Rational, slope: Rational) -> Self {
        Segment {
            a: intercept,
            b: slope,
            c: int(1),
            d: int(0),
        }
        .normalized()
    }

    /// `(a + b r) / (c + d r)`; panics if the denominator is identically zero.
    pub fn fractional(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        assert!(
            !(c.is_zero() && d.is_zero()),
            "segment denominator is identically zero"
        );
        Segment { a, b, c, d }.normalized()
    }

    pub fn constant(value: Rational) -> Self {
        Segment::linear(value, int(0))
    }

    pub fn coefficients(&self) -> [Rational; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_linear(&self) -> bool {
        self.d.is_zero()
    }

    /// Unique representative: constants collapse to `(k + 0r)/1`, otherwise
    /// the denominator is scaled so that its first nonzero coefficient is 1.
    fn normalized(self) -> Self {
        let Segment { a, b, c, d } = self;
        if a * d == b * c {
            // numerator proportional to denominator
            let k = if !c.is_zero() { a / c } else { b / d };
            return Segment {
                a: k,
                b: int(0),
                c: int(1),
                d: int(0),
            };
        }
        let s = if !c.is_zero() { c } else { d };
        Segment {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        }
    }

    fn denominator_at(&self, r: Rational) -> Rational {
        self.c + self.d * r
    }

    pub fn eval(&self, r: f64) -> f64 {
        let [a, b, c, d] = self.coefficients().map(to_f64);
        (a + b * r) / (c + d * r)
    }

    /// `None` when the denominator vanishes at `r`.
    pub fn eval_exact(&self, r: Rational) -> Option<Rational> {
        let den = self.denominator_at(r);
        if den.is_zero() {
            None
        } else {
            Some((self.a + self.b * r) / den)
        }
    }

    /// `g(r) = self(r / k)`.
    fn rescaled(&self, k: Rational) -> Self {
        Segment::fractional(self.a, self.b / k, self.c, self.d / k)
    }

    /// Sign of the derivative is the sign of `bc - ad`.
    fn derivative_sign_numerator(&self) -> Rational {
        self.b * self.c - self.a * self.d
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_linear() {
            write!(f, "{} + {}r", self.a, self.b)
        } else {
            write!(f, "({} + {}r)/({} + {}r)", self.a, self.b, self.c, self.d)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RightEnd {
    Closed,
    Open,
}

/// A continuous, nonnegative curve on `[r_min, r_max]` or `[r_min, r_max)`.
///
/// Construction canonicalizes the representation (adjacent segments with the
/// same function are merged), so `==` is functional equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseCurve {
    knots: Vec<Rational>,
    segments: Vec<Segment>,
    right: RightEnd,
}

impl PiecewiseCurve {
    pub fn new(knots: Vec<Rational>, segments: Vec<Segment>, right: RightEnd) -> Result<Self> {
        if knots.len() < 2 || knots.len() != segments.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "curve needs n+1 knots for n segments (got {} knots, {} segments)",
                knots.len(),
                segments.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "curve knots must be strictly increasing".into(),
            ));
        }
        for (i, seg) in segments.iter().enumerate() {
            let (lo, hi) = (knots[i], knots[i + 1]);
            let (dl, dh) = (seg.denominator_at(lo), seg.denominator_at(hi));
            if dl.is_zero() || dh.is_zero() || dl.signum() != dh.signum() {
                return Err(Error::InvalidArgument(format!(
                    "segment {seg} has a pole on [{lo}, {hi}]"
                )));
            }
        }
        for i in 1..segments.len() {
            let at = knots[i];
            let left = segments[i - 1].eval_exact(at);
            let right_v = segments[i].eval_exact(at);
            if left != right_v {
                return Err(Error::InvalidArgument(format!(
                    "curve is discontinuous at r = {at}: {left:?} vs {right_v:?}"
                )));
            }
        }
        // A linear-fractional segment is monotone on a pole-free interval, so
        // its minimum sits at an endpoint.
        for (i, seg) in segments.iter().enumerate() {
            for at in [knots[i], knots[i + 1]] {
                let v = seg.eval_exact(at).expect("pole checked above");
                if v.is_negative() {
                    return Err(Error::InvalidArgument(format!(
                        "curve is negative at r = {at} ({v})"
                    )));
                }
            }
        }
        Ok(PiecewiseCurve {
            knots,
            segments,
            right,
        }
        .merged())
    }

    /// Linear interpolation through `points`.
    pub fn linear_through(points: &[(Rational, Rational)], right: RightEnd) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "linear interpolation needs at least two points".into(),
            ));
        }
        let knots: Vec<_> = points.iter().map(|p| p.0).collect();
        let segments = points
            .windows(2)
            .map(|w| {
                let (r0, d0) = w[0];
                let (r1, d1) = w[1];
                let slope = (d1 - d0) / (r1 - r0);
                Segment::linear(d0 - slope * r0, slope)
            })
            .collect();
        PiecewiseCurve::new(knots, segments, right)
    }

    fn merged(mut self) -> Self {
        let mut i = 1;
        while i < self.segments.len() {
            if self.segments[i] == self.segments[i - 1] {
                self.segments.remove(i);
                self.knots.remove(i);
            } else {
                i += 1;
            }
        }
        self
    }

    pub fn knots(&self) -> &[Rational] {
        &self.knots
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn right_end(&self) -> RightEnd {
        self.right
    }

    pub fn domain(&self) -> (Rational, Rational) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn domain_f64(&self) -> (f64, f64) {
        let (lo, hi) = self.domain();
        (to_f64(lo), to_f64(hi))
    }

    fn domain_label(&self) -> String {
        let (lo, hi) = self.domain();
        match self.right {
            RightEnd::Closed => format!("[{lo}, {hi}]"),
            RightEnd::Open => format!("[{lo}, {hi})"),
        }
    }

    pub fn contains(&self, r: f64) -> bool {
        let (lo, hi) = self.domain_f64();
        r.is_finite()
            && r >= lo
            && match self.right {
                RightEnd::Closed => r <= hi,
                RightEnd::Open => r < hi,
            }
    }

    pub fn contains_exact(&self, r: Rational) -> bool {
        let (lo, hi) = self.domain();
        r >= lo
            && match self.right {
                RightEnd::Closed => r <= hi,
                RightEnd::Open => r < hi,
            }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !self.contains(r) {
            return Err(Error::domain("curve argument", r, self.domain_label()));
        }
        let idx = self
            .knots
            .iter()
            .skip(1)
            .position(|&k| r <= to_f64(k))
            .unwrap_or(self.segments.len() - 1);
        Ok(self.segments[idx].eval(r))
    }

    pub fn eval_exact(&self, r: Rational) -> Result<Rational> {
        if !self.contains_exact(r) {
            return Err(Error::domain(
                "curve argument",
                to_f64(r),
                self.domain_label(),
            ));
        }
        let idx = self
            .knots
            .iter()
            .skip(1)
            .position(|&k| r <= k)
            .unwrap_or(self.segments.len() - 1);
        Ok(self.segments[idx]
            .eval_exact(r)
            .expect("segments are pole free"))
    }

    /// Breakpoints as `(r, d)` pairs, including both domain ends.
    pub fn breakpoints(&self) -> Vec<(Rational, Rational)> {
        let mut out = Vec::with_capacity(self.knots.len());
        for (i, seg) in self.segments.iter().enumerate() {
            out.push((self.knots[i], seg.eval_exact(self.knots[i]).unwrap()));
        }
        let last = *self.knots.last().unwrap();
        out.push((last, self.segments.last().unwrap().eval_exact(last).unwrap()));
        out
    }

    /// Interior breakpoints (domain ends excluded).
    pub fn interior_knots(&self) -> &[Rational] {
        &self.knots[1..self.knots.len() - 1]
    }

    /// `g(r) = self(r / k)` on the stretched domain.
    pub fn rescaled(&self, k: Rational) -> Result<Self> {
        if !k.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "rescale factor must be positive, got {k}"
            )));
        }
        PiecewiseCurve::new(
            self.knots.iter().map(|&x| x * k).collect(),
            self.segments.iter().map(|s| s.rescaled(k)).collect(),
            self.right,
        )
    }

    /// Restriction to `[lo, hi]` (or `[lo, hi)`), which must lie in the domain.
    pub fn restricted(&self, lo: Rational, hi: Rational, right: RightEnd) -> Result<Self> {
        let (dlo, dhi) = self.domain();
        let hi_ok = hi < dhi || (hi == dhi && (self.right == RightEnd::Closed || right == RightEnd::Open));
        if lo < dlo || !hi_ok || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "restriction [{lo}, {hi}] not inside {}",
                self.domain_label()
            )));
        }
        let mut knots = vec![lo];
        let mut segments = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let (a, b) = (self.knots[i], self.knots[i + 1]);
            if b <= lo || a >= hi {
                continue;
            }
            segments.push(*seg);
            knots.push(if b < hi { b } else { hi });
        }
        PiecewiseCurve::new(knots, segments, right)
    }

    /// Pointwise minimum over the intersection of both domains.
    ///
    /// Crossing points are found exactly; an irrational crossing inside a
    /// segment is reported as an error rather than approximated.
    pub fn min_with(&self, other: &PiecewiseCurve) -> Result<Self> {
        let (lo1, hi1) = self.domain();
        let (lo2, hi2) = other.domain();
        let lo = lo1.max(lo2);
        let hi = hi1.min(hi2);
        if lo >= hi {
            return Err(Error::InvalidArgument(
                "curves have disjoint domains".into(),
            ));
        }
        let right = match hi1.cmp(&hi2) {
            Ordering::Less => self.right,
            Ordering::Greater => other.right,
            Ordering::Equal => {
                if self.right == RightEnd::Closed && other.right == RightEnd::Closed {
                    RightEnd::Closed
                } else {
                    RightEnd::Open
                }
            }
        };
        let mut cuts: Vec<Rational> = self
            .knots
            .iter()
            .chain(other.knots.iter())
            .copied()
            .filter(|&k| k >= lo && k <= hi)
            .collect();
        cuts.sort();
        cuts.dedup();

        let mut knots = vec![lo];
        let mut segments = Vec::new();
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let mid = (x0 + x1) / int(2);
            let s1 = self.segment_at(mid);
            let s2 = other.segment_at(mid);
            let mut pieces = vec![x0];
            pieces.extend(crossings(&s1, &s2, x0, x1)?);
            pieces.push(x1);
            for p in pieces.windows(2) {
                let m = (p[0] + p[1]) / int(2);
                let v1 = s1.eval_exact(m).unwrap();
                let v2 = s2.eval_exact(m).unwrap();
                segments.push(if v1 <= v2 { s1 } else { s2 });
                knots.push(p[1]);
            }
        }
        PiecewiseCurve::new(knots, segments, right)
    }

    fn segment_at(&self, interior: Rational) -> Segment {
        let idx = self
            .knots
            .iter()
            .skip(1)
            .position(|&k| interior < k)
            .unwrap_or(self.segments.len() - 1);
        self.segments[idx]
    }

    /// Exact check that `d` never increases.
    pub fn is_nonincreasing(&self) -> bool {
        self.segments
            .iter()
            .all(|s| !s.derivative_sign_numerator().is_positive())
    }

    /// Samples `lo, lo + step, ...` up to the right end (included when closed).
    pub fn sample(&self, step: f64) -> Result<Vec<(f64, f64)>> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let (lo, hi) = self.domain_f64();
        let n = ((hi - lo) / step).floor() as usize;
        let mut out = Vec::with_capacity(n + 2);
        for k in 0..=n {
            let r = lo + k as f64 * step;
            if self.contains(r) {
                out.push((r, self.eval(r)?));
            }
        }
        if self.right == RightEnd::Closed {
            let last = out.last().map(|p| p.0);
            if last.map_or(true, |x| (x - hi).abs() > 1e-12) {
                out.push((hi, self.eval(hi)?));
            }
        }
        Ok(out)
    }
}

impl fmt::Display for PiecewiseCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "[{}, {}]: {}", self.knots[i], self.knots[i + 1], seg)?;
        }
        if self.right == RightEnd::Open {
            write!(f, " (open right end)")?;
        }
        Ok(())
    }
}

/// Rational roots of `s1(r) = s2(r)` strictly inside `(x0, x1)`, sorted.
fn crossings(s1: &Segment, s2: &Segment, x0: Rational, x1: Rational) -> Result<Vec<Rational>> {
    let [a1, b1, c1, d1] = s1.coefficients();
    let [a2, b2, c2, d2] = s2.coefficients();
    // (a1 + b1 r)(c2 + d2 r) - (a2 + b2 r)(c1 + d1 r) = A r^2 + B r + C
    let qa = b1 * d2 - b2 * d1;
    let qb = a1 * d2 + b1 * c2 - a2 * d1 - b2 * c1;
    let qc = a1 * c2 - a2 * c1;
    let inside = |x: &Rational| *x > x0 && *x < x1;
    let mut roots = Vec::new();
    if qa.is_zero() {
        if !qb.is_zero() {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - int(4) * qa * qc;
        if disc.is_negative() {
            return Ok(Vec::new());
        }
        match rational_sqrt(disc) {
            Some(s) => {
                roots.push((-qb - s) / (int(2) * qa));
                roots.push((-qb + s) / (int(2) * qa));
            }
            None => {
                let (fa, fb, fd) = (to_f64(qa), to_f64(qb), to_f64(disc).sqrt());
                let approx = [(-fb - fd) / (2.0 * fa), (-fb + fd) / (2.0 * fa)];
                if approx
                    .iter()
                    .any(|&x| x > to_f64(x0) && x < to_f64(x1))
                {
                    return Err(Error::IrrationalCrossing {
                        lo: to_f64(x0),
                        hi: to_f64(x1),
                    });
                }
            }
        }
    }
    roots.retain(inside);
    roots.sort();
    roots.dedup();
    Ok(roots)
}

fn rational_sqrt(q: Rational) -> Option<Rational> {
    let n = isqrt(*q.numer())?;
    let d = isqrt(*q.denom())?;
    Some(Ratio::new(n, d))
}

fn isqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    (x * x == n).then_some(x)
}
