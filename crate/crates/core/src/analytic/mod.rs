//! Closed-form tradeoff curves for the relay, MAR and CVMA channels.
//!
//! Every curve is built once as an exact [`PiecewiseCurve`]; the scalar
//! functions below are thin domain-checked evaluators on top of them. Curves
//! that the analysis defines in two ways (a composite min of other curves and
//! an explicit branch formula) are built both ways and compared exactly.

mod export;
mod lambda;

use std::sync::OnceLock;

use crate::curve::{int, rat, PiecewiseCurve, RightEnd, Segment};
use crate::error::{Error, Result};

pub use export::{breakpoints_json, write_curve_csv, CurveRow};
pub use lambda::{
    lambda_cvma_inferior, lambda_cvma_listen, lambda_sources, lambda_type1, lambda_type12,
    lambda_breakpoints, LambdaKind,
};

fn check_antennas(m: u32, n: u32) -> Result<()> {
    if !(1..=3).contains(&m) || !(1..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "antenna counts must be in 1..=3, got {m}x{n}"
        )));
    }
    Ok(())
}

fn check_rounds(l: u32, min: u32) -> Result<()> {
    if l < min {
        return Err(Error::domain("ARQ rounds L", l as f64, format!("L >= {min}")));
    }
    Ok(())
}

/// Point-to-point `m x n` MIMO curve through `(k, (m-k)(n-k))`.
pub fn mimo_curve(m: u32, n: u32) -> Result<PiecewiseCurve> {
    check_antennas(m, n)?;
    let kmax = m.min(n) as i128;
    let points: Vec<_> = (0..=kmax)
        .map(|k| (int(k), int((m as i128 - k) * (n as i128 - k))))
        .collect();
    PiecewiseCurve::linear_through(&points, RightEnd::Closed)
}

pub fn mimo_dmt(m: u32, n: u32, r: f64) -> Result<f64> {
    mimo_curve(m, n)?.eval(r)
}

/// ARQ MIMO curve under long-term static fading: `d_{m x n}(r_e / L)`.
pub fn arq_mimo_curve(m: u32, n: u32, l: u32) -> Result<PiecewiseCurve> {
    check_rounds(l, 1)?;
    mimo_curve(m, n)?.rescaled(int(l as i128))
}

pub fn arq_mimo_dmt(m: u32, n: u32, r_e: f64, l: u32) -> Result<f64> {
    arq_mimo_curve(m, n, l)?.eval(r_e)
}

/// Non-ARQ DDF relay curve. The branch above `r = 1/2` is the known DDF
/// single-relay curve `(1 - r)/r`, which the relay results use as an input.
pub fn ddf_relay_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        PiecewiseCurve::new(
            vec![int(0), rat(1, 2), int(1)],
            vec![
                Segment::linear(int(2), int(-2)),
                Segment::fractional(int(1), int(-1), int(0), int(1)),
            ],
            RightEnd::Open,
        )
        .expect("relay curve")
    })
}

pub fn ddf_relay_dmt(r: f64) -> Result<f64> {
    ddf_relay_curve().eval(r)
}

/// ARQ-DDF relay curve `2(1 - r_e/L)` on `[0, 1)`, `L >= 2`.
pub fn relay_arq_curve(l: u32) -> Result<PiecewiseCurve> {
    check_rounds(l, 2)?;
    let li = int(l as i128);
    let direct = PiecewiseCurve::new(
        vec![int(0), int(1)],
        vec![Segment::linear(int(2), int(-2) / li)],
        RightEnd::Open,
    )?;
    debug_assert_eq!(
        direct,
        ddf_relay_curve()
            .rescaled(li)?
            .restricted(int(0), int(1), RightEnd::Open)?
    );
    Ok(direct)
}

pub fn relay_arq_dmt(r_e: f64, l: u32) -> Result<f64> {
    relay_arq_curve(l)?.eval(r_e)
}

/// Cut-set bound for the MAR channel with `L` rounds: the min of the
/// `3x1`, `2x2`, `2x1` and `1x2` ARQ MIMO curves, the last two at `r_e/2`.
pub fn mar_cutset_curve(l: u32) -> Result<PiecewiseCurve> {
    let two = int(2);
    let c = arq_mimo_curve(3, 1, l)?
        .min_with(&arq_mimo_curve(2, 2, l)?)?
        .min_with(&arq_mimo_curve(2, 1, l)?.rescaled(two)?)?
        .min_with(&arq_mimo_curve(1, 2, l)?.rescaled(two)?)?;
    Ok(c)
}

/// Upper bound `2 - r` on `[0, 1/2]`, `3(1 - r)` on `[1/2, 1]`.
pub fn mar_upper_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        let direct = PiecewiseCurve::linear_through(
            &[(int(0), int(2)), (rat(1, 2), rat(3, 2)), (int(1), int(0))],
            RightEnd::Closed,
        )
        .expect("mar upper");
        let cutset = mar_cutset_curve(1)
            .and_then(|c| c.restricted(int(0), int(1), RightEnd::Closed))
            .expect("mar cut-set");
        assert_eq!(direct, cutset, "MAR upper bound disagrees with its cut-set form");
        direct
    })
}

pub fn mar_upper(r: f64) -> Result<f64> {
    mar_upper_curve().eval(r)
}

/// Type-{1} outage exponent `d_{1}(r)` on `[0, 1]`.
pub fn d_type1_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        PiecewiseCurve::new(
            vec![int(0), rat(1, 2), rat(2, 3), int(1)],
            vec![
                Segment::linear(int(2), int(-1)),
                Segment::fractional(int(4), int(-5), int(2), int(-2)),
                Segment::fractional(int(2), int(-1), int(0), int(2)),
            ],
            RightEnd::Closed,
        )
        .expect("type-1 curve")
    })
}

/// Type-{1,2} outage exponent `d_{1,2}(r)` on `[0, 1]`.
pub fn d_type12_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        PiecewiseCurve::new(
            vec![int(0), rat(2, 3), int(1)],
            vec![
                Segment::linear(int(3), int(-3)),
                Segment::fractional(int(2), int(-2), int(0), int(1)),
            ],
            RightEnd::Closed,
        )
        .expect("type-12 curve")
    })
}

pub fn d_type1(r: f64) -> Result<f64> {
    d_type1_curve().eval(r)
}

pub fn d_type12(r: f64) -> Result<f64> {
    d_type12_curve().eval(r)
}

/// DDF lower bound for the MAR channel without ARQ.
pub fn ddf_mar_lower_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        let direct = PiecewiseCurve::new(
            vec![int(0), rat(1, 2), rat(2, 3), int(1)],
            vec![
                Segment::linear(int(2), int(-1)),
                Segment::linear(int(3), int(-3)),
                Segment::fractional(int(2), int(-2), int(0), int(1)),
            ],
            RightEnd::Closed,
        )
        .expect("mar lower");
        let composite = d_type1_curve()
            .min_with(d_type12_curve())
            .expect("type-1/type-12 min");
        assert_eq!(direct, composite, "MAR lower bound disagrees with min of type exponents");
        direct
    })
}

pub fn ddf_mar_lower(r: f64) -> Result<f64> {
    ddf_mar_lower_curve().eval(r)
}

/// Optimal MAR curve with ARQ: `2 - r_e/L` on `[0, 1)`, `L >= 2`.
pub fn mar_arq_curve(l: u32) -> Result<PiecewiseCurve> {
    check_rounds(l, 2)?;
    let li = int(l as i128);
    let direct = PiecewiseCurve::new(
        vec![int(0), int(1)],
        vec![Segment::linear(int(2), int(-1) / li)],
        RightEnd::Open,
    )?;
    let lower = ddf_mar_lower_curve()
        .rescaled(li)?
        .restricted(int(0), int(1), RightEnd::Open)?;
    let cutset = mar_cutset_curve(l)?.restricted(int(0), int(1), RightEnd::Open)?;
    assert_eq!(direct, lower, "MAR ARQ curve disagrees with rescaled lower bound");
    assert_eq!(direct, cutset, "MAR ARQ curve disagrees with cut-set bound");
    Ok(direct)
}

pub fn mar_arq_dmt(r_e: f64, l: u32) -> Result<f64> {
    mar_arq_curve(l)?.eval(r_e)
}

/// CVMA cut-set bound: min of the `2x2` ARQ MIMO curve at `r_e` and the
/// `1x3` one at `r_e/2`, on `[0, 2)`.
pub fn cvma_upper_curve(l: u32) -> Result<PiecewiseCurve> {
    check_rounds(l, 1)?;
    let c = arq_mimo_curve(2, 2, l)?
        .min_with(&arq_mimo_curve(1, 3, l)?.rescaled(int(2))?)?
        .restricted(int(0), int(2), RightEnd::Open)?;
    if l >= 2 {
        // Here r_e/L <= 1, so the 2x2 curve stays on its first segment and
        // the bound matches min{3(1 - r_e/2L), 4 - 3r_e/L}.
        let li = int(l as i128);
        let a = Segment::linear(int(3), int(-3) / (int(2) * li));
        let b = Segment::linear(int(4), int(-3) / li);
        let simple = PiecewiseCurve::new(vec![int(0), int(2)], vec![a], RightEnd::Open)?
            .min_with(&PiecewiseCurve::new(vec![int(0), int(2)], vec![b], RightEnd::Open)?)?;
        assert_eq!(c, simple, "CVMA bound disagrees with its two-term form");
    }
    Ok(c)
}

pub fn cvma_upper(r_e: f64, l: u32) -> Result<f64> {
    cvma_upper_curve(l)?.eval(r_e)
}

/// `min{3(1 - r_e/2L), 4 - 3r_e/L}` evaluated literally. It coincides with
/// [`cvma_upper`] for `L >= 2`; for `L = 1` and `r_e > 1` it drops below the
/// cut-set min (and below zero near `r_e = 2`).
pub fn cvma_upper_two_term(r_e: f64, l: u32) -> Result<f64> {
    check_rounds(l, 1)?;
    if !(0.0..2.0).contains(&r_e) {
        return Err(Error::domain("r_e", r_e, "[0, 2)"));
    }
    let lf = l as f64;
    Ok((3.0 * (1.0 - r_e / (2.0 * lf))).min(4.0 - 3.0 * r_e / lf))
}

/// Inferior-user exponent `d_i(r1)` on `[0, 2)`.
pub fn d_inferior_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        PiecewiseCurve::new(
            vec![int(0), int(1), int(2)],
            vec![
                Segment::linear(int(3), int(-1)),
                Segment::fractional(int(8), int(-2), int(2), int(1)),
            ],
            RightEnd::Open,
        )
        .expect("inferior curve")
    })
}

/// `d_{s,ji}(r1)` on `[0, 2)`.
pub fn d_superior_jointinferior_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        PiecewiseCurve::linear_through(
            &[(int(0), int(4)), (rat(4, 3), rat(4, 3)), (int(2), int(1))],
            RightEnd::Open,
        )
        .expect("s,ji curve")
    })
}

/// `d_{s,js}(r1) = 4 - r1` on `[0, 2)`.
pub fn d_superior_jointsuperior_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        PiecewiseCurve::new(
            vec![int(0), int(2)],
            vec![Segment::linear(int(4), int(-1))],
            RightEnd::Open,
        )
        .expect("s,js curve")
    })
}

/// Joint-decoding exponent after an unsuccessful superior decode:
/// `min{d_2x2(r1/2), d_{s,ji}(r1), d_{s,js}(r1)}`, which reduces to `d_{s,ji}`.
pub fn d_superior_joint_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        let c = mimo_curve(2, 2)
            .and_then(|m| m.rescaled(int(2)))
            .and_then(|m| m.min_with(d_superior_jointinferior_curve()))
            .and_then(|m| m.min_with(d_superior_jointsuperior_curve()))
            .expect("s,j curve");
        assert_eq!(&c, d_superior_jointinferior_curve());
        c
    })
}

pub fn d_inferior(r1: f64) -> Result<f64> {
    d_inferior_curve().eval(r1)
}

pub fn d_superior_jointinferior(r1: f64) -> Result<f64> {
    d_superior_jointinferior_curve().eval(r1)
}

pub fn d_superior_jointsuperior(r1: f64) -> Result<f64> {
    d_superior_jointsuperior_curve().eval(r1)
}

/// Two-round ARQ-DDF CVMA lower bound on `[0, 2)`.
pub fn cvma_lower_two_rounds_curve() -> &'static PiecewiseCurve {
    static C: OnceLock<PiecewiseCurve> = OnceLock::new();
    C.get_or_init(|| {
        let direct = PiecewiseCurve::linear_through(
            &[
                (int(0), int(3)),
                (int(1), int(2)),
                (rat(4, 3), rat(4, 3)),
                (int(2), int(1)),
            ],
            RightEnd::Open,
        )
        .expect("cvma lower");
        let composite = d_inferior_curve()
            .min_with(d_superior_joint_curve())
            .expect("inferior/joint min");
        assert_eq!(direct, composite, "CVMA lower bound disagrees with its components");
        direct
    })
}

pub fn cvma_ddf_lower_two_rounds(r_e: f64) -> Result<f64> {
    cvma_lower_two_rounds_curve().eval(r_e)
}

/// `L`-round bound obtained from the two-round curve at rate `2 r_e / L`;
/// defined for even `L` on `0 <= r_e < L`.
pub fn cvma_lower_general_curve(l: u32) -> Result<PiecewiseCurve> {
    check_rounds(l, 2)?;
    if l % 2 != 0 {
        return Err(Error::domain("ARQ rounds L", l as f64, "even L >= 2"));
    }
    cvma_lower_two_rounds_curve().rescaled(rat(l as i128, 2))
}

pub fn cvma_ddf_lower_general(r_e: f64, l: u32) -> Result<f64> {
    cvma_lower_general_curve(l)?.eval(r_e)
}

/// Whether a curve is an exact tradeoff, an achievable lower bound or a
/// converse upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    Lower,
    Upper,
}

impl BoundKind {
    pub fn label(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::Lower => "lower bound",
            BoundKind::Upper => "upper bound",
        }
    }
}

/// Named curves that can be exported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveId {
    RelayDdf,
    RelayArq,
    MarUpper,
    MarLower,
    MarArq,
    CvmaUpper,
    CvmaLower,
    CvmaLowerGeneral,
    DType1,
    DType12,
    DInferior,
    DSji,
    DSjs,
}

impl CurveId {
    pub const ALL: [CurveId; 13] = [
        CurveId::RelayDdf,
        CurveId::RelayArq,
        CurveId::MarUpper,
        CurveId::MarLower,
        CurveId::MarArq,
        CurveId::CvmaUpper,
        CurveId::CvmaLower,
        CurveId::CvmaLowerGeneral,
        CurveId::DType1,
        CurveId::DType12,
        CurveId::DInferior,
        CurveId::DSji,
        CurveId::DSjs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurveId::RelayDdf => "relay_ddf",
            CurveId::RelayArq => "relay_arq",
            CurveId::MarUpper => "mar_upper",
            CurveId::MarLower => "mar_ddf_lower",
            CurveId::MarArq => "mar_arq",
            CurveId::CvmaUpper => "cvma_upper",
            CurveId::CvmaLower => "cvma_ddf_lower",
            CurveId::CvmaLowerGeneral => "cvma_ddf_lower_general",
            CurveId::DType1 => "d_type1",
            CurveId::DType12 => "d_type12",
            CurveId::DInferior => "d_inferior",
            CurveId::DSji => "d_sji",
            CurveId::DSjs => "d_sjs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        CurveId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCurve(s.to_string()))
    }

    pub fn bound(self) -> BoundKind {
        match self {
            CurveId::RelayArq | CurveId::MarArq => BoundKind::Exact,
            CurveId::MarUpper | CurveId::CvmaUpper => BoundKind::Upper,
            CurveId::RelayDdf
            | CurveId::MarLower
            | CurveId::CvmaLower
            | CurveId::CvmaLowerGeneral => BoundKind::Lower,
            // outage exponents, each a bound on one error term
            CurveId::DType1
            | CurveId::DType12
            | CurveId::DInferior
            | CurveId::DSji
            | CurveId::DSjs => BoundKind::Lower,
        }
    }

    /// Whether the curve depends on the number of rounds.
    pub fn uses_rounds(self) -> bool {
        matches!(
            self,
            CurveId::RelayArq | CurveId::MarArq | CurveId::CvmaUpper | CurveId::CvmaLowerGeneral
        )
    }

    /// The curve for `L` rounds. Round-independent curves report `L = 1`
    /// (or `L = 2` for the two-round CVMA bound) and reject any other value.
    pub fn curve(self, l: u32) -> Result<PiecewiseCurve> {
        let fixed = |expected: u32, c: &PiecewiseCurve| {
            if l != expected {
                Err(Error::InvalidArgument(format!(
                    "curve `{}` is defined for L = {expected} only, got L = {l}",
                    self.name()
                )))
            } else {
                Ok(c.clone())
            }
        };
        match self {
            CurveId::RelayDdf => fixed(1, ddf_relay_curve()),
            CurveId::RelayArq => relay_arq_curve(l),
            CurveId::MarUpper => fixed(1, mar_upper_curve()),
            CurveId::MarLower => fixed(1, ddf_mar_lower_curve()),
            CurveId::MarArq => mar_arq_curve(l),
            CurveId::CvmaUpper => cvma_upper_curve(l),
            CurveId::CvmaLower => fixed(2, cvma_lower_two_rounds_curve()),
            CurveId::CvmaLowerGeneral => cvma_lower_general_curve(l),
            CurveId::DType1 => fixed(1, d_type1_curve()),
            CurveId::DType12 => fixed(1, d_type12_curve()),
            CurveId::DInferior => fixed(2, d_inferior_curve()),
            CurveId::DSji => fixed(2, d_superior_jointinferior_curve()),
            CurveId::DSjs => fixed(2, d_superior_jointsuperior_curve()),
        }
    }

    /// Natural default for `L`.
    pub fn default_rounds(self) -> u32 {
        match self {
            CurveId::RelayDdf | CurveId::MarUpper | CurveId::MarLower => 1,
            CurveId::DType1 | CurveId::DType12 => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CurveId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mimo_examples() {
        assert_eq!(mimo_dmt(2, 1, 0.0).unwrap(), 2.0);
        assert_eq!(mimo_dmt(2, 2, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(mimo_dmt(1, 3, 0.5).unwrap(), 1.5, epsilon = 1e-15);
        assert!(mimo_dmt(2, 2, 2.01).is_err());
        assert!(mimo_dmt(2, 2, -0.01).is_err());
        assert!(mimo_dmt(4, 2, 0.0).is_err());
    }

    #[test]
    fn arq_mimo_examples() {
        assert_abs_diff_eq!(arq_mimo_dmt(2, 1, 1.0, 2).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(arq_mimo_dmt(2, 2, 0.0, 4).unwrap(), 4.0);
        assert_abs_diff_eq!(arq_mimo_dmt(1, 3, 1.5, 3).unwrap(), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn relay_examples() {
        assert_eq!(ddf_relay_dmt(0.0).unwrap(), 2.0);
        assert_abs_diff_eq!(ddf_relay_dmt(0.25).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ddf_relay_dmt(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert!(ddf_relay_dmt(1.0).is_err());

        assert_eq!(relay_arq_dmt(0.0, 2).unwrap(), 2.0);
        assert_abs_diff_eq!(relay_arq_dmt(0.5, 2).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(relay_arq_dmt(0.9, 3).unwrap(), 1.4, epsilon = 1e-15);
        assert!(relay_arq_dmt(1.0, 2).is_err());
        assert!(relay_arq_dmt(0.5, 1).is_err());
    }

    #[test]
    fn mar_examples() {
        assert_eq!(mar_upper(0.0).unwrap(), 2.0);
        assert_eq!(mar_upper(0.5).unwrap(), 1.5);
        assert_eq!(mar_upper(1.0).unwrap(), 0.0);
        assert!(mar_upper(1.0001).is_err());

        assert_eq!(ddf_mar_lower(0.5).unwrap(), 1.5);
        assert_eq!(ddf_mar_lower_curve().eval_exact(rat(2, 3)).unwrap(), int(1));
        assert_abs_diff_eq!(ddf_mar_lower(0.8).unwrap(), 0.5, epsilon = 1e-15);

        assert_eq!(mar_arq_dmt(0.0, 2).unwrap(), 2.0);
        assert_abs_diff_eq!(mar_arq_dmt(0.5, 2).unwrap(), 1.75, epsilon = 1e-15);
        assert_abs_diff_eq!(mar_arq_dmt(0.99, 2).unwrap(), 1.505, epsilon = 1e-15);
        assert!(mar_arq_dmt(1.0, 2).is_err());
    }

    #[test]
    fn type_exponent_examples() {
        assert_abs_diff_eq!(d_type1(0.5).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d_type1(1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(d_type12_curve().eval_exact(rat(2, 3)).unwrap(), int(1));
        assert_abs_diff_eq!(d_type1(0.6).unwrap(), 1.25, epsilon = 1e-12);
    }

    #[test]
    fn cvma_examples() {
        assert_eq!(cvma_upper(0.0, 2).unwrap(), 3.0);
        assert_eq!(cvma_upper_curve(1).unwrap().eval_exact(rat(2, 3)).unwrap(), int(2));
        // 3(1 - 1/4) = 2.25 is the binding term, not 4 - 3/2
        assert_abs_diff_eq!(cvma_upper(1.0, 2).unwrap(), 2.25, epsilon = 1e-15);
        assert!(cvma_upper(2.0, 2).is_err());

        assert_eq!(cvma_ddf_lower_two_rounds(1.0).unwrap(), 2.0);
        assert_eq!(
            cvma_lower_two_rounds_curve().eval_exact(rat(4, 3)).unwrap(),
            rat(4, 3)
        );
        assert_eq!(cvma_ddf_lower_two_rounds(0.0).unwrap(), 3.0);
        assert!(cvma_ddf_lower_two_rounds(2.0).is_err());

        assert_eq!(cvma_ddf_lower_general(1.0, 2).unwrap(), 2.0);
        assert_abs_diff_eq!(cvma_ddf_lower_general(1.0, 8).unwrap(), 2.75, epsilon = 1e-15);
        assert!(cvma_ddf_lower_general(1.0, 3).is_err());
        assert!(cvma_ddf_lower_general(4.0, 4).is_err());
        assert!(cvma_ddf_lower_general(1.9, 1_000_000).unwrap() > 3.0 - 1e-5);
    }

    #[test]
    fn cvma_component_examples() {
        assert_eq!(d_inferior(1.0).unwrap(), 2.0);
        assert_abs_diff_eq!(d_inferior(1.5).unwrap(), 10.0 / 7.0, epsilon = 1e-15);
        assert_eq!(
            d_superior_jointinferior_curve().eval_exact(rat(4, 3)).unwrap(),
            rat(4, 3)
        );
        assert_eq!(d_superior_jointsuperior(0.5).unwrap(), 3.5);
    }

    #[test]
    fn two_term_upper_matches_cutset_form_for_arq() {
        for l in 2..=6 {
            for k in 0..200 {
                let r = k as f64 * 0.01;
                assert_abs_diff_eq!(
                    cvma_upper(r, l).unwrap(),
                    cvma_upper_two_term(r, l).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
        // Without ARQ the literal two-term form undercuts the 2x2 curve.
        assert!(cvma_upper_two_term(1.9, 1).unwrap() < 0.0);
        assert_abs_diff_eq!(cvma_upper(1.9, 1).unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn curve_ids_round_trip() {
        for id in CurveId::ALL {
            assert_eq!(CurveId::parse(id.name()).unwrap(), id);
            assert!(id.curve(id.default_rounds()).is_ok(), "{id}");
        }
        assert!(matches!(CurveId::parse("nope"), Err(Error::UnknownCurve(_))));
        assert!(CurveId::MarUpper.curve(2).is_err());
    }
}
