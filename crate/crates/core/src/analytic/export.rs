use std::io::Write;

use serde::Serialize;

use super::CurveId;
use crate::curve::{to_f64, PiecewiseCurve, RightEnd};
use crate::error::Result;

/// One exported sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub r: f64,
    pub d: f64,
    pub curve_id: String,
    #[serde(rename = "L")]
    pub rounds: u32,
}

/// Writes `r,d,curve_id,L` rows sampled at `step` for each curve.
pub fn write_curve_csv<W: Write>(
    out: W,
    curves: &[(CurveId, u32, PiecewiseCurve)],
    step: f64,
) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for (id, l, curve) in curves {
        for (r, d) in curve.sample(step)? {
            rows.push(CurveRow {
                r,
                d,
                curve_id: id.name().to_string(),
                rounds: *l,
            });
        }
    }
    let mut w = csv::Writer::from_writer(out);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| crate::error::Error::io("<csv>", e))?;
    Ok(rows)
}

#[derive(Serialize)]
struct SegmentJson {
    r_lo: f64,
    r_hi: f64,
    /// `(a + b r) / (c + d r)`
    coefficients: [String; 4],
}

#[derive(Serialize)]
struct CurveJson<'a> {
    curve_id: &'a str,
    #[serde(rename = "L")]
    rounds: u32,
    bound: &'a str,
    right_end: RightEnd,
    breakpoints: Vec<[f64; 2]>,
    segments: Vec<SegmentJson>,
}

/// Breakpoint export. `breakpoints` is the list of `[r, d]` pairs; the
/// segment formulas are included because some pieces are not linear.
pub fn breakpoints_json(id: CurveId, l: u32, curve: &PiecewiseCurve) -> serde_json::Value {
    let knots = curve.knots();
    let doc = CurveJson {
        curve_id: id.name(),
        rounds: l,
        bound: id.bound().label(),
        right_end: curve.right_end(),
        breakpoints: curve
            .breakpoints()
            .into_iter()
            .map(|(r, d)| [to_f64(r), to_f64(d)])
            .collect(),
        segments: curve
            .segments()
            .iter()
            .enumerate()
            .map(|(i, s)| SegmentJson {
                r_lo: to_f64(knots[i]),
                r_hi: to_f64(knots[i + 1]),
                coefficients: s.coefficients().map(|q| q.to_string()),
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("curve json")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::mar_upper_curve;

    #[test]
    fn csv_has_expected_header_and_rows() {
        let mut buf = Vec::new();
        let rows = write_curve_csv(
            &mut buf,
            &[(CurveId::MarUpper, 1, mar_upper_curve().clone())],
            0.25,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,d,curve_id,L\n"));
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[2].d, 1.5);
    }

    #[test]
    fn json_lists_breakpoints() {
        let v = breakpoints_json(CurveId::MarUpper, 1, mar_upper_curve());
        assert_eq!(v["breakpoints"], serde_json::json!([[0.0, 2.0], [0.5, 1.5], [1.0, 0.0]]));
        assert_eq!(v["bound"], "upper bound");
    }
}
