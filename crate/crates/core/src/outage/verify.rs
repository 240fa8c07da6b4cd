//! Closed-form versus numerical infimum comparison.

use std::io::Write;
use std::sync::Arc;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::fsearch::{d_inferior_by_composition, d_type12_by_composition, d_type1_by_composition};
use super::region::{
    region_cvma_inferior, region_cvma_sji, region_cvma_sjs, region_mar_type1, region_mar_type12,
    Objective, OutageRegionSpec,
};
use crate::analytic;
use crate::curve::{to_f64, PiecewiseCurve};
use crate::error::{Error, Result};

pub type Evaluator = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// One curve to check: a closed form and a numerical route to it.
#[derive(Clone)]
pub struct VerifyCase {
    pub curve_id: String,
    /// How `numeric` is computed, for reports.
    pub route: String,
    pub closed: Evaluator,
    pub numeric: Evaluator,
    /// `[lo, hi)`
    pub domain: (f64, f64),
    pub breakpoints: Vec<f64>,
}

impl VerifyCase {
    pub fn new(
        curve_id: impl Into<String>,
        closed: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
        numeric: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
        domain: (f64, f64),
        breakpoints: Vec<f64>,
    ) -> Self {
        VerifyCase {
            curve_id: curve_id.into(),
            route: "branch_lp".into(),
            closed: Arc::new(closed),
            numeric: Arc::new(numeric),
            domain,
            breakpoints,
        }
    }

    pub fn with_route(mut self, route: impl Into<String>) -> Self {
        self.route = route.into();
        self
    }
}

fn region_numeric(build: fn(f64) -> Result<OutageRegionSpec>) -> impl Fn(f64) -> Result<f64> + Send + Sync {
    move |r| {
        let region = build(r)?;
        let res = super::infimum(&region, &Objective::sum())?;
        Ok(res.require_feasible(&region.name)?.value)
    }
}

fn knots(curve: &PiecewiseCurve) -> Vec<f64> {
    curve.breakpoints().into_iter().map(|(r, _)| to_f64(r)).collect()
}

/// Branch-LP and lambda-composition routes for every region-defined curve.
pub fn default_cases() -> Vec<VerifyCase> {
    let mar = (0.0, 1.0);
    let cvma = (0.0, 2.0);
    let t1 = knots(analytic::d_type1_curve());
    let t12 = knots(analytic::d_type12_curve());
    let inf = knots(analytic::d_inferior_curve());
    vec![
        VerifyCase::new("d_type1", analytic::d_type1, region_numeric(region_mar_type1), mar, t1.clone()),
        VerifyCase::new("d_type1", analytic::d_type1, d_type1_by_composition, mar, t1).with_route("composition"),
        VerifyCase::new("d_type12", analytic::d_type12, region_numeric(region_mar_type12), mar, t12.clone()),
        VerifyCase::new("d_type12", analytic::d_type12, d_type12_by_composition, mar, t12).with_route("composition"),
        VerifyCase::new("d_inferior", analytic::d_inferior, region_numeric(region_cvma_inferior), cvma, inf.clone()),
        VerifyCase::new("d_inferior", analytic::d_inferior, d_inferior_by_composition, cvma, inf).with_route("composition"),
        VerifyCase::new(
            "d_sji",
            analytic::d_superior_jointinferior,
            region_numeric(region_cvma_sji),
            cvma,
            knots(analytic::d_superior_jointinferior_curve()),
        ),
        VerifyCase::new(
            "d_sjs",
            analytic::d_superior_jointsuperior,
            region_numeric(region_cvma_sjs),
            cvma,
            knots(analytic::d_superior_jointsuperior_curve()),
        ),
    ]
}

#[derive(Clone)]
pub struct VerifyOptions {
    /// Midpoint grid size per curve when `r_grid` is `None`.
    pub points: usize,
    /// Explicit rates; points outside a curve's domain are skipped.
    pub r_grid: Option<Vec<f64>>,
    pub tolerance: f64,
    /// Half-width of the window dropped around each breakpoint.
    pub exclusion: f64,
    pub cases: Vec<VerifyCase>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            points: 50,
            r_grid: None,
            tolerance: 1e-4,
            exclusion: 1e-3,
            cases: default_cases(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub curve_id: String,
    pub route: String,
    pub r: f64,
    pub closed: f64,
    pub numeric: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub tolerance: f64,
    pub excluded: usize,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.abs_err <= self.tolerance)
    }

    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_err).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Midpoints `lo + (k + 1/2)(hi - lo)/n`.
pub fn midpoint_grid(domain: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = domain;
    (0..n)
        .map(|k| lo + (k as f64 + 0.5) * (hi - lo) / n as f64)
        .collect()
}

/// Evaluates every case on its grid. Errors from either evaluator abort the
/// run; mismatches are reported, not raised.
pub fn verify_closed_forms(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut jobs = Vec::new();
    let mut excluded = 0;
    for case in &opts.cases {
        let grid = match &opts.r_grid {
            Some(g) => g.clone(),
            None => midpoint_grid(case.domain, opts.points),
        };
        for r in grid {
            if !(r >= case.domain.0 && r < case.domain.1) {
                continue;
            }
            if case.breakpoints.iter().any(|b| (r - b).abs() < opts.exclusion) {
                warn!("{} ({}): skipping r = {r} next to a breakpoint", case.curve_id, case.route);
                excluded += 1;
                continue;
            }
            jobs.push((case, r));
        }
    }
    let rows = jobs
        .par_iter()
        .map(|(case, r)| {
            let closed = (case.closed)(*r)?;
            let numeric = (case.numeric)(*r)?;
            Ok(VerifyRow {
                curve_id: case.curve_id.clone(),
                route: case.route.clone(),
                r: *r,
                closed,
                numeric,
                abs_err: (closed - numeric).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        rows,
        tolerance: opts.tolerance,
        excluded,
    })
}
