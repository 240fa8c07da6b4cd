//! Outage regions over channel exponential orders and their infima.
//!
//! [`infimum`] enumerates branch LPs at each listening fraction and searches
//! over the fraction; [`Method::Grid`] is an independent lattice oracle used
//! to cross-check it.

pub mod eval;
pub mod fsearch;
pub mod grid;
pub mod lp;
pub mod region;
pub mod verify;

use serde::Serialize;

pub use eval::RegionEvaluator;
pub use fsearch::{infimum_over_f, lambda_composition, minimize_1d};
pub use lp::BranchMode;
pub use region::{
    intersect, region_cvma_inferior, region_cvma_ji, region_cvma_js, region_cvma_s1,
    region_cvma_sji, region_cvma_sjs, region_cvma_sjs_full, region_mar_type1, region_mar_type12,
    Constraint, ExponentOrders, Expr, FractionRule, Objective, OutageRegionSpec, Relation,
    Scenario,
};
pub use verify::{verify_closed_forms, VerifyOptions, VerifyReport, VerifyRow};

use crate::error::{Error, Result};
use eval::CConstraint;

/// Enumeration limit for branch LPs per listening fraction.
pub const MAX_BRANCHES: u64 = 100_000;

/// Agreement required between the LP engine and the grid oracle.
pub const ORACLE_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BranchLp,
    /// Branch LP without convexification.
    Exhaustive,
    Grid,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfimumResult {
    /// `+inf` when the region is empty.
    pub value: f64,
    pub argmin: Option<ExponentOrders>,
    /// Listening fraction at the argmin, for regions with a rule.
    pub fraction: Option<f64>,
    pub method: Method,
    /// Largest constraint violation at the argmin.
    pub residual: f64,
    /// LPs solved, or lattice points evaluated for the grid oracle.
    pub work: u64,
}

impl InfimumResult {
    pub fn is_feasible(&self) -> bool {
        self.argmin.is_some()
    }

    /// Turns the empty-region result into [`Error::Infeasible`].
    pub fn require_feasible(self, region: &str) -> Result<Self> {
        if self.is_feasible() {
            Ok(self)
        } else {
            Err(Error::Infeasible(region.to_string()))
        }
    }
}

/// Search settings for the listening fraction in the LP engine.
#[derive(Clone, Copy, Debug)]
pub struct FractionSearch {
    pub scan_points: usize,
    pub brackets: usize,
    pub tol: f64,
}

impl Default for FractionSearch {
    fn default() -> Self {
        FractionSearch {
            scan_points: 41,
            brackets: 3,
            tol: 1e-10,
        }
    }
}

/// Global infimum of `objective` over the region by branch LPs.
pub fn infimum(region: &OutageRegionSpec, objective: &Objective) -> Result<InfimumResult> {
    infimum_with(region, objective, Method::BranchLp)
}

pub fn infimum_with(
    region: &OutageRegionSpec,
    objective: &Objective,
    method: Method,
) -> Result<InfimumResult> {
    let ev = RegionEvaluator::new(region)?;
    if objective.weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidArgument("objective weights must be finite".into()));
    }
    match method {
        Method::BranchLp => lp_infimum(region, &ev, objective, BranchMode::Convexified, FractionSearch::default()),
        Method::Exhaustive => lp_infimum(region, &ev, objective, BranchMode::Exhaustive, FractionSearch::default()),
        Method::Grid => {
            if objective.weights.iter().any(|&w| w < 0.0) {
                return Err(Error::InvalidArgument(
                    "the grid oracle needs nonnegative objective weights".into(),
                ));
            }
            let active = (0..5).filter(|&i| region.uses_variable(i)).collect();
            let out = grid::grid_infimum(&ev, objective, active);
            Ok(finish(region, &ev, objective, out.best, None, Method::Grid, out.evaluations))
        }
    }
}

/// Both engines, failing with [`Error::OracleDisagreement`] when they differ
/// by more than [`ORACLE_TOL`].
pub fn cross_checked_infimum(
    region: &OutageRegionSpec,
    objective: &Objective,
) -> Result<(InfimumResult, InfimumResult)> {
    let lp = infimum_with(region, objective, Method::BranchLp)?;
    let grid = infimum_with(region, objective, Method::Grid)?;
    let agree = match (lp.is_feasible(), grid.is_feasible()) {
        (true, true) => (lp.value - grid.value).abs() <= ORACLE_TOL,
        (false, false) => true,
        // the lattice can miss a thin region; the LP cannot
        (true, false) => false,
        (false, true) => false,
    };
    if !agree {
        return Err(Error::OracleDisagreement {
            lp: lp.value,
            grid: grid.value,
            tol: ORACLE_TOL,
        });
    }
    Ok((lp, grid))
}

fn lp_infimum(
    region: &OutageRegionSpec,
    ev: &RegionEvaluator,
    objective: &Objective,
    mode: BranchMode,
    search: FractionSearch,
) -> Result<InfimumResult> {
    let base: Vec<CConstraint> = region
        .constraints
        .iter()
        .map(|c| CConstraint::compile(c, region.scenario))
        .collect::<Result<_>>()?;
    let rule = region.fraction;
    let mut work = 0_u64;
    let mut best: Option<(f64, [f64; 5], f64)> = None;

    let mut at_f = |f: f64| -> Result<f64> {
        let alternatives = match rule {
            Some(rule) => rule.alternatives(region.r, f),
            None => vec![Vec::new()],
        };
        let mut local = f64::INFINITY;
        for alt in alternatives {
            let mut cons = base.clone();
            for c in &alt {
                cons.push(CConstraint::compile(c, region.scenario)?);
            }
            let out = lp::solve_branches(&cons, &objective.weights, f, mode, &region.name)?;
            work += out.lps_solved;
            if let Some((v, x)) = out.best {
                local = local.min(v);
                if best.is_none_or(|b| v < b.0) {
                    best = Some((v, x, f));
                }
            }
        }
        Ok(local)
    };

    match rule {
        None => {
            at_f(0.0)?;
        }
        Some(rule) => {
            let (lo, hi) = rule.domain(region.r);
            minimize_1d(lo, hi, search.scan_points, search.brackets, search.tol, &mut at_f)?;
        }
    }
    let method = match mode {
        BranchMode::Convexified => Method::BranchLp,
        BranchMode::Exhaustive => Method::Exhaustive,
    };
    let fraction = best.map(|b| b.2);
    Ok(finish(region, ev, objective, best.map(|b| (b.0, b.1)), fraction, method, work))
}

fn finish(
    region: &OutageRegionSpec,
    ev: &RegionEvaluator,
    objective: &Objective,
    best: Option<(f64, [f64; 5])>,
    fraction: Option<f64>,
    method: Method,
    work: u64,
) -> InfimumResult {
    match best {
        None => InfimumResult {
            value: f64::INFINITY,
            argmin: None,
            fraction: None,
            method,
            residual: f64::INFINITY,
            work,
        },
        Some((_, x)) => {
            let f = fraction.unwrap_or_else(|| ev.fraction(&x));
            let residual = ev.residual_at(&x, f);
            InfimumResult {
                value: objective.eval(&x),
                argmin: Some(ExponentOrders {
                    scenario: region.scenario,
                    values: x,
                }),
                fraction: region.fraction.map(|_| f),
                method,
                residual,
                work,
            }
        }
    }
}
