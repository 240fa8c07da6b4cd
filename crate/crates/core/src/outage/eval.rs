//! Pointwise evaluation of region expressions.

use super::region::{Constraint, Expr, FractionRule, OutageRegionSpec, Relation, Scenario};
use crate::error::{Error, Result};

/// Expression with variables resolved to indices.
#[derive(Clone, Debug)]
pub(crate) enum CExpr {
    Const(f64),
    Var(usize),
    Add(Vec<CExpr>),
    Scale { c0: f64, c1: f64, e: Box<CExpr> },
    Pos(Box<CExpr>),
    Min(Vec<CExpr>),
    Max(Vec<CExpr>),
}

impl CExpr {
    pub(crate) fn compile(e: &Expr, scenario: Scenario) -> Result<CExpr> {
        let list = |xs: &[Expr]| -> Result<Vec<CExpr>> {
            xs.iter().map(|x| CExpr::compile(x, scenario)).collect()
        };
        Ok(match e {
            Expr::Const { value } => CExpr::Const(*value),
            Expr::Var { name } => CExpr::Var(scenario.index_of(name).ok_or_else(|| {
                Error::InvalidArgument(format!("unknown variable `{name}` for {scenario:?}"))
            })?),
            Expr::Add { terms } => CExpr::Add(list(terms)?),
            Expr::Scale { coef, expr } => CExpr::Scale {
                c0: coef.constant,
                c1: coef.per_fraction,
                e: Box::new(CExpr::compile(expr, scenario)?),
            },
            Expr::Pos { expr } => CExpr::Pos(Box::new(CExpr::compile(expr, scenario)?)),
            Expr::Min { args } | Expr::Max { args } if args.is_empty() => {
                return Err(Error::InvalidArgument("min/max with no arguments".into()))
            }
            Expr::Min { args } => CExpr::Min(list(args)?),
            Expr::Max { args } => CExpr::Max(list(args)?),
        })
    }

    pub(crate) fn eval(&self, x: &[f64; 5], f: f64) -> f64 {
        match self {
            CExpr::Const(c) => *c,
            CExpr::Var(i) => x[*i],
            CExpr::Add(ts) => ts.iter().map(|t| t.eval(x, f)).sum(),
            CExpr::Scale { c0, c1, e } => {
                let k = c0 + c1 * f;
                if k == 0.0 {
                    0.0
                } else {
                    k * e.eval(x, f)
                }
            }
            CExpr::Pos(e) => e.eval(x, f).max(0.0),
            CExpr::Min(a) => a.iter().map(|t| t.eval(x, f)).fold(f64::INFINITY, f64::min),
            CExpr::Max(a) => a
                .iter()
                .map(|t| t.eval(x, f))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CConstraint {
    pub lhs: CExpr,
    pub relation: Relation,
    pub rhs: CExpr,
}

impl CConstraint {
    pub(crate) fn compile(c: &Constraint, scenario: Scenario) -> Result<Self> {
        Ok(CConstraint {
            lhs: CExpr::compile(&c.lhs, scenario)?,
            relation: c.relation,
            rhs: CExpr::compile(&c.rhs, scenario)?,
        })
    }

    /// Amount by which the constraint is violated; 0 when satisfied.
    pub(crate) fn violation(&self, x: &[f64; 5], f: f64) -> f64 {
        let d = self.lhs.eval(x, f) - self.rhs.eval(x, f);
        match self.relation {
            Relation::Le => d.max(0.0),
            Relation::Ge => (-d).max(0.0),
            Relation::Eq => d.abs(),
        }
    }
}

/// Membership tests for a region with `f` taken from its rule.
#[derive(Clone, Debug)]
pub struct RegionEvaluator {
    scenario: Scenario,
    r: f64,
    rule: Option<FractionRule>,
    constraints: Vec<CConstraint>,
}

impl RegionEvaluator {
    pub fn new(spec: &OutageRegionSpec) -> Result<Self> {
        spec.validate()?;
        Ok(RegionEvaluator {
            scenario: spec.scenario,
            r: spec.r,
            rule: spec.fraction,
            constraints: spec
                .constraints
                .iter()
                .map(|c| CConstraint::compile(c, spec.scenario))
                .collect::<Result<_>>()?,
        })
    }

    /// `f` implied by the orders; 0 for regions without a rule.
    pub fn fraction(&self, x: &[f64; 5]) -> f64 {
        self.rule
            .map_or(0.0, |rule| rule.fraction(self.scenario, self.r, x))
    }

    /// Largest constraint violation at `(x, f)`, counting negative orders.
    pub fn residual_at(&self, x: &[f64; 5], f: f64) -> f64 {
        let neg = x.iter().fold(0.0_f64, |m, v| m.max(-v));
        self.constraints
            .iter()
            .map(|c| c.violation(x, f))
            .fold(neg, f64::max)
    }

    pub fn residual(&self, x: &[f64; 5]) -> f64 {
        self.residual_at(x, self.fraction(x))
    }

    pub fn contains(&self, x: &[f64; 5], tol: f64) -> bool {
        self.residual(x) <= tol
    }
}
