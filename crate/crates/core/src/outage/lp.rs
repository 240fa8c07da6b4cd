//! Branch enumeration of piecewise-linear constraints into small LPs.
//!
//! A constraint `g(x) <= 0` with `g` built from sums, scalings, min, max and
//! positive parts is lowered atom by atom. An atom whose sign makes it convex
//! in the constraint (a max seen with positive sign, a min with negative
//! sign) becomes an epigraph/hypograph variable. Any other atom is replaced by
//! one chosen argument: since each choice only over-estimates `g`, the union
//! of the restricted sets over all choices is exactly the original set.
//! Equalities are split into two inequalities lowered independently.
//!
//! `BranchMode::Exhaustive` branches every atom and adds the ordering rows
//! that make the choice the true min/max; it is slower and exists as a
//! cross-check of the convexified lowering.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::eval::{CConstraint, CExpr};
use super::region::Relation;
use super::MAX_BRANCHES;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchMode {
    Convexified,
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pol {
    Up,
    Down,
    Both,
}

impl Pol {
    fn flip(self) -> Pol {
        match self {
            Pol::Up => Pol::Down,
            Pol::Down => Pol::Up,
            Pol::Both => Pol::Both,
        }
    }
}

/// `k + sum c_i x_i`
#[derive(Clone, Debug, Default)]
struct Lin {
    k: f64,
    terms: Vec<(usize, f64)>,
}

impl Lin {
    fn constant(k: f64) -> Lin {
        Lin {
            k,
            terms: Vec::new(),
        }
    }

    fn var(i: usize) -> Lin {
        Lin {
            k: 0.0,
            terms: vec![(i, 1.0)],
        }
    }

    fn add(mut self, o: &Lin, s: f64) -> Lin {
        self.k += s * o.k;
        self.terms.extend(o.terms.iter().map(|&(i, c)| (i, s * c)));
        self
    }

    fn scaled(mut self, s: f64) -> Lin {
        self.k *= s;
        self.terms.iter_mut().for_each(|t| t.1 *= s);
        self
    }

    fn merged(&self) -> Vec<(usize, f64)> {
        let mut t = self.terms.clone();
        t.sort_by_key(|p| p.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(t.len());
        for (i, c) in t {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|p| p.1 != 0.0);
        out
    }
}

struct Builder<'a> {
    mode: BranchMode,
    f: f64,
    choices: &'a [usize],
    arities: Vec<usize>,
    n_vars: usize,
    /// Each row is `lin <= 0`.
    rows: Vec<Lin>,
}

impl Builder<'_> {
    fn choose(&mut self, arity: usize) -> usize {
        let k = self.arities.len();
        self.arities.push(arity);
        self.choices.get(k).copied().unwrap_or(0)
    }

    fn aux(&mut self) -> usize {
        self.n_vars += 1;
        self.n_vars - 1
    }

    fn lower(&mut self, e: &CExpr, pol: Pol) -> Lin {
        match e {
            CExpr::Const(c) => Lin::constant(*c),
            CExpr::Var(i) => Lin::var(*i),
            CExpr::Add(ts) => ts
                .iter()
                .fold(Lin::default(), |acc, t| {
                    let l = self.lower(t, pol);
                    acc.add(&l, 1.0)
                }),
            CExpr::Scale { c0, c1, e } => {
                let k = c0 + c1 * self.f;
                if k == 0.0 {
                    Lin::default()
                } else {
                    let p = if k < 0.0 { pol.flip() } else { pol };
                    self.lower(e, p).scaled(k)
                }
            }
            CExpr::Pos(e) => {
                let args = [CExpr::Const(0.0), (**e).clone()];
                self.extremum(&args, pol, true)
            }
            CExpr::Max(args) => self.extremum(args, pol, true),
            CExpr::Min(args) => self.extremum(args, pol, false),
        }
    }

    fn extremum(&mut self, args: &[CExpr], pol: Pol, is_max: bool) -> Lin {
        if args.len() == 1 {
            return self.lower(&args[0], pol);
        }
        // sign that makes `t >= arg` (max) or `t <= arg` (min) exact
        let convex = self.mode == BranchMode::Convexified
            && ((is_max && pol == Pol::Up) || (!is_max && pol == Pol::Down));
        if convex {
            let t = Lin::var(self.aux());
            for a in args {
                let l = self.lower(a, pol);
                let row = if is_max { l.add(&t, -1.0) } else { t.clone().add(&l, -1.0) };
                self.rows.push(row);
            }
            return t;
        }
        let i = self.choose(args.len());
        match self.mode {
            BranchMode::Convexified => self.lower(&args[i], pol),
            BranchMode::Exhaustive => {
                let chosen = self.lower(&args[i], Pol::Both);
                for (j, a) in args.iter().enumerate() {
                    if j != i {
                        let l = self.lower(a, Pol::Both);
                        let row = if is_max {
                            l.add(&chosen, -1.0)
                        } else {
                            chosen.clone().add(&l, -1.0)
                        };
                        self.rows.push(row);
                    }
                }
                chosen
            }
        }
    }

    fn constraint(&mut self, c: &CConstraint) {
        let (up, down) = match self.mode {
            BranchMode::Convexified => (Pol::Up, Pol::Down),
            BranchMode::Exhaustive => (Pol::Both, Pol::Both),
        };
        if matches!(c.relation, Relation::Le | Relation::Eq) {
            let l = self.lower(&c.lhs, up);
            let r = self.lower(&c.rhs, down);
            self.rows.push(l.add(&r, -1.0));
        }
        if matches!(c.relation, Relation::Ge | Relation::Eq) {
            let r = self.lower(&c.rhs, up);
            let l = self.lower(&c.lhs, down);
            self.rows.push(r.add(&l, -1.0));
        }
    }
}

/// Best point over all branches at a fixed `f`.
#[derive(Clone, Debug)]
pub struct LpOutcome {
    /// `None` when every branch is infeasible.
    pub best: Option<(f64, [f64; 5])>,
    pub lps_solved: u64,
}

/// Minimises `weights . x` over `x >= 0` subject to every constraint, with
/// `f` fixed.
pub(crate) fn solve_branches(
    constraints: &[CConstraint],
    weights: &[f64; 5],
    f: f64,
    mode: BranchMode,
    region: &str,
) -> Result<LpOutcome> {
    let mut choices: Vec<usize> = Vec::new();
    let mut best: Option<(f64, [f64; 5])> = None;
    let mut solved = 0_u64;
    loop {
        let mut b = Builder {
            mode,
            f,
            choices: &choices,
            arities: Vec::new(),
            n_vars: 5,
            rows: Vec::new(),
        };
        for c in constraints {
            b.constraint(c);
        }
        let Builder {
            arities,
            n_vars,
            rows,
            ..
        } = b;
        if solved == 0 {
            let total = arities
                .iter()
                .try_fold(1_u64, |acc, &a| acc.checked_mul(a as u64))
                .unwrap_or(u64::MAX);
            // the first leaf's arities lower-bound the enumeration size
            if total > MAX_BRANCHES {
                return Err(Error::BranchExplosion(total));
            }
        }
        solved += 1;
        if solved > MAX_BRANCHES {
            return Err(Error::BranchExplosion(solved));
        }
        if let Some(x) = solve_one(&rows, n_vars, weights, region)? {
            let v = weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>();
            if best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, x));
            }
        }

        // advance the odometer over the decisions actually reached
        choices.resize(arities.len(), 0);
        match (0..arities.len()).rev().find(|&i| choices[i] + 1 < arities[i]) {
            Some(i) => {
                choices.truncate(i + 1);
                choices[i] += 1;
            }
            None => break,
        }
    }
    Ok(LpOutcome {
        best,
        lps_solved: solved,
    })
}

fn solve_one(rows: &[Lin], n_vars: usize, weights: &[f64; 5], region: &str) -> Result<Option<[f64; 5]>> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n_vars)
        .map(|i| {
            if i < 5 {
                p.add_var(weights[i], (0.0, f64::INFINITY))
            } else {
                p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))
            }
        })
        .collect();
    for row in rows {
        let terms = row.merged();
        if terms.is_empty() {
            if row.k > 1e-12 {
                return Ok(None);
            }
            continue;
        }
        let expr: Vec<_> = terms.iter().map(|&(i, c)| (vars[i], c)).collect();
        p.add_constraint(&expr[..], ComparisonOp::Le, -row.k);
    }
    match p.solve() {
        Ok(sol) => {
            let mut x = [0.0; 5];
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = sol[vars[i]].max(0.0);
            }
            Ok(Some(x))
        }
        Err(minilp::Error::Infeasible) => Ok(None),
        Err(minilp::Error::Unbounded) => Err(Error::Unbounded(region.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outage::region::*;

    fn compile(spec: &OutageRegionSpec) -> Vec<CConstraint> {
        spec.constraints
            .iter()
            .map(|c| CConstraint::compile(c, spec.scenario).unwrap())
            .collect()
    }

    #[test]
    fn single_positive_part() {
        // (1 - v1)^+ <= 0.25 -> v1 >= 0.75
        let spec = OutageRegionSpec {
            name: "t".into(),
            scenario: Scenario::Mar,
            r: 0.5,
            fraction: None,
            constraints: vec![Constraint::le(
                "c",
                Expr::one_minus_pos(Expr::var("v1")),
                Expr::c(0.25),
            )],
        };
        for mode in [BranchMode::Convexified, BranchMode::Exhaustive] {
            let out = solve_branches(&compile(&spec), &[1.0; 5], 0.0, mode, "t").unwrap();
            let (v, x) = out.best.unwrap();
            assert!((v - 0.75).abs() < 1e-12);
            assert!((x[0] - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn nonconvex_lower_bound_on_min_branches() {
        // min{v1, v2} >= 0.5 is convex; max{v1, v2} >= 0.5 is not
        let spec = OutageRegionSpec {
            name: "t".into(),
            scenario: Scenario::Mar,
            r: 0.5,
            fraction: None,
            constraints: vec![Constraint::ge(
                "c",
                Expr::max(vec![Expr::var("v1"), Expr::var("v2")]),
                Expr::c(0.5),
            )],
        };
        let out = solve_branches(&compile(&spec), &[1.0, 2.0, 0.0, 0.0, 0.0], 0.0, BranchMode::Convexified, "t").unwrap();
        assert_eq!(out.lps_solved, 2);
        assert!((out.best.unwrap().0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_region_reports_none() {
        let spec = OutageRegionSpec {
            name: "t".into(),
            scenario: Scenario::Mar,
            r: 0.5,
            fraction: None,
            constraints: vec![Constraint::le("c", Expr::c(1.0), Expr::c(0.0))],
        };
        let out = solve_branches(&compile(&spec), &[1.0; 5], 0.0, BranchMode::Convexified, "t").unwrap();
        assert!(out.best.is_none());
    }

    #[test]
    fn explosion_guard() {
        // 17 independent two-way branches exceed the limit
        let terms = (0..17)
            .map(|_| Expr::max(vec![Expr::var("v1"), Expr::var("v2")]))
            .collect();
        let spec = OutageRegionSpec {
            name: "t".into(),
            scenario: Scenario::Mar,
            r: 0.5,
            fraction: None,
            constraints: vec![Constraint::ge("c", Expr::add(terms), Expr::c(1.0))],
        };
        let err = solve_branches(&compile(&spec), &[1.0; 5], 0.0, BranchMode::Convexified, "t").unwrap_err();
        assert!(matches!(err, Error::BranchExplosion(n) if n > MAX_BRANCHES));
    }
}
