//! Declarative outage regions over channel exponential orders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which channel the orders describe. Each scenario has five orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// `(v1, v2, vr, u1, u2)`: source/relay-to-destination and
    /// source-to-relay links.
    Mar,
    /// `(v_ss, v_si, v_is, v_ii, u)`: the 2x2 source-antenna links after
    /// superior/inferior labeling, and the inter-user link.
    Cvma,
}

pub const MAR_VARS: [&str; 5] = ["v1", "v2", "vr", "u1", "u2"];
pub const CVMA_VARS: [&str; 5] = ["v_ss", "v_si", "v_is", "v_ii", "u"];

impl Scenario {
    pub fn variables(self) -> &'static [&'static str; 5] {
        match self {
            Scenario::Mar => &MAR_VARS,
            Scenario::Cvma => &CVMA_VARS,
        }
    }

    pub fn index_of(self, name: &str) -> Option<usize> {
        self.variables().iter().position(|&v| v == name)
    }
}

/// A point in the order space of a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentOrders {
    pub scenario: Scenario,
    pub values: [f64; 5],
}

impl ExponentOrders {
    pub fn new(scenario: Scenario, values: [f64; 5]) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::domain(
                "exponential order",
                *v,
                format!("[0, inf) for {}", scenario.variables()[i]),
            ));
        }
        Ok(ExponentOrders { scenario, values })
    }

    pub fn zeros(scenario: Scenario) -> Self {
        ExponentOrders {
            scenario,
            values: [0.0; 5],
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.scenario.index_of(name).map(|i| self.values[i])
    }
}

/// `constant + per_fraction * f`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coef {
    pub constant: f64,
    pub per_fraction: f64,
}

impl Coef {
    pub fn at(self, f: f64) -> f64 {
        self.constant + self.per_fraction * f
    }
}

/// Piecewise-linear expression tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Const { value: f64 },
    Var { name: String },
    Add { terms: Vec<Expr> },
    Scale { coef: Coef, expr: Box<Expr> },
    Pos { expr: Box<Expr> },
    Min { args: Vec<Expr> },
    Max { args: Vec<Expr> },
}

impl Expr {
    pub fn c(value: f64) -> Expr {
        Expr::Const { value }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var {
            name: name.to_string(),
        }
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        Expr::Add { terms }
    }

    pub fn scale(k: f64, e: Expr) -> Expr {
        Expr::Scale {
            coef: Coef {
                constant: k,
                per_fraction: 0.0,
            },
            expr: Box::new(e),
        }
    }

    /// `(constant + per_fraction * f) * e`
    pub fn scale_f(constant: f64, per_fraction: f64, e: Expr) -> Expr {
        Expr::Scale {
            coef: Coef {
                constant,
                per_fraction,
            },
            expr: Box::new(e),
        }
    }

    pub fn pos(e: Expr) -> Expr {
        Expr::Pos { expr: Box::new(e) }
    }

    pub fn min(args: Vec<Expr>) -> Expr {
        Expr::Min { args }
    }

    pub fn max(args: Vec<Expr>) -> Expr {
        Expr::Max { args }
    }

    /// `a - b`
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::scale(-1.0, b)])
    }

    /// `(1 - e)^+`, the ubiquitous outage term.
    pub fn one_minus_pos(e: Expr) -> Expr {
        Expr::pos(Expr::sub(Expr::c(1.0), e))
    }

    fn visit_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Const { .. } => {}
            Expr::Var { name } => out.push(name),
            Expr::Add { terms } | Expr::Min { args: terms } | Expr::Max { args: terms } => {
                terms.iter().for_each(|t| t.visit_vars(out))
            }
            Expr::Scale { expr, .. } | Expr::Pos { expr } => expr.visit_vars(out),
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut v = Vec::new();
        self.visit_vars(&mut v);
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

impl Constraint {
    pub fn le(label: &str, lhs: Expr, rhs: Expr) -> Self {
        Constraint {
            label: label.to_string(),
            lhs,
            relation: Relation::Le,
            rhs,
        }
    }

    pub fn ge(label: &str, lhs: Expr, rhs: Expr) -> Self {
        Constraint {
            label: label.to_string(),
            lhs,
            relation: Relation::Ge,
            rhs,
        }
    }

    pub fn eq(label: &str, lhs: Expr, rhs: Expr) -> Self {
        Constraint {
            label: label.to_string(),
            lhs,
            relation: Relation::Eq,
            rhs,
        }
    }
}

/// How the listening fraction `f` is tied to the orders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FractionRule {
    Fixed { value: f64 },
    /// `f = min{1, max{r / (2(1 - max u)^+), r / (1 - min u)^+}}`
    MarListening,
    /// `f = min{1, r1 / (2(1 - u)^+)}`
    CvmaListening,
}

/// `a / b` for `b >= 0` with `x / 0 = +inf` when `x > 0` and `0 / 0 = 0`.
pub fn capped_ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

impl FractionRule {
    /// `f` as a function of the orders at rate `r`.
    pub fn fraction(&self, scenario: Scenario, r: f64, x: &[f64; 5]) -> f64 {
        match *self {
            FractionRule::Fixed { value } => value,
            FractionRule::MarListening => {
                debug_assert_eq!(scenario, Scenario::Mar);
                let (u1, u2) = (x[3], x[4]);
                let hi = capped_ratio(r, 2.0 * (1.0 - u1.max(u2)).max(0.0));
                let lo = capped_ratio(r, (1.0 - u1.min(u2)).max(0.0));
                hi.max(lo).min(1.0)
            }
            FractionRule::CvmaListening => {
                debug_assert_eq!(scenario, Scenario::Cvma);
                capped_ratio(r, 2.0 * (1.0 - x[4]).max(0.0)).min(1.0)
            }
        }
    }

    /// Range of `f` the rule can produce at rate `r`.
    pub fn domain(&self, r: f64) -> (f64, f64) {
        match *self {
            FractionRule::Fixed { value } => (value, value),
            FractionRule::MarListening if r <= 0.0 => (0.0, 0.0),
            FractionRule::MarListening => (r.min(1.0), 1.0),
            FractionRule::CvmaListening if r <= 0.0 => (0.0, 0.0),
            FractionRule::CvmaListening => ((r / 2.0).min(1.0), 1.0),
        }
    }

    /// The rule at a fixed `f` as a disjunction of constraint sets over the
    /// orders; empty when `f` is unreachable.
    pub fn alternatives(&self, r: f64, f: f64) -> Vec<Vec<Constraint>> {
        let (lo, hi) = self.domain(r);
        if f < lo - 1e-15 || f > hi + 1e-15 {
            return Vec::new();
        }
        match *self {
            FractionRule::Fixed { .. } => vec![Vec::new()],
            _ if r <= 0.0 => vec![Vec::new()],
            FractionRule::MarListening => {
                let umax = || Expr::max(vec![Expr::var("u1"), Expr::var("u2")]);
                let umin = || Expr::min(vec![Expr::var("u1"), Expr::var("u2")]);
                if f >= 1.0 {
                    vec![
                        vec![Constraint::ge("listen: max u", umax(), Expr::c(1.0 - r / 2.0))],
                        vec![Constraint::ge("listen: min u", umin(), Expr::c(1.0 - r))],
                    ]
                } else {
                    let a = 1.0 - r / (2.0 * f);
                    let b = 1.0 - r / f;
                    vec![
                        vec![
                            Constraint::eq("listen: max u", umax(), Expr::c(a)),
                            Constraint::le("listen: min u", umin(), Expr::c(b)),
                        ],
                        vec![
                            Constraint::eq("listen: min u", umin(), Expr::c(b)),
                            Constraint::le("listen: max u", umax(), Expr::c(a)),
                        ],
                    ]
                }
            }
            FractionRule::CvmaListening => {
                if f >= 1.0 {
                    vec![vec![Constraint::ge("listen: u", Expr::var("u"), Expr::c(1.0 - r / 2.0))]]
                } else {
                    vec![vec![Constraint::eq(
                        "listen: u",
                        Expr::var("u"),
                        Expr::c(1.0 - r / (2.0 * f)),
                    )]]
                }
            }
        }
    }
}

/// An outage region `O^+` at a given rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutageRegionSpec {
    pub name: String,
    pub scenario: Scenario,
    /// The multiplexing gain the region was built for.
    pub r: f64,
    /// `None` when no constraint depends on `f`.
    pub fraction: Option<FractionRule>,
    pub constraints: Vec<Constraint>,
}

impl OutageRegionSpec {
    /// Checks that every variable exists in the scenario and that `f`
    /// dependence is matched by a fraction rule.
    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() || self.r < 0.0 {
            return Err(Error::domain("region rate", self.r, "[0, inf)"));
        }
        for c in &self.constraints {
            for side in [&c.lhs, &c.rhs] {
                for v in side.variables() {
                    if self.scenario.index_of(v).is_none() {
                        return Err(Error::InvalidArgument(format!(
                            "constraint `{}` uses unknown variable `{v}` for {:?}",
                            c.label, self.scenario
                        )));
                    }
                }
                if self.fraction.is_none() && depends_on_f(side) {
                    return Err(Error::InvalidArgument(format!(
                        "constraint `{}` depends on f but the region has no fraction rule",
                        c.label
                    )));
                }
            }
        }
        match self.fraction {
            Some(FractionRule::MarListening) if self.scenario != Scenario::Mar => Err(
                Error::InvalidArgument("MAR listening rule on a non-MAR region".into()),
            ),
            Some(FractionRule::CvmaListening) if self.scenario != Scenario::Cvma => Err(
                Error::InvalidArgument("CVMA listening rule on a non-CVMA region".into()),
            ),
            Some(FractionRule::Fixed { value }) if !(0.0..=1.0).contains(&value) => {
                Err(Error::domain("fixed listening fraction", value, "[0, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// Whether some constraint mentions the variable at `index`.
    pub fn uses_variable(&self, index: usize) -> bool {
        let name = self.scenario.variables()[index];
        let in_rule = match self.fraction {
            Some(FractionRule::MarListening) => index >= 3,
            Some(FractionRule::CvmaListening) => index == 4,
            _ => false,
        };
        in_rule
            || self
                .constraints
                .iter()
                .any(|c| c.lhs.variables().contains(&name) || c.rhs.variables().contains(&name))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: OutageRegionSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

fn depends_on_f(e: &Expr) -> bool {
    match e {
        Expr::Const { .. } | Expr::Var { .. } => false,
        Expr::Add { terms } | Expr::Min { args: terms } | Expr::Max { args: terms } => {
            terms.iter().any(depends_on_f)
        }
        Expr::Scale { coef, expr } => coef.per_fraction != 0.0 || depends_on_f(expr),
        Expr::Pos { expr } => depends_on_f(expr),
    }
}

fn check_rate(name: &'static str, r: f64, hi: f64) -> Result<()> {
    if !(r.is_finite() && (0.0..=hi).contains(&r)) {
        return Err(Error::domain(name, r, format!("[0, {hi}]")));
    }
    Ok(())
}

/// `f (1 - v1)^+ + (1 - f)(1 - min{v1, vr})^+ <= r/2`
pub fn region_mar_type1(r: f64) -> Result<OutageRegionSpec> {
    check_rate("r", r, 1.0)?;
    let lhs = Expr::add(vec![
        Expr::scale_f(0.0, 1.0, Expr::one_minus_pos(Expr::var("v1"))),
        Expr::scale_f(
            1.0,
            -1.0,
            Expr::one_minus_pos(Expr::min(vec![Expr::var("v1"), Expr::var("vr")])),
        ),
    ]);
    Ok(OutageRegionSpec {
        name: "mar_type1".into(),
        scenario: Scenario::Mar,
        r,
        fraction: Some(FractionRule::MarListening),
        constraints: vec![Constraint::le("type-1 outage", lhs, Expr::c(r / 2.0))],
    })
}

/// `f (1 - min{v1,v2})^+ + (1 - f)(1 - min{v1,v2,vr})^+ <= r`
pub fn region_mar_type12(r: f64) -> Result<OutageRegionSpec> {
    check_rate("r", r, 1.0)?;
    let lhs = Expr::add(vec![
        Expr::scale_f(
            0.0,
            1.0,
            Expr::one_minus_pos(Expr::min(vec![Expr::var("v1"), Expr::var("v2")])),
        ),
        Expr::scale_f(
            1.0,
            -1.0,
            Expr::one_minus_pos(Expr::min(vec![
                Expr::var("v1"),
                Expr::var("v2"),
                Expr::var("vr"),
            ])),
        ),
    ]);
    Ok(OutageRegionSpec {
        name: "mar_type12".into(),
        scenario: Scenario::Mar,
        r,
        fraction: Some(FractionRule::MarListening),
        constraints: vec![Constraint::le("type-12 outage", lhs, Expr::c(r))],
    })
}

/// `1 - v_kl - (1 - v_k'l)^+`: exponent of the SINR of source `k` at
/// antenna `l` with the other source as interference.
fn sinr_order(signal: &str, interference: &str) -> Expr {
    Expr::sub(
        Expr::sub(Expr::c(1.0), Expr::var(signal)),
        Expr::one_minus_pos(Expr::var(interference)),
    )
}

/// The superior pair has the largest SINR exponent of the four.
pub fn superior_labeling_constraint() -> Constraint {
    Constraint::ge(
        "superior labeling",
        sinr_order("v_ss", "v_is"),
        Expr::max(vec![
            sinr_order("v_si", "v_ii"),
            sinr_order("v_is", "v_ss"),
            sinr_order("v_ii", "v_si"),
        ]),
    )
}

fn cvma_region(
    name: &str,
    r1: f64,
    fraction: Option<FractionRule>,
    mut constraints: Vec<Constraint>,
) -> OutageRegionSpec {
    constraints.push(superior_labeling_constraint());
    OutageRegionSpec {
        name: name.into(),
        scenario: Scenario::Cvma,
        r: r1,
        fraction,
        constraints,
    }
}

fn inferior_pair_min() -> Expr {
    Expr::min(vec![Expr::var("v_is"), Expr::var("v_ii")])
}

/// Inferior decode with the superior user relaying:
/// `(1+f)(1 - min{v_is,v_ii})^+ + (1-f)(1 - min{all four})^+ <= r1/2`.
pub fn region_cvma_inferior(r1: f64) -> Result<OutageRegionSpec> {
    check_rate("r1", r1, 2.0)?;
    let lhs = Expr::add(vec![
        Expr::scale_f(1.0, 1.0, Expr::one_minus_pos(inferior_pair_min())),
        Expr::scale_f(
            1.0,
            -1.0,
            Expr::one_minus_pos(Expr::min(vec![
                Expr::var("v_ss"),
                Expr::var("v_si"),
                Expr::var("v_is"),
                Expr::var("v_ii"),
            ])),
        ),
    ]);
    Ok(cvma_region(
        "cvma_inferior",
        r1,
        Some(FractionRule::CvmaListening),
        vec![Constraint::le("inferior outage", lhs, Expr::c(r1 / 2.0))],
    ))
}

fn ji_constraint(r1: f64) -> Constraint {
    Constraint::le(
        "joint decode, inferior in error",
        Expr::one_minus_pos(inferior_pair_min()),
        Expr::c(r1 / 4.0),
    )
}

fn js_constraint(r1: f64) -> Constraint {
    Constraint::le(
        "joint decode, superior in error",
        Expr::one_minus_pos(Expr::min(vec![Expr::var("v_ss"), Expr::var("v_si")])),
        Expr::c(r1 / 4.0),
    )
}

fn s1_constraint(r1: f64) -> Constraint {
    Constraint::le(
        "first-round superior decode fails",
        Expr::pos(sinr_order("v_ss", "v_is")),
        Expr::c(r1 / 2.0),
    )
}

/// `(1 - min{v_is, v_ii})^+ <= r1/4`
pub fn region_cvma_ji(r1: f64) -> Result<OutageRegionSpec> {
    check_rate("r1", r1, 2.0)?;
    Ok(cvma_region("cvma_ji", r1, None, vec![ji_constraint(r1)]))
}

/// `(1 - min{v_ss, v_si})^+ <= r1/4`
pub fn region_cvma_js(r1: f64) -> Result<OutageRegionSpec> {
    check_rate("r1", r1, 2.0)?;
    Ok(cvma_region("cvma_js", r1, None, vec![js_constraint(r1)]))
}

/// `(1 - v_ss - (1 - v_is)^+)^+ <= r1/2`
pub fn region_cvma_s1(r1: f64) -> Result<OutageRegionSpec> {
    check_rate("r1", r1, 2.0)?;
    Ok(cvma_region("cvma_s1", r1, None, vec![s1_constraint(r1)]))
}

/// Superior decode failed in round one and the joint decode errs on the
/// inferior message only.
pub fn region_cvma_sji(r1: f64) -> Result<OutageRegionSpec> {
    check_rate("r1", r1, 2.0)?;
    Ok(cvma_region(
        "cvma_sji",
        r1,
        None,
        vec![ji_constraint(r1), s1_constraint(r1)],
    ))
}

/// Superior decode failed in round one and the joint decode errs on the
/// superior message only. The superior-decode constraint is implied by the
/// labeling and omitted; [`region_cvma_sjs_full`] keeps it.
pub fn region_cvma_sjs(r1: f64) -> Result<OutageRegionSpec> {
    check_rate("r1", r1, 2.0)?;
    Ok(cvma_region("cvma_sjs", r1, None, vec![js_constraint(r1)]))
}

pub fn region_cvma_sjs_full(r1: f64) -> Result<OutageRegionSpec> {
    check_rate("r1", r1, 2.0)?;
    Ok(cvma_region(
        "cvma_sjs_full",
        r1,
        None,
        vec![js_constraint(r1), s1_constraint(r1)],
    ))
}

/// Conjunction of two regions over the same scenario and rate. Duplicate
/// constraints are kept once.
pub fn intersect(a: &OutageRegionSpec, b: &OutageRegionSpec) -> Result<OutageRegionSpec> {
    if a.scenario != b.scenario || a.r != b.r {
        return Err(Error::InvalidArgument(
            "can only intersect regions of the same scenario and rate".into(),
        ));
    }
    let fraction = match (a.fraction, b.fraction) {
        (x, None) => x,
        (None, y) => y,
        (Some(x), Some(y)) if x == y => Some(x),
        _ => {
            return Err(Error::InvalidArgument(
                "regions use different fraction rules".into(),
            ))
        }
    };
    let mut constraints = a.constraints.clone();
    for c in &b.constraints {
        if !constraints.contains(c) {
            constraints.push(c.clone());
        }
    }
    Ok(OutageRegionSpec {
        name: format!("{}&{}", a.name, b.name),
        scenario: a.scenario,
        r: a.r,
        fraction,
        constraints,
    })
}

/// Objective `sum_k w_k x_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub weights: [f64; 5],
}

impl Objective {
    /// Sum of all five orders.
    pub fn sum() -> Self {
        Objective { weights: [1.0; 5] }
    }

    pub fn eval(&self, x: &[f64; 5]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum()
    }
}
