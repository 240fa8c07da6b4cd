//! The `lambda` functions: inner infima over the channel orders at a fixed
//! listening fraction `f`.
//!
//! `lambda_type1` / `lambda_type12` are the infima of `v1 + v2 + vr` over the
//! type-{1} and type-{1,2} outage sets, `lambda_sources` is the infimum of
//! `u1 + u2` compatible with a given `f`. The CVMA pair plays the same role
//! for the inferior user.

use crate::error::{Error, Result};

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(name, x, "[0, 1]"));
    }
    Ok(())
}

fn check_f(f: f64) -> Result<()> {
    check_unit("listening fraction f", f)
}

pub fn lambda_type1(f: f64, r: f64) -> Result<f64> {
    check_f(f)?;
    check_unit("r", r)?;
    Ok(if f < 0.5 {
        2.0 - r
    } else if f < 1.0 - r / 2.0 {
        2.0 - r / (2.0 * (1.0 - f))
    } else {
        (2.0 - r) / (2.0 * f)
    })
}

pub fn lambda_type12(f: f64, r: f64) -> Result<f64> {
    check_f(f)?;
    check_unit("r", r)?;
    let two_thirds = 2.0 / 3.0;
    Ok(if f < two_thirds {
        3.0 * (1.0 - r)
    } else if r < 1.0 / 3.0 && f < 1.0 - r {
        3.0 - r / (1.0 - f)
    } else {
        2.0 * (1.0 - r) / f
    })
}

/// Defined for `f >= r`. At `r = 0` the listening rule forces `f = 0`,
/// where the infimum is 0.
pub fn lambda_sources(f: f64, r: f64) -> Result<f64> {
    check_f(f)?;
    check_unit("r", r)?;
    if f < r {
        return Err(Error::domain("listening fraction f", f, format!("[{r}, 1]")));
    }
    if f == 0.0 {
        return Ok(0.0);
    }
    Ok(if f < 1.5 * r {
        2.0 * (1.0 - r / f)
    } else {
        1.0 - r / (2.0 * f)
    })
}

pub fn lambda_cvma_inferior(f: f64, r1: f64) -> Result<f64> {
    check_f(f)?;
    if !(0.0..2.0).contains(&r1) {
        return Err(Error::domain("r1", r1, "[0, 2)"));
    }
    Ok(if f < 1.0 - r1 / 2.0 {
        4.0 - r1 / (1.0 - f)
    } else {
        (4.0 - r1) / (1.0 + f)
    })
}

/// Infimum of `u` compatible with `f`; defined for `f >= r1/2`.
pub fn lambda_cvma_listen(f: f64, r1: f64) -> Result<f64> {
    check_f(f)?;
    if !(0.0..2.0).contains(&r1) {
        return Err(Error::domain("r1", r1, "[0, 2)"));
    }
    if f < r1 / 2.0 {
        return Err(Error::domain("listening fraction f", f, format!("[{}, 1]", r1 / 2.0)));
    }
    if f == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - r1 / (2.0 * f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaKind {
    Type1,
    Type12,
    Sources,
    CvmaInferior,
    CvmaListen,
}

impl LambdaKind {
    pub fn eval(self, f: f64, r: f64) -> Result<f64> {
        match self {
            LambdaKind::Type1 => lambda_type1(f, r),
            LambdaKind::Type12 => lambda_type12(f, r),
            LambdaKind::Sources => lambda_sources(f, r),
            LambdaKind::CvmaInferior => lambda_cvma_inferior(f, r),
            LambdaKind::CvmaListen => lambda_cvma_listen(f, r),
        }
    }
}

/// Values of `f` in `(0, 1)` where the function switches branch.
pub fn lambda_breakpoints(kind: LambdaKind, r: f64) -> Vec<f64> {
    let raw = match kind {
        LambdaKind::Type1 => vec![0.5, 1.0 - r / 2.0],
        LambdaKind::Type12 if r < 1.0 / 3.0 => vec![2.0 / 3.0, 1.0 - r],
        LambdaKind::Type12 => vec![2.0 / 3.0],
        LambdaKind::Sources => vec![1.5 * r],
        LambdaKind::CvmaInferior => vec![1.0 - r / 2.0],
        LambdaKind::CvmaListen => vec![],
    };
    raw.into_iter().filter(|&x| x > 0.0 && x < 1.0).collect()
}
