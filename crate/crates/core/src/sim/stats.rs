use serde::Serialize;

use crate::error::{Error, Result};

pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    /// Slope of `log10 P` against `log10 rho`; negative for decaying curves.
    pub slope: f64,
    /// 95% half-width.
    pub ci95: f64,
    /// `(log10 rho, log10 P)`
    pub points: Vec<(f64, f64)>,
}

/// Input point for [`estimate_slope`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopePoint {
    pub snr_db: f64,
    pub p: f64,
    /// Standard error of `p`.
    pub std_err: f64,
    pub events: u64,
}

/// Ordinary least squares of `log10 P` on `log10 rho`. The interval
/// propagates the per-point standard errors through the delta method; the
/// regression residual is not used, so it reflects sampling noise only.
pub fn estimate_slope(points: &[SlopePoint], min_events: u64) -> Result<SlopeEstimate> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "slope needs at least 3 SNR points, got {}",
            points.len()
        )));
    }
    for (i, p) in points.iter().enumerate() {
        if p.events < min_events || p.p <= 0.0 {
            return Err(Error::InsufficientEvents {
                index: i,
                got: p.events,
                needed: min_events,
            });
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.snr_db / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.p.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope needs distinct SNR points".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let var: f64 = xs
        .iter()
        .zip(points)
        .map(|(x, p)| {
            let sy = p.std_err / (p.p * std::f64::consts::LN_10);
            (x - mx).powi(2) * sy * sy
        })
        .sum::<f64>()
        / (sxx * sxx);
    Ok(SlopeEstimate {
        slope,
        ci95: Z95 * var.sqrt(),
        points: xs.into_iter().zip(ys).collect(),
    })
}
