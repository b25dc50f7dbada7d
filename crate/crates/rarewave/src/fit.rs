//! Least-squares helpers for rate measurements in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One fitted line log y = slope * log x + intercept.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-space regression.
    pub residual: f64,
}

/// Ordinary least squares of log y against log x.
///
/// When the predictor is (numerically) constant the regression is singular;
/// in that case the fit degenerates to a constancy check: if the measured
/// values are constant within 10% the slope is reported as 1, otherwise the
/// fit is rejected.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<FitLine> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 paired samples, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys.iter()).any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("log fit needs strictly positive samples".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx < 1e-12 {
        let spread = ys.iter().cloned().fold(f64::MIN, f64::max)
            / ys.iter().cloned().fold(f64::MAX, f64::min);
        if spread <= 1.10 {
            return Ok(FitLine {
                slope: 1.0,
                intercept: my - mx,
                residual: spread - 1.0,
            });
        }
        return Err(Error::Fit(format!(
            "constant predictor but measured values spread by {spread:.3}"
        )));
    }
    let sxy: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(FitLine {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Fit y = C eps^alpha |ln eps|^beta with beta held fixed: least squares of
/// log(y / |ln eps|^beta) against log eps. Returns (alpha, C, residual).
pub fn fit_rate(eps: &[f64], ys: &[f64], beta_fixed: f64) -> Result<(f64, f64, f64)> {
    if eps.len() != ys.len() || eps.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 paired samples, got {} and {}",
            eps.len(),
            ys.len()
        )));
    }
    let adjusted: Vec<f64> = eps
        .iter()
        .zip(ys)
        .map(|(e, y)| y / e.ln().abs().powf(beta_fixed))
        .collect();
    let line = log_log_fit(eps, &adjusted)?;
    Ok((line.slope, line.intercept.exp(), line.residual))
}

/// Observed order of convergence from two errors under step halving.
pub fn observed_order(err_coarse: f64, err_fine: f64) -> f64 {
    (err_coarse / err_fine).log2()
}
