//! Line fits on front-of-queue points.

use serde::{Deserialize, Serialize};

use super::TrafficError;
use crate::privacy::FoQDataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionEstimate {
    /// Fitted slope; for [`fit_case2a`] this is the supplied slope.
    pub slope: f64,
    pub intercept: Option<f64>,
    /// Residual variance `σ̂²`.
    pub sigma2: f64,
    pub slope_variance: f64,
    pub intercept_variance: Option<f64>,
    pub n: usize,
}

/// Line through the origin: `ψ̂ = Λ_TH/Λ_T`,
/// `σ̂² = (Λ_H − Λ_TH²/Λ_T)/(N − 1)` and slope variance `σ̂²/Λ_T`.
///
/// ```
/// use datacollab::privacy::{FoQDataset, FoQPoint};
/// use datacollab::traffic::fit_case1;
/// let ds = FoQDataset::new(0, 0, vec![FoQPoint::new(2.0, -5.0), FoQPoint::new(4.0, -10.0)]);
/// let fit = fit_case1(&ds).unwrap();
/// assert_eq!(fit.slope, -2.5);
/// assert_eq!(fit.slope_variance, 0.0);
/// ```
pub fn fit_case1(ds: &FoQDataset) -> Result<RegressionEstimate, TrafficError> {
    let n = ds.len();
    if n < 2 {
        return Err(TrafficError::InsufficientData { n, need: 2 });
    }
    let (mut lt, mut lth, mut lh) = (0.0, 0.0, 0.0);
    for p in &ds.points {
        lt += p.t * p.t;
        lth += p.t * p.h;
        lh += p.h * p.h;
    }
    if !(lt > 0.0) {
        return Err(TrafficError::SingularDesign);
    }
    let slope = lth / lt;
    let sigma2 = ((lh - lth * lth / lt) / (n as f64 - 1.0)).max(0.0);
    Ok(RegressionEstimate { slope, intercept: None, sigma2, slope_variance: sigma2 / lt, intercept_variance: None, n })
}

/// Intercept of a line with known slope: `γ̂ = mean(h − slope·t)`, residual
/// variance over `N − 1` and intercept variance `σ̂²/N`.
pub fn fit_case2a(ds: &FoQDataset, slope: f64) -> Result<RegressionEstimate, TrafficError> {
    let n = ds.len();
    if n < 2 {
        return Err(TrafficError::InsufficientData { n, need: 2 });
    }
    let nf = n as f64;
    let gamma = ds.points.iter().map(|p| p.h - slope * p.t).sum::<f64>() / nf;
    let sigma2 = ds.points.iter().map(|p| (p.h - slope * p.t - gamma).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(RegressionEstimate {
        slope,
        intercept: Some(gamma),
        sigma2,
        slope_variance: 0.0,
        intercept_variance: Some(sigma2 / nf),
        n,
    })
}

/// Ordinary least squares for `h = ψt + γ` with `σ̂²` over `N − 2`.
pub fn fit_case2b(ds: &FoQDataset) -> Result<RegressionEstimate, TrafficError> {
    let n = ds.len();
    if n < 3 {
        return Err(TrafficError::InsufficientData { n, need: 3 });
    }
    let nf = n as f64;
    let t_mean = ds.points.iter().map(|p| p.t).sum::<f64>() / nf;
    let h_mean = ds.points.iter().map(|p| p.h).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for p in &ds.points {
        let dt = p.t - t_mean;
        sxx += dt * dt;
        sxy += dt * (p.h - h_mean);
    }
    if !(sxx > 1e-12 * (1.0 + t_mean * t_mean) * nf) {
        return Err(TrafficError::SingularDesign);
    }
    let slope = sxy / sxx;
    let intercept = h_mean - slope * t_mean;
    let sse: f64 = ds.points.iter().map(|p| (p.h - slope * p.t - intercept).powi(2)).sum();
    let sigma2 = sse / (nf - 2.0);
    Ok(RegressionEstimate {
        slope,
        intercept: Some(intercept),
        sigma2,
        slope_variance: sigma2 / sxx,
        intercept_variance: Some(sigma2 * (1.0 / nf + t_mean * t_mean / sxx)),
        n,
    })
}
