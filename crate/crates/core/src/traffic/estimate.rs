//! From shared FoQ data to a demand posterior.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::regression::{fit_case1, fit_case2b};
use super::{FundamentalDiagram, TrafficError};
use crate::privacy::{slope_distribution, FoQDataset, NoiseScales, QueryStats};
use crate::rng::rng_from_seed;

/// Precision-weighted combination of independent Gaussian estimates.
/// An estimate with zero variance is returned as is.
///
/// ```
/// use datacollab::traffic::fuse_estimates;
/// let (m, v) = fuse_estimates(&[(-2.0, 1.0), (-3.0, 1.0)]).unwrap();
/// assert_eq!((m, v), (-2.5, 0.5));
/// ```
pub fn fuse_estimates(estimates: &[(f64, f64)]) -> Result<(f64, f64), TrafficError> {
    if estimates.is_empty() {
        return Err(TrafficError::EmptyInput);
    }
    if let Some(&exact) = estimates.iter().find(|(_, v)| *v <= 0.0) {
        return Ok((exact.0, 0.0));
    }
    let precision: f64 = estimates.iter().map(|(_, v)| 1.0 / v).sum();
    let weighted: f64 = estimates.iter().map(|(m, v)| m / v).sum();
    let var = 1.0 / precision;
    Ok((var * weighted, var))
}

/// Per-lane arrival flow behind a queue shock of slope `psi`:
/// `q = ψ·v_f·k_j/(ψ − v_f)`.
pub fn slope_to_flow(psi: f64, fd: &FundamentalDiagram) -> Result<f64, TrafficError> {
    if !(psi < 0.0 && psi >= -fd.w * (1.0 + 1e-12)) {
        return Err(TrafficError::SlopeOutOfRange { psi, w: fd.w });
    }
    Ok(slope_to_flow_clamped(psi, fd))
}

/// [`slope_to_flow`] with the slope clamped into `[−w, 0]` first.
pub fn slope_to_flow_clamped(psi: f64, fd: &FundamentalDiagram) -> f64 {
    let psi = psi.clamp(-fd.w, 0.0);
    (psi * fd.v_f * fd.k_j / (psi - fd.v_f)).clamp(0.0, fd.q_c())
}

/// `dq/dψ = −v_f²·k_j/(ψ − v_f)²`, evaluated at the clamped slope.
pub fn slope_to_flow_derivative(psi: f64, fd: &FundamentalDiagram) -> f64 {
    let psi = psi.clamp(-fd.w, 0.0);
    -fd.v_f * fd.v_f * fd.k_j / (psi - fd.v_f).powi(2)
}

/// Shock slope produced by per-lane flow `q`.
pub fn flow_to_slope(q: f64, fd: &FundamentalDiagram) -> f64 {
    -q * fd.v_f / (fd.v_f * fd.k_j - q)
}

/// What one provider hands over for one movement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OwnerShare {
    /// Raw points, used by whoever already owns them.
    Points(FoQDataset),
    /// Released statistics with the public noise scales and the `Λ_T`
    /// used to scale the slope noise.
    Perturbed { stats: QueryStats, noise: NoiseScales, reference_lam_t: f64 },
    /// Synthetic points regenerated from a release, plus the slope variance
    /// the release noise adds on top of the regression variance.
    Synthetic { dataset: FoQDataset, dp_slope_variance: f64 },
}

/// Everything needed to estimate one movement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementInput {
    pub fd: FundamentalDiagram,
    pub lanes: u32,
    /// Only points with `t` at or after this time are fitted, as a line
    /// with intercept. `None` fits a line through the origin.
    pub segment_start: Option<f64>,
    pub shares: Vec<OwnerShare>,
    /// Fallback flow (veh/s, all lanes) when nothing usable was shared.
    pub prior_flow: f64,
    /// Standard deviation of the fallback, veh/s.
    pub prior_sd: f64,
    /// Also fold the prior into the posterior when data were shared, as one
    /// more Gaussian slope estimate.
    #[serde(default)]
    pub fuse_prior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandEstimate {
    pub slope_mean: f64,
    pub slope_variance: f64,
    /// Movement flow over all lanes, veh/s.
    pub flow: f64,
    pub flow_variance: f64,
    /// Movement capacity over all lanes, veh/s.
    pub capacity: f64,
    pub from_prior: bool,
    /// Owners whose share could not be used.
    pub dropped: usize,
}

fn share_slope(share: &OwnerShare, segment_start: Option<f64>) -> Option<(f64, f64)> {
    let fit = |ds: &FoQDataset| match segment_start {
        None => fit_case1(ds).ok(),
        Some(t0) => {
            let seg = FoQDataset::new(ds.movement, ds.owner, ds.points.iter().copied().filter(|p| p.t >= t0).collect());
            fit_case2b(&seg).ok()
        }
    };
    match share {
        OwnerShare::Points(ds) => fit(ds).map(|f| (f.slope, f.slope_variance)),
        OwnerShare::Synthetic { dataset, dp_slope_variance } => {
            fit(dataset).map(|f| (f.slope, f.slope_variance + dp_slope_variance))
        }
        OwnerShare::Perturbed { stats, noise, reference_lam_t } => {
            slope_distribution(stats, *reference_lam_t, noise).ok().map(|d| (d.mean, d.variance))
        }
    }
}

/// Fuses every owner's slope estimate per movement and maps the posterior to
/// flow, with the delta method for the variance. Movements without usable
/// data take their prior.
pub fn estimate_demands(movements: &[MovementInput]) -> Result<Vec<DemandEstimate>, TrafficError> {
    movements
        .iter()
        .map(|m| {
            m.fd.validate()?;
            let lanes = m.lanes.max(1) as f64;
            let capacity = m.fd.q_c() * lanes;
            let slopes: Vec<(f64, f64)> = m
                .shares
                .iter()
                .filter_map(|s| share_slope(s, m.segment_start))
                .filter(|(mean, var)| mean.is_finite() && var.is_finite())
                .collect();
            let dropped = m.shares.len() - slopes.len();
            let mut slopes = slopes;
            if !slopes.is_empty() && m.fuse_prior && m.prior_sd > 0.0 {
                let q_lane = (m.prior_flow / lanes).clamp(0.0, m.fd.q_c() * (1.0 - 1e-9));
                let psi = flow_to_slope(q_lane, &m.fd);
                let dq = slope_to_flow_derivative(psi, &m.fd);
                slopes.push((psi, (m.prior_sd / lanes / dq).powi(2)));
            }
            if slopes.is_empty() {
                let flow = m.prior_flow.clamp(0.0, capacity);
                return Ok(DemandEstimate {
                    slope_mean: flow_to_slope(flow / lanes, &m.fd),
                    slope_variance: f64::INFINITY,
                    flow,
                    flow_variance: m.prior_sd * m.prior_sd,
                    capacity,
                    from_prior: true,
                    dropped,
                });
            }
            let (slope_mean, slope_variance) = fuse_estimates(&slopes)?;
            let flow = lanes * slope_to_flow_clamped(slope_mean, &m.fd);
            let dq = lanes * slope_to_flow_derivative(slope_mean, &m.fd);
            Ok(DemandEstimate {
                slope_mean,
                slope_variance,
                flow,
                flow_variance: dq * dq * slope_variance,
                capacity,
                from_prior: false,
                dropped,
            })
        })
        .collect()
}

/// Independent Gaussian flow draws per movement, clamped to `[0, capacity]`.
pub fn sample_true_demand(est: &[DemandEstimate], n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..n_samples)
        .map(|_| {
            est.iter()
                .map(|e| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    (e.flow + e.flow_variance.sqrt() * z).clamp(0.0, e.capacity)
                })
                .collect()
        })
        .collect()
}
