//! Query statistics and the Gaussian mechanism.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{FoQBounds, FoQDataset, PrivacyBudget, PrivacyError, QueryStats, SensitivityWeights, SlopeDistribution};
use crate::rng::rng_from_seed;

/// Exact sums over `ds`; every point must lie within `bounds`.
///
/// ```
/// use datacollab::privacy::{query_stats, FoQBounds, FoQDataset, FoQPoint};
/// let ds = FoQDataset::new(0, 0, vec![FoQPoint::new(2.0, -5.0), FoQPoint::new(4.0, -10.0)]);
/// let s = query_stats(&ds, &FoQBounds::default()).unwrap();
/// assert_eq!((s.lam_t, s.lam_th, s.lam_h, s.n), (20.0, -50.0, 125.0, 2.0));
/// ```
pub fn query_stats(ds: &FoQDataset, bounds: &FoQBounds) -> Result<QueryStats, PrivacyError> {
    let mut s = QueryStats::default();
    for (index, p) in ds.points.iter().enumerate() {
        if !bounds.contains(p) {
            return Err(PrivacyError::OutOfBounds { index, t: p.t, h: p.h });
        }
        s.lam_t += p.t * p.t;
        s.lam_th += p.t * p.h;
        s.lam_h += p.h * p.h;
    }
    s.n = ds.points.len() as f64;
    Ok(s)
}

/// Weighted l2 sensitivity `Δ_f` of the four-component query.
pub fn l2_sensitivity(w: &SensitivityWeights) -> f64 {
    w.rho().iter().zip(w.component_sensitivities()).map(|(r, d)| (r * d).powi(2)).sum::<f64>().sqrt()
}

/// `σ = Δ_f·sqrt(2 ln(1.25/δ))/ε`.
pub fn gaussian_sigma(delta_f: f64, pb: &PrivacyBudget) -> Result<f64, PrivacyError> {
    pb.validate()?;
    Ok(delta_f * (2.0 * (1.25 / pb.delta).ln()).sqrt() / pb.eps)
}

/// Noise standard deviation applied to each released statistic:
/// `σ_f·ρ_l/‖ρ‖`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseScales {
    pub sigma_f: f64,
    pub t: f64,
    pub th: f64,
    pub h: f64,
    pub n: f64,
}

impl NoiseScales {
    pub fn zero() -> Self {
        NoiseScales::default()
    }
}

pub fn noise_scales(w: &SensitivityWeights, pb: &PrivacyBudget) -> Result<NoiseScales, PrivacyError> {
    w.validate()?;
    let sigma_f = gaussian_sigma(l2_sensitivity(w), pb)?;
    let norm = w.rho().iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(NoiseScales {
        sigma_f,
        t: sigma_f * w.rho_t / norm,
        th: sigma_f * w.rho_th / norm,
        h: sigma_f * w.rho_h / norm,
        n: sigma_f * w.rho_n / norm,
    })
}

/// Releases `stats` under `(ε, δ)`. Draws are taken in the order
/// `lam_t, lam_th, lam_h, n` from a generator seeded with `seed`.
pub fn perturb_stats(
    stats: &QueryStats,
    w: &SensitivityWeights,
    pb: &PrivacyBudget,
    seed: u64,
) -> Result<QueryStats, PrivacyError> {
    let scales = noise_scales(w, pb)?;
    Ok(perturb_with(stats, &scales, &mut rng_from_seed(seed)))
}

/// Adds independent centered Gaussian noise with the given scales.
pub fn perturb_with<R: Rng + ?Sized>(stats: &QueryStats, scales: &NoiseScales, rng: &mut R) -> QueryStats {
    let mut draw = |sd: f64| {
        let z: f64 = StandardNormal.sample(rng);
        sd * z
    };
    QueryStats {
        lam_t: stats.lam_t + draw(scales.t),
        lam_th: stats.lam_th + draw(scales.th),
        lam_h: stats.lam_h + draw(scales.h),
        n: stats.n + draw(scales.n),
    }
}

/// Large-sample law of `lam_th/lam_t` under the mechanism: centered at the
/// supplied ratio, with variance `(σ_TH² + ψ²σ_T²)/Λ_T²` where `Λ_T` is
/// `reference_lam_t`.
pub fn slope_distribution(
    stats: &QueryStats,
    reference_lam_t: f64,
    scales: &NoiseScales,
) -> Result<SlopeDistribution, PrivacyError> {
    if !(stats.lam_t > 0.0) {
        return Err(PrivacyError::DegenerateStats(format!("lam_t = {} is not positive", stats.lam_t)));
    }
    if !(reference_lam_t > 0.0) {
        return Err(PrivacyError::DegenerateStats(format!("reference lam_t = {reference_lam_t} is not positive")));
    }
    let mean = stats.lam_th / stats.lam_t;
    let variance = (scales.th.powi(2) + mean * mean * scales.t.powi(2)) / (reference_lam_t * reference_lam_t);
    Ok(SlopeDistribution { mean, variance })
}
