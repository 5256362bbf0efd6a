//! Synthetic FoQ points regenerated from perturbed statistics.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{FoQBounds, FoQDataset, FoQPoint, PrivacyError, QueryStats};
use crate::rng::rng_from_seed;

/// Output of [`reconstruct_foq`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub dataset: FoQDataset,
    /// `ψ̃ = Λ̃_TH/Λ̃_T`.
    pub slope: f64,
    /// Residual variance `σ̃²` after clamping at zero.
    pub sigma2: f64,
    /// Set when the perturbed count or residual variance had to be clamped.
    pub degenerate: bool,
}

/// Regenerates FoQ points along `h = ψ̃t + ξ`, `ξ ~ N(0, σ̃²)`, with `t`
/// uniform on `[0, t_red]`.
///
/// Only the released statistics enter; `count_hint` (the provider's true
/// point count) merely caps the synthetic count at ten times its value.
/// A residual variance that perturbation drove negative is clamped to zero,
/// and a count below two is raised to two; both set `degenerate`.
pub fn reconstruct_foq(
    perturbed: &QueryStats,
    count_hint: usize,
    t_red: f64,
    bounds: &FoQBounds,
    seed: u64,
) -> Result<Reconstruction, PrivacyError> {
    if !(perturbed.lam_t > 0.0) {
        return Err(PrivacyError::DegenerateStats(format!("perturbed lam_t = {} is not positive", perturbed.lam_t)));
    }
    let mut degenerate = false;
    let mut n_tilde = perturbed.n;
    if !(n_tilde > 1.0) {
        n_tilde = 2.0;
        degenerate = true;
    }
    let slope = perturbed.lam_th / perturbed.lam_t;
    let mut sigma2 = (perturbed.lam_h - perturbed.lam_th * perturbed.lam_th / perturbed.lam_t) / (n_tilde - 1.0);
    if !(sigma2 >= 0.0) {
        sigma2 = 0.0;
        degenerate = true;
    }
    let cap = (10 * count_hint.max(1)).max(2) as f64;
    let count = n_tilde.round().clamp(2.0, cap) as usize;

    let t_hi = t_red.min(bounds.t_max).max(0.0);
    let sd = sigma2.sqrt();
    let mut rng = rng_from_seed(seed);
    let points = (0..count)
        .map(|_| {
            let t = if t_hi > 0.0 { rng.random_range(0.0..=t_hi) } else { 0.0 };
            let xi: f64 = StandardNormal.sample(&mut rng);
            bounds.clamp(FoQPoint::new(t, slope * t + sd * xi))
        })
        .collect();
    Ok(Reconstruction { dataset: FoQDataset::new(0, 0, points), slope, sigma2, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_stats(slope: f64, ts: &[f64]) -> QueryStats {
        QueryStats {
            lam_t: ts.iter().map(|t| t * t).sum(),
            lam_th: ts.iter().map(|t| slope * t * t).sum(),
            lam_h: ts.iter().map(|t| (slope * t).powi(2)).sum(),
            n: ts.len() as f64,
        }
    }

    #[test]
    fn noiseless_line_is_reproduced() {
        let ts: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let s = line_stats(-2.5, &ts);
        let r = reconstruct_foq(&s, 20, 20.0, &FoQBounds::default(), 1).unwrap();
        assert_eq!(r.dataset.len(), 20);
        // floating cancellation leaves σ̃² at rounding level
        assert!(r.sigma2 < 1e-9);
        for p in &r.dataset.points {
            assert!((p.h + 2.5 * p.t).abs() < 1e-3);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = QueryStats { lam_t: 5000.0, lam_th: -12000.0, lam_h: 30000.0, n: 40.0 };
        let b = FoQBounds::default();
        assert_eq!(reconstruct_foq(&s, 40, 30.0, &b, 4).unwrap(), reconstruct_foq(&s, 40, 30.0, &b, 4).unwrap());
    }

    #[test]
    fn clamps_flagged() {
        // Cauchy-Schwarz violated: negative residual variance
        let s = QueryStats { lam_t: 100.0, lam_th: -300.0, lam_h: 800.0, n: 0.3 };
        let r = reconstruct_foq(&s, 10, 30.0, &FoQBounds::default(), 1).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.sigma2, 0.0);
        assert_eq!(r.dataset.len(), 2);
        let bad = QueryStats { lam_t: -1.0, ..s };
        assert!(reconstruct_foq(&bad, 10, 30.0, &FoQBounds::default(), 1).is_err());
    }

    #[test]
    fn count_is_capped() {
        let s = QueryStats { lam_t: 100.0, lam_th: -200.0, lam_h: 500.0, n: 1e6 };
        let r = reconstruct_foq(&s, 3, 30.0, &FoQBounds::default(), 1).unwrap();
        assert_eq!(r.dataset.len(), 30);
    }
}
