//! Release of a two-parameter line `h = ψt + γ`.
//!
//! Queue curves with an upstream discharge segment need an intercept, so the
//! four-component query is widened to `(Σt, Σh, Σth, Σt², Σh², N)` with the
//! same Gaussian recipe: per-point sensitivities `t_max`, `h_max`,
//! `t_max·h_max`, `t_max²`, `h_max²`, `1` and balanced weights.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::mechanism::gaussian_sigma;
use super::reconstruct::Reconstruction;
use super::{FoQBounds, FoQDataset, FoQPoint, PrivacyBudget, PrivacyError};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtendedStats {
    pub sum_t: f64,
    pub sum_h: f64,
    pub sum_th: f64,
    pub sum_t2: f64,
    pub sum_h2: f64,
    pub n: f64,
}

/// Noise standard deviations in field order of [`ExtendedStats`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ExtendedNoise {
    pub sd: [f64; 6],
}

impl ExtendedStats {
    pub fn from_dataset(ds: &FoQDataset, bounds: &FoQBounds) -> Result<Self, PrivacyError> {
        let mut s = ExtendedStats::default();
        for (index, p) in ds.points.iter().enumerate() {
            if !bounds.contains(p) {
                return Err(PrivacyError::OutOfBounds { index, t: p.t, h: p.h });
            }
            s.sum_t += p.t;
            s.sum_h += p.h;
            s.sum_th += p.t * p.h;
            s.sum_t2 += p.t * p.t;
            s.sum_h2 += p.h * p.h;
        }
        s.n = ds.points.len() as f64;
        Ok(s)
    }

    fn to_array(self) -> [f64; 6] {
        [self.sum_t, self.sum_h, self.sum_th, self.sum_t2, self.sum_h2, self.n]
    }

    fn from_array(a: [f64; 6]) -> Self {
        ExtendedStats { sum_t: a[0], sum_h: a[1], sum_th: a[2], sum_t2: a[3], sum_h2: a[4], n: a[5] }
    }

    /// Least-squares `(ψ, γ, σ²)` with `σ²` over `n − 2` degrees of freedom.
    pub fn line_fit(&self) -> Option<(f64, f64, f64)> {
        let n = self.n;
        let sxx = self.sum_t2 - self.sum_t * self.sum_t / n;
        if !(n > 2.0) || !(sxx > 0.0) {
            return None;
        }
        let sxy = self.sum_th - self.sum_t * self.sum_h / n;
        let syy = self.sum_h2 - self.sum_h * self.sum_h / n;
        let slope = sxy / sxx;
        let intercept = (self.sum_h - slope * self.sum_t) / n;
        let sigma2 = ((syy - slope * sxy) / (n - 2.0)).max(0.0);
        Some((slope, intercept, sigma2))
    }

    /// Delta-method variance of the fitted slope induced by independent
    /// noise of the given scales.
    pub fn slope_noise_variance(&self, noise: &ExtendedNoise) -> f64 {
        let base = self.to_array();
        let slope = |a: [f64; 6]| ExtendedStats::from_array(a).line_fit().map(|f| f.0);
        let mut var = 0.0;
        for i in 0..6 {
            if noise.sd[i] == 0.0 {
                continue;
            }
            let step = 1e-6 * base[i].abs().max(1.0);
            let (mut up, mut down) = (base, base);
            up[i] += step;
            down[i] -= step;
            if let (Some(a), Some(b)) = (slope(up), slope(down)) {
                let g = (a - b) / (2.0 * step);
                var += (g * noise.sd[i]).powi(2);
            }
        }
        var
    }
}

/// Perturbs extended statistics with balanced weights.
pub fn perturb_extended(
    stats: &ExtendedStats,
    bounds: &FoQBounds,
    pb: &PrivacyBudget,
    seed: u64,
) -> Result<(ExtendedStats, ExtendedNoise), PrivacyError> {
    let noise = extended_noise(bounds, pb)?;
    let mut rng = rng_from_seed(seed);
    let mut a = stats.to_array();
    for (v, sd) in a.iter_mut().zip(noise.sd) {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += sd * z;
    }
    Ok((ExtendedStats::from_array(a), noise))
}

fn extended_noise(bounds: &FoQBounds, pb: &PrivacyBudget) -> Result<ExtendedNoise, PrivacyError> {
    let (t, h) = (bounds.t_max, bounds.h_max);
    let sens = [t, h, t * h, t * t, h * h, 1.0];
    let rho = sens.map(|d| 1.0 / d);
    // every weighted component has unit sensitivity
    let delta_f = (sens.len() as f64).sqrt();
    let sigma_f = gaussian_sigma(delta_f, pb)?;
    let norm = rho.iter().map(|r| r * r).sum::<f64>().sqrt();
    Ok(ExtendedNoise { sd: rho.map(|r| sigma_f * r / norm) })
}

/// Synthetic points along the released line, `t` uniform on `t_range`.
pub fn reconstruct_extended(
    perturbed: &ExtendedStats,
    count_hint: usize,
    t_range: (f64, f64),
    bounds: &FoQBounds,
    seed: u64,
) -> Result<Reconstruction, PrivacyError> {
    let mut s = *perturbed;
    let mut degenerate = false;
    if !(s.n > 2.0) {
        s.n = 3.0;
        degenerate = true;
    }
    let (slope, intercept, sigma2) =
        s.line_fit().ok_or_else(|| PrivacyError::DegenerateStats("perturbed design has no spread in t".into()))?;
    let cap = (10 * count_hint.max(1)).max(3) as f64;
    let count = s.n.round().clamp(3.0, cap) as usize;
    let sd = sigma2.sqrt();
    let (lo, hi) = (t_range.0.max(0.0), t_range.1.min(bounds.t_max));
    let mut rng = rng_from_seed(seed);
    let points = (0..count)
        .map(|_| {
            let t = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let xi: f64 = StandardNormal.sample(&mut rng);
            bounds.clamp(FoQPoint::new(t, slope * t + intercept + sd * xi))
        })
        .collect();
    Ok(Reconstruction { dataset: FoQDataset::new(0, 0, points), slope, sigma2, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fit() {
        let pts = (1..=5).map(|i| FoQPoint::new(i as f64, -2.0 * i as f64 - 5.0)).collect();
        let s = ExtendedStats::from_dataset(&FoQDataset::new(0, 0, pts), &FoQBounds::default()).unwrap();
        let (psi, gamma, s2) = s.line_fit().unwrap();
        assert!((psi + 2.0).abs() < 1e-12);
        assert!((gamma + 5.0).abs() < 1e-12);
        assert!(s2 < 1e-12);
    }

    #[test]
    fn noise_variance_scales_with_budget() {
        let pts = (0..40).map(|i| FoQPoint::new(10.0 + i as f64 * 0.5, -20.0 - 1.5 * i as f64 * 0.5)).collect();
        let b = FoQBounds { t_max: 60.0, h_max: 150.0 };
        let s = ExtendedStats::from_dataset(&FoQDataset::new(0, 0, pts), &b).unwrap();
        let loose = extended_noise(&b, &PrivacyBudget { eps: 0.9, delta: 0.05 }).unwrap();
        let tight = extended_noise(&b, &PrivacyBudget { eps: 0.1, delta: 0.05 }).unwrap();
        let (vl, vt) = (s.slope_noise_variance(&loose), s.slope_noise_variance(&tight));
        assert!(vt > vl);
        assert!((vt / vl - 81.0).abs() < 1e-3);
    }

    #[test]
    fn reconstruction_follows_released_line() {
        let s =
            ExtendedStats { sum_t: 100.0, sum_h: -300.0, sum_th: -3_500.0, sum_t2: 1_200.0, sum_h2: 11_000.0, n: 10.0 };
        let (psi, gamma, _) = s.line_fit().unwrap();
        let r = reconstruct_extended(&s, 10, (5.0, 15.0), &FoQBounds::default(), 2).unwrap();
        assert_eq!(r.slope, psi);
        assert!(r.dataset.points.iter().all(|p| p.t >= 5.0 && p.t <= 15.0));
        let _ = gamma;
    }
}
