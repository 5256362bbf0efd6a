//! Differentially private release of front-of-queue statistics.
//!
//! A provider never ships raw points. It computes [`QueryStats`] over its
//! front-of-queue (FoQ) points, perturbs them with the Gaussian mechanism and
//! regenerates synthetic points from the perturbed statistics alone.

mod accounting;
mod extended;
mod mechanism;
mod reconstruct;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use accounting::{
    is_count_adjacent, is_trajectory_adjacent, removal_chain, traj_to_count_budget, traj_to_count_budget_with,
    DeltaBound,
};
pub use extended::{perturb_extended, reconstruct_extended, ExtendedNoise, ExtendedStats};
pub use mechanism::{
    gaussian_sigma, l2_sensitivity, noise_scales, perturb_stats, perturb_with, query_stats, slope_distribution,
    NoiseScales,
};
pub use reconstruct::{reconstruct_foq, Reconstruction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrivacyError {
    #[error("point {index} (t = {t}, h = {h}) lies outside the declared bounds")]
    OutOfBounds { index: usize, t: f64, h: f64 },
    #[error("privacy budget (eps = {eps}, delta = {delta}) must lie strictly inside (0, 1)")]
    BudgetOutOfRange { eps: f64, delta: f64 },
    #[error("degenerate statistics: {0}")]
    DegenerateStats(String),
    #[error("invalid sensitivity weights: {0}")]
    InvalidWeights(String),
}

/// A stopping event: `t` seconds after red onset, `h` meters upstream
/// (so `h <= 0`). Serialized as `[t, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct FoQPoint {
    pub t: f64,
    pub h: f64,
}

impl FoQPoint {
    pub fn new(t: f64, h: f64) -> Self {
        FoQPoint { t, h }
    }
}

impl From<[f64; 2]> for FoQPoint {
    fn from([t, h]: [f64; 2]) -> Self {
        FoQPoint { t, h }
    }
}

impl From<FoQPoint> for [f64; 2] {
    fn from(p: FoQPoint) -> Self {
        [p.t, p.h]
    }
}

/// Public clipping bounds; they fix the per-point sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoQBounds {
    pub t_max: f64,
    pub h_max: f64,
}

impl Default for FoQBounds {
    fn default() -> Self {
        FoQBounds { t_max: 120.0, h_max: 300.0 }
    }
}

impl FoQBounds {
    pub fn contains(&self, p: &FoQPoint) -> bool {
        p.h <= 0.0 && p.h >= -self.h_max && p.t >= 0.0 && p.t <= self.t_max
    }

    pub fn clamp(&self, p: FoQPoint) -> FoQPoint {
        FoQPoint { t: p.t.clamp(0.0, self.t_max), h: p.h.clamp(-self.h_max, 0.0) }
    }
}

/// Points one provider observed on one movement.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FoQDataset {
    pub movement: u32,
    pub owner: u32,
    pub points: Vec<FoQPoint>,
}

impl FoQDataset {
    pub fn new(movement: u32, owner: u32, points: Vec<FoQPoint>) -> Self {
        FoQDataset { movement, owner, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `Σt²`, `Σth`, `Σh²` and the count. After perturbation `n` is real-valued.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueryStats {
    pub lam_t: f64,
    pub lam_th: f64,
    pub lam_h: f64,
    pub n: f64,
}

impl QueryStats {
    /// `lam_th² <= lam_t·lam_h`, up to rounding. Always true before
    /// perturbation, frequently false after.
    pub fn cauchy_schwarz_holds(&self) -> bool {
        self.lam_th * self.lam_th <= self.lam_t * self.lam_h * (1.0 + 1e-12) + 1e-12
    }
}

/// Public weights `ρ` balancing the four query components, and the bounds
/// that set their sensitivities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityWeights {
    pub rho_t: f64,
    pub rho_th: f64,
    pub rho_h: f64,
    pub rho_n: f64,
    pub t_max: f64,
    pub h_max: f64,
}

impl SensitivityWeights {
    pub fn new(rho: [f64; 4], bounds: FoQBounds) -> Result<Self, PrivacyError> {
        let w = SensitivityWeights {
            rho_t: rho[0],
            rho_th: rho[1],
            rho_h: rho[2],
            rho_n: rho[3],
            t_max: bounds.t_max,
            h_max: bounds.h_max,
        };
        w.validate()?;
        Ok(w)
    }

    /// `ρ = (1/Δ_T, 1/Δ_TH, 1/Δ_H, 1)`: every component contributes a unit
    /// of weighted sensitivity.
    pub fn balanced(bounds: FoQBounds) -> Result<Self, PrivacyError> {
        let (t, h) = (bounds.t_max, bounds.h_max);
        Self::new([1.0 / (t * t), 1.0 / (t * h), 1.0 / (h * h), 1.0], bounds)
    }

    pub fn bounds(&self) -> FoQBounds {
        FoQBounds { t_max: self.t_max, h_max: self.h_max }
    }

    /// Per-component sensitivities `(Δ_T, Δ_TH, Δ_H, Δ_N)`.
    pub fn component_sensitivities(&self) -> [f64; 4] {
        [self.t_max * self.t_max, self.t_max * self.h_max, self.h_max * self.h_max, 1.0]
    }

    pub fn rho(&self) -> [f64; 4] {
        [self.rho_t, self.rho_th, self.rho_h, self.rho_n]
    }

    pub fn validate(&self) -> Result<(), PrivacyError> {
        let all = [self.rho_t, self.rho_th, self.rho_h, self.rho_n, self.t_max, self.h_max];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(PrivacyError::InvalidWeights(format!("weights and bounds must be positive and finite, got {all:?}")))
        }
    }
}

/// `(ε, δ)`, both strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub eps: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(eps: f64, delta: f64) -> Result<Self, PrivacyError> {
        let b = PrivacyBudget { eps, delta };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), PrivacyError> {
        let inside = |x: f64| x > 0.0 && x < 1.0;
        if inside(self.eps) && inside(self.delta) {
            Ok(())
        } else {
            Err(PrivacyError::BudgetOutOfRange { eps: self.eps, delta: self.delta })
        }
    }
}

/// Gaussian law of the slope recovered from perturbed statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeDistribution {
    pub mean: f64,
    pub variance: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_serializes_as_pair() {
        let p = FoQPoint::new(2.0, -5.0);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[2.0,-5.0]");
        let back: FoQPoint = serde_json::from_str("[2.0,-5.0]").unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn budget_bounds_are_open() {
        assert!(PrivacyBudget::new(0.5, 0.05).is_ok());
        assert!(PrivacyBudget::new(1.0, 0.05).is_err());
        assert!(PrivacyBudget::new(0.5, 0.0).is_err());
    }

    #[test]
    fn balanced_weights_equalize_sensitivity() {
        let w = SensitivityWeights::balanced(FoQBounds { t_max: 60.0, h_max: 150.0 }).unwrap();
        for (r, d) in w.rho().iter().zip(w.component_sensitivities()) {
            assert!((r * d - 1.0).abs() < 1e-12);
        }
    }
}
