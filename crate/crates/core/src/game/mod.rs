//! Leader/follower game engine.
//!
//! Followers choose whether to share (`a_k`) and at what budget (`z_k`).
//! The follower game is solved in two stages: for a fixed participation
//! vector the continuous budgets settle at the unique Nash point of
//! [`lower_stage_equilibrium`]; the binary participation game is then read off
//! the resulting [`ValueTable`]. The leader enumerates a finite grid of
//! quality thresholds in [`solve_sne`].

pub mod counterexample;
mod gain;
mod lower;
mod optimize;
mod sne;
mod upper;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gain::{collaboration_gain, quality_to_budget_floor, sufficient_condition_check};
pub use lower::{concavity_violations, lower_stage_equilibrium, lower_stage_equilibrium_with, LowerStageOptions};
pub use optimize::maximize_1d;
pub use sne::{follower_equilibrium, solve_sne, solve_sne_with, FollowerOutcome, LeaderEvaluation, SneResult};
pub use upper::{
    decreasing_differences_check, expected_payoffs, mixed_ne, pure_ne, regret, upper_stage_value_table,
    upper_stage_value_table_with, DecreasingDifferences,
};

/// Largest follower count accepted by the `2^K` enumeration.
pub const MAX_FOLLOWERS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("quality threshold {d} is below the best attainable distortion {best}")]
    Infeasible { d: f64, best: f64 },
    #[error("lower-stage iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("no mixed equilibrium located by support enumeration")]
    NotFound,
    #[error("{count} followers exceeds the supported maximum of {max}")]
    TooManyFollowers { count: usize, max: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("every leader grid point is infeasible")]
    AllInfeasible,
}

pub type UtilityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One follower: a utility over the joint information vector `z`, a privacy
/// cost weight and a budget floor.
///
/// The payoff maximized by follower `k` is `utility(z) - beta * z[k]`.
#[derive(Clone)]
pub struct FollowerSpec {
    pub id: usize,
    pub beta: f64,
    pub utility: UtilityFn,
    pub floor: f64,
}

impl FollowerSpec {
    pub fn new<F>(id: usize, utility: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        FollowerSpec { id, beta: 0.0, utility: Arc::new(utility), floor: 0.0 }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// Net payoff of the follower sitting at position `own` of `z`.
    pub fn payoff(&self, own: usize, z: &[f64]) -> f64 {
        (self.utility)(z) - self.beta * z[own]
    }

    pub(crate) fn validate(&self) -> Result<(), GameError> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(GameError::InvalidInput(format!(
                "follower {}: beta must be finite and nonnegative, got {}",
                self.id, self.beta
            )));
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(GameError::InvalidInput(format!(
                "follower {}: floor must lie in [0, 1], got {}",
                self.id, self.floor
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for FollowerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FollowerSpec")
            .field("id", &self.id)
            .field("beta", &self.beta)
            .field("floor", &self.floor)
            .finish_non_exhaustive()
    }
}

/// Expected distortion as a function of the privacy budget; must be strictly
/// decreasing on `(0, 1]`.
#[derive(Clone)]
pub struct DistortionProfile {
    pub phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl DistortionProfile {
    pub fn new<F>(phi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DistortionProfile { phi: Arc::new(phi) }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        (self.phi)(eps)
    }
}

impl fmt::Debug for DistortionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DistortionProfile(..)")
    }
}

/// Participation and budgets. Inactive followers always carry `z = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProfile {
    pub active: Vec<bool>,
    pub z: Vec<f64>,
}

/// Independent mixing over participation; `probs[k]` is `P(a_k = 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub probs: Vec<f64>,
    pub regret: f64,
}

/// Upper-stage payoffs `V_k(a)` and lower-stage equilibria `z*(a)` for every
/// participation vector, indexed by bitmask (bit `k` is `a_k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable {
    pub followers: usize,
    pub values: Vec<Vec<f64>>,
    pub z_star: Vec<Vec<f64>>,
}

impl ValueTable {
    /// Builds a table straight from payoffs, with `z*` set to the actions.
    pub fn from_payoffs(followers: usize, values: Vec<Vec<f64>>) -> Result<Self, GameError> {
        if followers > MAX_FOLLOWERS {
            return Err(GameError::TooManyFollowers { count: followers, max: MAX_FOLLOWERS });
        }
        if values.len() != 1 << followers || values.iter().any(|v| v.len() != followers) {
            return Err(GameError::InvalidInput(format!(
                "payoff table for {followers} followers needs {} rows of {followers} values",
                1usize << followers
            )));
        }
        let z_star = (0..values.len())
            .map(|m| mask_to_actions(m, followers).into_iter().map(|a| if a { 1.0 } else { 0.0 }).collect())
            .collect();
        Ok(ValueTable { followers, values, z_star })
    }

    pub fn value(&self, active: &[bool]) -> &[f64] {
        &self.values[actions_to_mask(active)]
    }

    /// Participation vectors in lexicographic order, first follower most
    /// significant: `(0,0,0), (0,0,1), (0,1,0), ...`.
    pub fn profiles_lexicographic(&self) -> Vec<Vec<bool>> {
        let k = self.followers;
        (0..1usize << k).map(|i| (0..k).map(|j| (i >> (k - 1 - j)) & 1 == 1).collect()).collect()
    }
}

pub fn actions_to_mask(active: &[bool]) -> usize {
    active.iter().enumerate().fold(0, |m, (k, &a)| if a { m | (1 << k) } else { m })
}

pub fn mask_to_actions(mask: usize, followers: usize) -> Vec<bool> {
    (0..followers).map(|k| (mask >> k) & 1 == 1).collect()
}
