//! Leader enumeration over a finite grid of quality thresholds.

use serde::{Deserialize, Serialize};

use super::gain::quality_to_budget_floor;
use super::lower::LowerStageOptions;
use super::upper::{mixed_ne, pure_ne, upper_stage_value_table_with};
use super::{
    actions_to_mask, mask_to_actions, ActionProfile, DistortionProfile, FollowerSpec, GameError, MixedProfile,
    ValueTable,
};

/// Follower response to one leader choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FollowerOutcome {
    Pure(ActionProfile),
    Mixed(MixedProfile),
}

impl FollowerOutcome {
    /// Probability that each follower shares.
    pub fn share_probabilities(&self) -> Vec<f64> {
        match self {
            FollowerOutcome::Pure(p) => p.active.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect(),
            FollowerOutcome::Mixed(m) => m.probs.clone(),
        }
    }
}

/// What happened at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderEvaluation {
    pub d: Vec<f64>,
    /// `None` when some threshold cannot be met even at full budget.
    pub floors: Option<Vec<f64>>,
    pub outcome: Option<FollowerOutcome>,
    pub leader_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SneResult {
    pub leader_choice: Vec<f64>,
    pub follower_profile: FollowerOutcome,
    pub leader_value: f64,
    pub evaluations: Vec<LeaderEvaluation>,
}

/// Solves the leader problem by enumerating `grid`.
///
/// `profiles[k]` maps follower `k`'s budget to expected distortion and
/// `leader_value(a, z)` scores a follower outcome for the leader. Grid points
/// that no follower budget can satisfy are skipped. Among pure follower
/// equilibria the one best for the leader is kept (ties go to the
/// lexicographically smallest participation vector); without one, the mixed
/// equilibrium is scored in expectation. Leader ties go to the earliest grid
/// point.
pub fn solve_sne<F>(
    grid: &[Vec<f64>],
    followers: &[FollowerSpec],
    profiles: &[DistortionProfile],
    leader_value: F,
) -> Result<SneResult, GameError>
where
    F: Fn(&[bool], &[f64]) -> f64,
{
    solve_sne_with(grid, followers, profiles, leader_value, &LowerStageOptions::default())
}

pub fn solve_sne_with<F>(
    grid: &[Vec<f64>],
    followers: &[FollowerSpec],
    profiles: &[DistortionProfile],
    leader_value: F,
    opts: &LowerStageOptions,
) -> Result<SneResult, GameError>
where
    F: Fn(&[bool], &[f64]) -> f64,
{
    let k = followers.len();
    if grid.is_empty() {
        return Err(GameError::InvalidInput("leader grid is empty".into()));
    }
    if profiles.len() != k {
        return Err(GameError::InvalidInput(format!("{k} followers but {} distortion profiles", profiles.len())));
    }

    let mut evaluations = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64, FollowerOutcome)> = None;
    for (gi, d) in grid.iter().enumerate() {
        if d.len() != k {
            return Err(GameError::InvalidInput(format!(
                "grid point {gi} has {} thresholds for {k} followers",
                d.len()
            )));
        }
        let floors = match floors_for(d, profiles) {
            Ok(f) => f,
            Err(GameError::Infeasible { d: dk, best }) => {
                log::debug!("grid point {gi} infeasible: threshold {dk} below {best}");
                evaluations.push(LeaderEvaluation { d: d.clone(), floors: None, outcome: None, leader_value: None });
                continue;
            }
            Err(e) => return Err(e),
        };
        let with_floors: Vec<FollowerSpec> =
            followers.iter().zip(&floors).map(|(f, &phi)| f.clone().with_floor(phi)).collect();
        let table = upper_stage_value_table_with(&with_floors, opts)?;
        let (outcome, value) = follower_equilibrium(&table, &leader_value)?;
        if best.as_ref().is_none_or(|(_, v, _)| value > *v) {
            best = Some((gi, value, outcome.clone()));
        }
        evaluations.push(LeaderEvaluation {
            d: d.clone(),
            floors: Some(floors),
            outcome: Some(outcome),
            leader_value: Some(value),
        });
    }

    let (gi, leader_value, follower_profile) = best.ok_or(GameError::AllInfeasible)?;
    Ok(SneResult { leader_choice: grid[gi].clone(), follower_profile, leader_value, evaluations })
}

fn floors_for(d: &[f64], profiles: &[DistortionProfile]) -> Result<Vec<f64>, GameError> {
    d.iter().zip(profiles).map(|(&dk, p)| quality_to_budget_floor(dk, p)).collect()
}

/// Follower equilibrium of a solved table, selected for the leader, with its
/// leader value.
pub fn follower_equilibrium<F>(table: &ValueTable, leader_value: &F) -> Result<(FollowerOutcome, f64), GameError>
where
    F: Fn(&[bool], &[f64]) -> f64,
{
    let mut chosen: Option<(Vec<bool>, f64)> = None;
    for a in pure_ne(table) {
        let v = leader_value(&a, &table.z_star[actions_to_mask(&a)]);
        if chosen.as_ref().is_none_or(|(_, best)| v > *best) {
            chosen = Some((a, v));
        }
    }
    if let Some((active, v)) = chosen {
        let z = table.z_star[actions_to_mask(&active)].clone();
        return Ok((FollowerOutcome::Pure(ActionProfile { active, z }), v));
    }

    let mixed = mixed_ne(table)?;
    let mut expected = 0.0;
    for (mask, z) in table.z_star.iter().enumerate() {
        let a = mask_to_actions(mask, table.followers);
        let w: f64 = a.iter().zip(&mixed.probs).map(|(&ai, &p)| if ai { p } else { 1.0 - p }).product();
        if w > 0.0 {
            expected += w * leader_value(&a, z);
        }
    }
    Ok((FollowerOutcome::Mixed(mixed), expected))
}
