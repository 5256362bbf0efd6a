use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::pipeline::collect_sample;
use super::{prepare, utility_surface, Prepared, Scenario, SimError, UtilitySurface};
use crate::game::{
    actions_to_mask, follower_equilibrium, lower_stage_equilibrium_with, mask_to_actions, quality_to_budget_floor,
    regret, DistortionProfile, FollowerOutcome, FollowerSpec, GameError, LowerStageOptions, ValueTable,
};
use crate::privacy::{noise_scales, PrivacyBudget};
use crate::rng::replicate_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    NoShare,
    PartialShare,
    FullShare,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::NoShare => "no_share",
            Region::PartialShare => "partial_share",
            Region::FullShare => "full_share",
        }
    }
}

/// Follower response to one leader threshold vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub d: Vec<f64>,
    /// Budget floors; `None` when some threshold is unattainable.
    pub floors: Option<Vec<f64>>,
    pub region: Region,
    pub share_prob: Vec<f64>,
    /// Budgets of the sharers (all-share budgets under a mixed outcome).
    pub eps: Vec<f64>,
    /// Expected delay reduction the leader obtains, s/veh.
    pub leader_value: f64,
    /// Set when the budget iteration or the mixed search failed and a
    /// minimum-regret grid point was used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub leader_choice: Vec<f64>,
    pub region: Region,
    pub share_prob: Vec<f64>,
    pub eps: Vec<f64>,
    pub leader_value: f64,
    /// `c_k` in the distortion profile `Φ_k(ε) = c_k/ε`, m/s.
    pub distortion_scale: Vec<f64>,
    pub regions: Vec<RegionRow>,
}

/// Expected absolute slope error at unit budget for each provider,
/// `√(2/π)` times the released-slope standard deviation averaged over the
/// movements it observes, measured on the first Monte Carlo sample. The
/// standard deviation scales as `1/ε`, so `Φ_k(ε) = c_k/ε`.
pub fn distortion_scales(prep: &Prepared) -> Result<Vec<f64>, SimError> {
    let scn = &prep.scenario;
    let data = collect_sample(prep, replicate_seed(scn.mc.seed, 0))?;
    let eps_ref = 0.5;
    let sc = noise_scales(&scn.weights()?, &PrivacyBudget::new(eps_ref, scn.dp.delta)?)?;
    data.iter()
        .enumerate()
        .map(|(k, per_mov)| {
            let sds: Vec<f64> = per_mov
                .iter()
                .filter(|(s, _)| s.lam_t > 0.0)
                .map(|(s, _)| {
                    let psi = s.lam_th / s.lam_t;
                    (sc.th.powi(2) + psi * psi * sc.t.powi(2)).sqrt() / s.lam_t
                })
                .collect();
            if sds.is_empty() {
                return super::config_err(&format!("mps[{k}].penetration"), "provider observes no queue points");
            }
            Ok((2.0 / PI).sqrt() * eps_ref * sds.iter().sum::<f64>() / sds.len() as f64)
        })
        .collect()
}

/// Builds the surface and plays the game on it.
pub fn run_game(scn: &Scenario) -> Result<(UtilitySurface, GameReport), SimError> {
    let surface = utility_surface(scn)?;
    let report = run_game_on(scn, &surface)?;
    Ok((surface, report))
}

/// Classifies every leader grid point and picks the leader-optimal one
/// (first on ties). Provider `k` values `κ_k` times the interpolated delay
/// reduction and pays `β_k` per unit budget; a threshold no budget can meet
/// leaves that grid point without sharing.
pub fn run_game_on(scn: &Scenario, surface: &UtilitySurface) -> Result<GameReport, SimError> {
    let prep = prepare(scn)?;
    let scales = distortion_scales(&prep)?;
    let profiles: Vec<DistortionProfile> = scales.iter().map(|&c| DistortionProfile::new(move |e| c / e)).collect();
    let surf = Arc::new(surface.clone());
    let k = scn.mps.len();

    let mut regions = Vec::new();
    for d in scn.leader_grid() {
        let floors: Result<Vec<f64>, GameError> =
            d.iter().zip(&profiles).map(|(&dk, p)| quality_to_budget_floor(dk, p)).collect();
        let floors = match floors {
            Ok(f) => f,
            Err(GameError::Infeasible { .. }) => {
                regions.push(RegionRow {
                    d,
                    floors: None,
                    region: Region::NoShare,
                    share_prob: vec![0.0; k],
                    eps: vec![0.0; k],
                    leader_value: 0.0,
                    fallback: false,
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let followers: Vec<FollowerSpec> = scn
            .mps
            .iter()
            .enumerate()
            .map(|(i, mp)| {
                let s = Arc::clone(&surf);
                let kappa = mp.kappa;
                FollowerSpec::new(i, move |z: &[f64]| kappa * s.interpolate(z)).with_beta(mp.beta).with_floor(floors[i])
            })
            .collect();
        let (table, mut fallback) = value_table(&followers, &surface.axes)?;
        let leader = |_: &[bool], z: &[f64]| surf.interpolate(z);
        let (outcome, value) = match follower_equilibrium(&table, &leader) {
            Ok(r) => r,
            Err(GameError::NotFound) => {
                fallback = true;
                let a = least_regret_profile(&table);
                let z = table.z_star[actions_to_mask(&a)].clone();
                let v = leader(&a, &z);
                (FollowerOutcome::Pure(crate::game::ActionProfile { active: a, z }), v)
            }
            Err(e) => return Err(e.into()),
        };
        let share_prob = outcome.share_probabilities();
        let (region, eps) = match &outcome {
            FollowerOutcome::Pure(p) => {
                let n = p.active.iter().filter(|&&a| a).count();
                let r = if n == 0 {
                    Region::NoShare
                } else if n == k {
                    Region::FullShare
                } else {
                    Region::PartialShare
                };
                (r, p.z.clone())
            }
            FollowerOutcome::Mixed(_) => (Region::PartialShare, table.z_star[(1 << k) - 1].clone()),
        };
        regions.push(RegionRow { d, floors: Some(floors), region, share_prob, eps, leader_value: value, fallback });
    }

    let mut best = 0;
    for (i, r) in regions.iter().enumerate() {
        if r.leader_value > regions[best].leader_value {
            best = i;
        }
    }
    let b = &regions[best];
    Ok(GameReport {
        leader_choice: b.d.clone(),
        region: b.region,
        share_prob: b.share_prob.clone(),
        eps: b.eps.clone(),
        leader_value: b.leader_value,
        distortion_scale: scales,
        regions,
    })
}

fn value_table(followers: &[FollowerSpec], axes: &[Vec<f64>]) -> Result<(ValueTable, bool), SimError> {
    let k = followers.len();
    let opts = LowerStageOptions { check_concavity: false, max_iterations: 2000, ..Default::default() };
    let mut values = Vec::with_capacity(1 << k);
    let mut z_star = Vec::with_capacity(1 << k);
    let mut fallback = false;
    for mask in 0..1usize << k {
        let active = mask_to_actions(mask, k);
        let z = match lower_stage_equilibrium_with(followers, &active, &opts) {
            Ok(z) => z,
            Err(GameError::NonConvergence { residual, .. }) => {
                log::warn!("budget iteration for {active:?} stalled (residual {residual:e}); using the least-regret grid point");
                fallback = true;
                least_regret_budgets(followers, &active, axes)
            }
            Err(e) => return Err(e.into()),
        };
        values.push((0..k).map(|i| followers[i].payoff(i, &z)).collect());
        z_star.push(z);
    }
    Ok((ValueTable { followers: k, values, z_star }, fallback))
}

fn least_regret_budgets(followers: &[FollowerSpec], active: &[bool], axes: &[Vec<f64>]) -> Vec<f64> {
    let cands: Vec<Vec<f64>> = followers
        .iter()
        .zip(active)
        .zip(axes)
        .map(|((f, &a), axis)| {
            if !a {
                return vec![0.0];
            }
            let mut c = vec![f.floor];
            c.extend(axis.iter().copied().filter(|&e| e > f.floor));
            c.push(1.0);
            c.dedup();
            c
        })
        .collect();
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    for c in &cands {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                c.iter().map(move |&v| {
                    let mut p = p.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    let worst = |z: &Vec<f64>| {
        (0..z.len())
            .map(|i| {
                let here = followers[i].payoff(i, z);
                cands[i]
                    .iter()
                    .map(|&c| {
                        let mut t = z.clone();
                        t[i] = c;
                        followers[i].payoff(i, &t) - here
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    let mut best = pts[0].clone();
    let mut best_r = worst(&best);
    for p in pts.into_iter().skip(1) {
        let r = worst(&p);
        if r < best_r {
            best_r = r;
            best = p;
        }
    }
    best
}

fn least_regret_profile(table: &ValueTable) -> Vec<bool> {
    let mut best = mask_to_actions(0, table.followers);
    let mut best_r = f64::INFINITY;
    for a in table.profiles_lexicographic() {
        let probs: Vec<f64> = a.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect();
        let r = regret(table, &probs);
        if r < best_r {
            best_r = r;
            best = a;
        }
    }
    best
}
