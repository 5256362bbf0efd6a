//! Continuous lower stage: budgets of the active followers for a fixed
//! participation vector.

use rand::Rng;

use super::optimize::maximize_1d;
use super::{FollowerSpec, GameError};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone)]
pub struct LowerStageOptions {
    pub damping: f64,
    pub max_iterations: usize,
    /// Stop once every `|BR_k(z) - z_k|` is below this.
    pub tolerance: f64,
    /// Initial point; defaults to the middle of each feasible interval.
    pub start: Option<Vec<f64>>,
    pub check_concavity: bool,
}

impl Default for LowerStageOptions {
    fn default() -> Self {
        LowerStageOptions { damping: 0.5, max_iterations: 10_000, tolerance: 1e-8, start: None, check_concavity: true }
    }
}

/// Unique Nash point of the budget game with participation `active`.
///
/// Inactive coordinates are pinned to exactly zero; active ones live in
/// `[floor_k, 1]`.
pub fn lower_stage_equilibrium(followers: &[FollowerSpec], active: &[bool]) -> Result<Vec<f64>, GameError> {
    lower_stage_equilibrium_with(followers, active, &LowerStageOptions::default())
}

/// Damped Jacobi best-response iteration.
pub fn lower_stage_equilibrium_with(
    followers: &[FollowerSpec],
    active: &[bool],
    opts: &LowerStageOptions,
) -> Result<Vec<f64>, GameError> {
    if followers.len() != active.len() {
        return Err(GameError::InvalidInput(format!(
            "{} followers but {} participation flags",
            followers.len(),
            active.len()
        )));
    }
    for f in followers {
        f.validate()?;
    }
    let k = followers.len();
    let mut z: Vec<f64> = (0..k)
        .map(|i| {
            if !active[i] {
                0.0
            } else {
                let lo = followers[i].floor;
                match &opts.start {
                    Some(s) => s[i].clamp(lo, 1.0),
                    None => 0.5 * (lo + 1.0),
                }
            }
        })
        .collect();
    if !active.iter().any(|&a| a) {
        return Ok(z);
    }

    if opts.check_concavity {
        let bad = concavity_violations(followers, active, 0x5eed);
        if bad > 0 {
            log::warn!("{bad} sampled points violate own-coordinate concavity; equilibrium may not be unique");
        }
    }

    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let br: Vec<f64> = (0..k).map(|i| if active[i] { best_response(&followers[i], i, &z) } else { 0.0 }).collect();
        residual = br.iter().zip(&z).map(|(b, x)| (b - x).abs()).fold(0.0, f64::max);
        if residual < opts.tolerance {
            return Ok(br);
        }
        for i in 0..k {
            if active[i] {
                z[i] += opts.damping * (br[i] - z[i]);
            }
        }
    }
    Err(GameError::NonConvergence { iterations: opts.max_iterations, residual })
}

pub(crate) fn best_response(f: &FollowerSpec, own: usize, z: &[f64]) -> f64 {
    let lo = f.floor;
    if lo >= 1.0 {
        return 1.0;
    }
    let trial = std::cell::RefCell::new(z.to_vec());
    maximize_1d(
        |x| {
            let mut t = trial.borrow_mut();
            t[own] = x;
            f.payoff(own, &t)
        },
        lo,
        1.0,
    )
    .0
}

/// Counts sampled points where an active follower's payoff has a positive
/// second difference in its own coordinate (step `1e-4`, 100 points each).
pub fn concavity_violations(followers: &[FollowerSpec], active: &[bool], seed: u64) -> usize {
    const STEP: f64 = 1e-4;
    let mut rng = rng_from_seed(seed);
    let mut count = 0;
    for _ in 0..100 {
        let z: Vec<f64> =
            followers.iter().zip(active).map(|(f, &a)| if a { rng.random_range(f.floor..=1.0) } else { 0.0 }).collect();
        for (i, f) in followers.iter().enumerate() {
            if !active[i] || f.floor >= 1.0 {
                continue;
            }
            let x = z[i].clamp(f.floor + STEP, 1.0 - STEP);
            let mut p = z.clone();
            let mut at = |v: f64| {
                p[i] = v;
                f.payoff(i, &p)
            };
            let (lo, mid, hi) = (at(x - STEP), at(x), at(x + STEP));
            let second = lo - 2.0 * mid + hi;
            if second > 1e-12 * (1.0 + mid.abs()) {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_pair(c: [f64; 2], floor: f64) -> Vec<FollowerSpec> {
        (0..2)
            .map(|k| {
                let ck = c[k];
                FollowerSpec::new(k, move |z: &[f64]| (z[0] + z[1] + 1.0).ln() - ck * z[k]).with_floor(floor)
            })
            .collect()
    }

    #[test]
    fn two_player_log_game() {
        // 1/(s+1) = 0.5 gives z1 = 1 - z2; follower 2 sits at its floor.
        let z = lower_stage_equilibrium(&log_pair([0.5, 0.8], 0.1), &[true, true]).unwrap();
        assert!((z[0] - 0.9).abs() < 1e-7, "{z:?}");
        assert!((z[1] - 0.1).abs() < 1e-7, "{z:?}");
    }

    #[test]
    fn nobody_active() {
        let z = lower_stage_equilibrium(&log_pair([0.5, 0.8], 0.1), &[false, false]).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
    }

    #[test]
    fn single_active_hits_upper_bound() {
        let f = vec![FollowerSpec::new(0, |z: &[f64]| (z[0] + 1.0).ln() - 0.5 * z[0]).with_floor(0.1)];
        let z = lower_stage_equilibrium(&f, &[true]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inactive_coordinate_is_exact_zero() {
        let z = lower_stage_equilibrium(&log_pair([0.5, 0.8], 0.1), &[true, false]).unwrap();
        assert_eq!(z[1], 0.0);
        assert!((z[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_convergence_is_reported() {
        // Best response flips between the ends of [0,1] around z_other = 0.5.
        let f: Vec<FollowerSpec> = (0..2)
            .map(|k| {
                FollowerSpec::new(k, move |z: &[f64]| {
                    let other = z[1 - k];
                    let sign = if k == 0 { 1.0 } else { -1.0 };
                    sign * (other - 0.5) * z[k]
                })
            })
            .collect();
        let opts = LowerStageOptions {
            max_iterations: 200,
            check_concavity: false,
            start: Some(vec![0.9, 0.9]),
            ..Default::default()
        };
        assert!(matches!(
            lower_stage_equilibrium_with(&f, &[true, true], &opts),
            Err(GameError::NonConvergence { .. })
        ));
    }

    #[test]
    fn concavity_check_flags_convex_payoff() {
        let f = vec![FollowerSpec::new(0, |z: &[f64]| z[0] * z[0])];
        assert!(concavity_violations(&f, &[true], 1) > 0);
        let g = vec![FollowerSpec::new(0, |z: &[f64]| -(z[0] * z[0]))];
        assert_eq!(concavity_violations(&g, &[true], 1), 0);
    }
}
