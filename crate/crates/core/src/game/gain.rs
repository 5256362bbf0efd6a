//! Quality thresholds, budget floors and the collaboration gain.

use super::optimize::maximize_1d;
use super::{DistortionProfile, FollowerSpec, GameError};

const FLOOR_TOL: f64 = 1e-10;

/// Smallest budget whose expected distortion meets the threshold `d`,
/// i.e. `Φ⁻¹(d)` by bisection on `(0, 1]`.
///
/// Returns `0` when every budget meets `d`, and [`GameError::Infeasible`]
/// when even the full budget does not.
///
/// ```
/// use datacollab::game::{quality_to_budget_floor, DistortionProfile};
/// let phi = DistortionProfile::new(|e| 1.0 / e);
/// let floor = quality_to_budget_floor(2.0, &phi).unwrap();
/// assert!((floor - 0.5).abs() < 1e-9);
/// assert!(quality_to_budget_floor(0.5, &phi).is_err());
/// ```
pub fn quality_to_budget_floor(d: f64, prof: &DistortionProfile) -> Result<f64, GameError> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(GameError::InvalidInput(format!("quality threshold must be positive and finite, got {d}")));
    }
    let best = prof.eval(1.0);
    if d < best {
        return Err(GameError::Infeasible { d, best });
    }
    let mut lo = 1e-12;
    if prof.eval(lo) <= d {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    // invariant: Φ(lo) > d >= Φ(hi)
    while hi - lo > FLOOR_TOL {
        let mid = 0.5 * (lo + hi);
        if prof.eval(mid) > d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `max_{z_k ∈ [floor, 1]} Ū_k(z_k, z_-k) − Ū_k(0, z_-k)` for the follower at
/// position `own`. The entry `z_minus[own]` is ignored.
pub fn collaboration_gain(follower: &FollowerSpec, own: usize, floor: f64, z_minus: &[f64]) -> f64 {
    let mut z = z_minus.to_vec();
    z[own] = 0.0;
    let outside = follower.payoff(own, &z);
    let trial = std::cell::RefCell::new(z);
    let (_, inside) = maximize_1d(
        |x| {
            let mut t = trial.borrow_mut();
            t[own] = x;
            follower.payoff(own, &t)
        },
        floor,
        1.0,
    );
    inside - outside
}

/// First follower whose gain against an all-silent field is positive. When
/// one exists, nobody sharing cannot be a follower equilibrium.
pub fn sufficient_condition_check(followers: &[FollowerSpec], floors: &[f64]) -> Option<usize> {
    let zeros = vec![0.0; followers.len()];
    followers
        .iter()
        .zip(floors)
        .enumerate()
        .find(|(k, (f, &phi))| collaboration_gain(f, *k, phi, &zeros) > 0.0)
        .map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_follower(cost: f64) -> FollowerSpec {
        FollowerSpec::new(0, move |z: &[f64]| (z[0] + 1.0).ln() - cost * z[0])
    }

    #[test]
    fn floor_inverse_and_clamp() {
        let inv = DistortionProfile::new(|e| 1.0 / e);
        assert!((quality_to_budget_floor(2.0, &inv).unwrap() - 0.5).abs() < 1e-10);
        let lin = DistortionProfile::new(|e| 2.0 - e);
        assert_eq!(quality_to_budget_floor(2.5, &lin).unwrap(), 0.0);
        assert!(matches!(quality_to_budget_floor(0.5, &inv), Err(GameError::Infeasible { .. })));
    }

    #[test]
    fn gain_at_interior_and_at_floor() {
        let g = collaboration_gain(&log_follower(0.5), 0, 0.1, &[0.0]);
        assert!((g - (2f64.ln() - 0.5)).abs() < 1e-9);
        let g = collaboration_gain(&log_follower(2.0), 0, 0.1, &[0.0]);
        assert!((g - (1.1f64.ln() - 0.2)).abs() < 1e-9);
    }

    #[test]
    fn singleton_budget() {
        let f = FollowerSpec::new(0, |z: &[f64]| -z[0]);
        assert!((collaboration_gain(&f, 0, 1.0, &[0.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sufficient_condition() {
        let follower = |k: usize, c: f64| FollowerSpec::new(k, move |z: &[f64]| (z[k] + 1.0).ln() - c * z[k]);
        let mixed = vec![follower(0, 2.0), follower(1, 0.5)];
        assert_eq!(sufficient_condition_check(&mixed, &[0.1, 0.1]), Some(1));
        let reluctant = vec![follower(0, 2.0), follower(1, 2.0)];
        assert_eq!(sufficient_condition_check(&reluctant, &[0.1, 0.1]), None);
        assert_eq!(sufficient_condition_check(&[], &[]), None);
    }
}
