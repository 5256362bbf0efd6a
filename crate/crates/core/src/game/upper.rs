//! Binary upper stage: payoff table, pure and mixed equilibria, and the
//! decreasing-differences diagnostic.

use rayon::prelude::*;

use super::lower::{lower_stage_equilibrium_with, LowerStageOptions};
use super::{mask_to_actions, FollowerSpec, GameError, MixedProfile, ValueTable, MAX_FOLLOWERS};

const NE_SLACK: f64 = 1e-12;
const MIXED_REGRET_TOL: f64 = 1e-6;

/// Payoff table `V_k(a) = U_k(z*(a))` over every participation vector.
///
/// Inactive followers enter the lower stage with `z = 0`, so nothing ascribed
/// to a non-participant can leak into the table.
pub fn upper_stage_value_table(followers: &[FollowerSpec]) -> Result<ValueTable, GameError> {
    upper_stage_value_table_with(followers, &LowerStageOptions::default())
}

pub fn upper_stage_value_table_with(
    followers: &[FollowerSpec],
    opts: &LowerStageOptions,
) -> Result<ValueTable, GameError> {
    let k = followers.len();
    if k > MAX_FOLLOWERS {
        return Err(GameError::TooManyFollowers { count: k, max: MAX_FOLLOWERS });
    }
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..1usize << k)
        .into_par_iter()
        .map(|mask| {
            let active = mask_to_actions(mask, k);
            let z = lower_stage_equilibrium_with(followers, &active, opts)?;
            let v = (0..k).map(|i| followers[i].payoff(i, &z)).collect();
            Ok((v, z))
        })
        .collect::<Result<_, GameError>>()?;
    let (values, z_star) = rows.into_iter().unzip();
    Ok(ValueTable { followers: k, values, z_star })
}

/// All pure equilibria of the participation game, in lexicographic order.
pub fn pure_ne(table: &ValueTable) -> Vec<Vec<bool>> {
    let k = table.followers;
    table
        .profiles_lexicographic()
        .into_iter()
        .filter(|a| {
            let mask = super::actions_to_mask(a);
            (0..k).all(|i| table.values[mask][i] >= table.values[mask ^ (1 << i)][i] - NE_SLACK)
        })
        .collect()
}

/// Expected payoff of every follower under independent mixing `probs`.
pub fn expected_payoffs(table: &ValueTable, probs: &[f64]) -> Vec<f64> {
    let k = table.followers;
    let mut out = vec![0.0; k];
    for (mask, row) in table.values.iter().enumerate() {
        let w = profile_weight(mask, probs);
        if w == 0.0 {
            continue;
        }
        for i in 0..k {
            out[i] += w * row[i];
        }
    }
    out
}

/// Largest gain any follower gets from switching to its best pure action.
pub fn regret(table: &ValueTable, probs: &[f64]) -> f64 {
    let base = expected_payoffs(table, probs);
    let mut worst: f64 = 0.0;
    for i in 0..table.followers {
        let mut p = probs.to_vec();
        p[i] = 1.0;
        let one = expected_payoffs(table, &p)[i];
        p[i] = 0.0;
        let zero = expected_payoffs(table, &p)[i];
        worst = worst.max(one.max(zero) - base[i]);
    }
    worst
}

fn profile_weight(mask: usize, probs: &[f64]) -> f64 {
    probs.iter().enumerate().map(|(i, &p)| if (mask >> i) & 1 == 1 { p } else { 1.0 - p }).product()
}

/// `E[V_i | a_i = 1] - E[V_i | a_i = 0]` with everyone else mixing by `probs`.
fn switching_gain(table: &ValueTable, i: usize, probs: &[f64]) -> f64 {
    let mut p = probs.to_vec();
    p[i] = 1.0;
    let one = expected_payoffs(table, &p)[i];
    p[i] = 0.0;
    let zero = expected_payoffs(table, &p)[i];
    one - zero
}

/// A product-mixture equilibrium of the participation game (up to three
/// followers).
///
/// Pure equilibria are returned first when they exist. Otherwise supports are
/// enumerated: with two mixers each indifference condition is linear in the
/// other's probability; with three, two conditions are eliminated in closed
/// form and the last is root-bracketed on a grid that is refined until a
/// candidate with regret below `1e-6` appears.
pub fn mixed_ne(table: &ValueTable) -> Result<MixedProfile, GameError> {
    let k = table.followers;
    if k > 3 {
        return Err(GameError::TooManyFollowers { count: k, max: 3 });
    }
    if let Some(a) = pure_ne(table).into_iter().next() {
        let probs: Vec<f64> = a.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect();
        let r = regret(table, &probs);
        return Ok(MixedProfile { probs, regret: r });
    }

    // each follower: 0 = pure off, 1 = pure on, 2 = mixing
    let patterns = 3usize.pow(k as u32);
    for refinement in 0..3 {
        let grid = 2_000 * 10usize.pow(refinement);
        for code in 0..patterns {
            let roles: Vec<u8> = (0..k).map(|i| ((code / 3usize.pow(i as u32)) % 3) as u8).collect();
            let mixers: Vec<usize> = (0..k).filter(|&i| roles[i] == 2).collect();
            if mixers.len() < 2 {
                continue;
            }
            let base: Vec<f64> = roles
                .iter()
                .map(|&r| match r {
                    1 => 1.0,
                    2 => 0.5,
                    _ => 0.0,
                })
                .collect();
            let candidates = match mixers.len() {
                2 => solve_two_mixers(table, &base, mixers[0], mixers[1]),
                _ => solve_three_mixers(table, &base, [mixers[0], mixers[1], mixers[2]], grid),
            };
            for probs in candidates {
                let r = regret(table, &probs);
                if r < MIXED_REGRET_TOL {
                    return Ok(MixedProfile { probs, regret: r });
                }
            }
        }
    }
    Err(GameError::NotFound)
}

fn solve_two_mixers(table: &ValueTable, base: &[f64], i: usize, j: usize) -> Vec<Vec<f64>> {
    // gain_i is affine in p_j and vice versa
    let root = |who: usize, other: usize| -> Option<f64> {
        let mut p = base.to_vec();
        p[other] = 0.0;
        let g0 = switching_gain(table, who, &p);
        p[other] = 1.0;
        let g1 = switching_gain(table, who, &p);
        let slope = g1 - g0;
        if slope.abs() < 1e-15 {
            return None;
        }
        let x = -g0 / slope;
        (-1e-12..=1.0 + 1e-12).contains(&x).then(|| x.clamp(0.0, 1.0))
    };
    match (root(i, j), root(j, i)) {
        (Some(pj), Some(pi)) => {
            let mut p = base.to_vec();
            p[i] = pi;
            p[j] = pj;
            vec![p]
        }
        _ => Vec::new(),
    }
}

fn solve_three_mixers(table: &ValueTable, base: &[f64], m: [usize; 3], grid: usize) -> Vec<Vec<f64>> {
    let [a, b, c] = m;
    // For a given p_c: gain_a(p_b, p_c) = 0 fixes p_b, then gain_c(p_a, p_b) = 0
    // fixes p_a; the residual is gain_b at that point.
    let affine_root = |who: usize, var: usize, p: &[f64]| -> Option<f64> {
        let mut q = p.to_vec();
        q[var] = 0.0;
        let g0 = switching_gain(table, who, &q);
        q[var] = 1.0;
        let g1 = switching_gain(table, who, &q);
        let slope = g1 - g0;
        if slope.abs() < 1e-15 {
            return None;
        }
        let x = -g0 / slope;
        (-1e-9..=1.0 + 1e-9).contains(&x).then(|| x.clamp(0.0, 1.0))
    };
    let eval = |pc: f64| -> Option<(f64, Vec<f64>)> {
        let mut p = base.to_vec();
        p[c] = pc;
        p[b] = affine_root(a, b, &p)?;
        p[a] = affine_root(c, a, &p)?;
        Some((switching_gain(table, b, &p), p))
    };

    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for s in 0..=grid {
        let x = s as f64 / grid as f64;
        let cur = eval(x).map(|(r, _)| (x, r));
        if let (Some((x0, r0)), Some((x1, r1))) = (prev, cur) {
            if r0 == 0.0 {
                if let Some((_, p)) = eval(x0) {
                    out.push(p);
                }
            } else if r0.signum() != r1.signum() {
                let (mut lo, mut hi, mut rlo) = (x0, x1, r0);
                let mut ok = true;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    match eval(mid) {
                        Some((rm, _)) => {
                            if rm.signum() == rlo.signum() {
                                lo = mid;
                                rlo = rm;
                            } else {
                                hi = mid;
                            }
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                    if hi - lo < 1e-15 {
                        break;
                    }
                }
                if ok {
                    if let Some((_, p)) = eval(0.5 * (lo + hi)) {
                        out.push(p);
                    }
                }
            }
        }
        prev = cur;
    }
    out
}

/// Outcome of [`decreasing_differences_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecreasingDifferences {
    pub holds: bool,
    /// Largest `[V_k(1,1_l) - V_k(1,0_l)] - [V_k(0,1_l) - V_k(0,0_l)]` seen.
    pub worst_violation: f64,
    /// `(k, l, context mask)` attaining the worst value.
    pub worst_at: Option<(usize, usize, usize)>,
}

/// Checks that `V_k` has decreasing differences in `(a_k, a_l)` for every
/// pair `k != l` and every setting of the remaining followers.
pub fn decreasing_differences_check(table: &ValueTable) -> DecreasingDifferences {
    let k = table.followers;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = None;
    for own in 0..k {
        for other in 0..k {
            if other == own {
                continue;
            }
            for ctx in 0..1usize << k {
                if ctx & (1 << own) != 0 || ctx & (1 << other) != 0 {
                    continue;
                }
                let v = |a_own: bool, a_other: bool| {
                    let mut m = ctx;
                    if a_own {
                        m |= 1 << own;
                    }
                    if a_other {
                        m |= 1 << other;
                    }
                    table.values[m][own]
                };
                let with_own = v(true, true) - v(true, false);
                let without_own = v(false, true) - v(false, false);
                let gap = with_own - without_own;
                if gap > worst {
                    worst = gap;
                    worst_at = Some((own, other, ctx));
                }
            }
        }
    }
    if worst_at.is_none() {
        worst = 0.0;
    }
    DecreasingDifferences { holds: worst <= 1e-9, worst_violation: worst, worst_at }
}
