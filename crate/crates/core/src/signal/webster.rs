//! Webster cycle length and green splits, and the full timing policy.

use serde::{Deserialize, Serialize};

use super::maxband::{band_problem, maxband_solve, offsets_from_band, BandProblem, BandSolution};
use super::{ArterialGeometry, SignalError, SignalPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingOptions {
    pub c_min: f64,
    pub c_max: f64,
    pub min_green: f64,
    /// Exponent on the band weights.
    pub alpha: f64,
}

impl Default for TimingOptions {
    fn default() -> Self {
        TimingOptions { c_min: 40.0, c_max: 180.0, min_green: 5.0, alpha: 1.0 }
    }
}

/// `C = max_i (1.5 L_i + 5)/(1 − Y_i)`, clamped to `[c_min, c_max]`.
///
/// ```
/// use datacollab::signal::*;
/// let geom = ArterialGeometry {
///     intersections: vec![IntersectionGeom { lost_time: 12.0, phases: 2, e_out: 0.0, e_in: 0.0 }],
///     segment_lengths: vec![],
///     cruise_speed: 12.0,
///     movements: vec![
///         MovementGeom { intersection: 0, phase: 0, capacity: 1.0, direction: Direction::OutboundThrough },
///         MovementGeom { intersection: 0, phase: 0, capacity: 1.0, direction: Direction::InboundThrough },
///         MovementGeom { intersection: 0, phase: 1, capacity: 1.0, direction: Direction::Side },
///     ],
/// };
/// // critical ratios 0.5 and 0.1 sum to 0.6 with lost time 12 s
/// let c = webster_cycle(&[0.5, 0.3, 0.1], &geom, &TimingOptions::default()).unwrap();
/// assert_eq!(c, 57.5);
/// ```
pub fn webster_cycle(flows: &[f64], geom: &ArterialGeometry, opts: &TimingOptions) -> Result<f64, SignalError> {
    let ratios = geom.phase_ratios(flows);
    let mut c: f64 = 0.0;
    for (i, (x, r)) in geom.intersections.iter().zip(&ratios).enumerate() {
        let y: f64 = r.iter().sum();
        if y >= 1.0 {
            return Err(SignalError::Oversaturated { intersection: i, y });
        }
        c = c.max((1.5 * x.lost_time + 5.0) / (1.0 - y));
    }
    Ok(c.clamp(opts.c_min, opts.c_max))
}

/// Greens proportional to phase critical ratios over the effective green
/// `C − L_i`. Phases that would fall below the minimum green are pinned to it
/// and the rest is shared among the others. With no demand at all the
/// effective green is split evenly.
pub fn webster_splits(
    flows: &[f64],
    geom: &ArterialGeometry,
    cycle: f64,
    opts: &TimingOptions,
) -> Result<Vec<Vec<f64>>, SignalError> {
    let ratios = geom.phase_ratios(flows);
    geom.intersections
        .iter()
        .zip(ratios)
        .enumerate()
        .map(|(i, (x, r))| {
            let available = cycle - x.lost_time;
            let p = r.len();
            let needed = opts.min_green * p as f64;
            if needed > available + 1e-9 {
                return Err(SignalError::InfeasibleMinGreen { intersection: i, needed, available });
            }
            let weights: Vec<f64> = if r.iter().sum::<f64>() > 0.0 { r } else { vec![1.0; p] };
            let mut pinned = vec![false; p];
            loop {
                let free_green = available - opts.min_green * pinned.iter().filter(|&&b| b).count() as f64;
                let free_weight: f64 = (0..p).filter(|&k| !pinned[k]).map(|k| weights[k]).sum();
                let g: Vec<f64> = (0..p)
                    .map(|k| {
                        if pinned[k] {
                            opts.min_green
                        } else if free_weight > 0.0 {
                            free_green * weights[k] / free_weight
                        } else {
                            free_green / (0..p).filter(|&j| !pinned[j]).count() as f64
                        }
                    })
                    .collect();
                let newly: Vec<usize> = (0..p).filter(|&k| !pinned[k] && g[k] < opts.min_green).collect();
                if newly.is_empty() {
                    return Ok(g);
                }
                for k in newly {
                    pinned[k] = true;
                }
            }
        })
        .collect()
}

/// A complete timing plan with the band it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub plan: SignalPlan,
    pub band: BandSolution,
    pub problem: BandProblem,
    /// Set when some intersection was oversaturated and the maximum cycle
    /// was used instead of Webster's value.
    pub oversaturated: bool,
}

/// Webster cycle and splits followed by MAXBAND offsets.
///
/// With `tolerate_oversaturation` an intersection at or above capacity
/// yields the maximum cycle instead of an error.
pub fn build_plan(
    flows: &[f64],
    geom: &ArterialGeometry,
    opts: &TimingOptions,
    tolerate_oversaturation: bool,
) -> Result<PlanOutcome, SignalError> {
    geom.validate()?;
    let (cycle, oversaturated) = match webster_cycle(flows, geom, opts) {
        Ok(c) => (c, false),
        Err(SignalError::Oversaturated { .. }) if tolerate_oversaturation => (opts.c_max, true),
        Err(e) => return Err(e),
    };
    let greens = webster_splits(flows, geom, cycle, opts)?;
    let problem = band_problem(flows, geom, &greens, cycle, opts.alpha);
    let band = maxband_solve(&problem);
    let pair = offsets_from_band(&band, &problem, cycle);
    let mut offsets_s = vec![0.0];
    for o in pair {
        let prev = *offsets_s.last().unwrap();
        offsets_s.push((prev + o).rem_euclid(cycle));
    }
    Ok(PlanOutcome { plan: SignalPlan { cycle_s: cycle, greens, offsets_s }, band, problem, oversaturated })
}
