//! Front-of-queue ground truth from shockwave kinematics.
//!
//! Vehicle `n` of a lane queue (zero-based) stops `n/k_j` meters upstream.
//! If it would have crossed the stop line at `τ_n` when travelling freely,
//! it reaches its stopping point `n/(k_j·v_f)` seconds earlier. With constant
//! arrivals `τ_n = n/q` the stopping points lie on `h = ψt` with
//! `ψ = −q·v_f/(v_f·k_j − q)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FundamentalDiagram, TrafficError};
use crate::privacy::{FoQDataset, FoQPoint};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ArrivalCase {
    /// Constant arrivals throughout red.
    Case1,
    /// Upstream discharge at capacity for `discharge` seconds after red
    /// onset, then constant arrivals.
    Case2 { discharge: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementConfig {
    /// Total arrival flow over all lanes, veh/s.
    pub demand: f64,
    pub lanes: u32,
    /// Effective red, seconds.
    pub red: f64,
    pub cycles: u32,
    /// Share of vehicles reporting trajectories.
    pub penetration: f64,
    pub case: ArrivalCase,
    /// Uniform jitter on each arrival, as a fraction of the headway.
    pub jitter: f64,
    /// Queue storage, meters; `None` disables the spillback check.
    pub link_length: Option<f64>,
}

impl MovementConfig {
    pub fn case1(demand: f64, red: f64, cycles: u32) -> Self {
        MovementConfig {
            demand,
            lanes: 1,
            red,
            cycles,
            penetration: 1.0,
            case: ArrivalCase::Case1,
            jitter: 0.1,
            link_length: None,
        }
    }

    fn validate(&self, fd: &FundamentalDiagram) -> Result<(), TrafficError> {
        fd.validate()?;
        let bad = |m: String| Err(TrafficError::InvalidConfig(m));
        if self.lanes == 0 {
            return bad("a movement needs at least one lane".into());
        }
        let per_lane = self.demand / self.lanes as f64;
        if !(per_lane > 0.0 && per_lane < fd.q_c()) {
            return bad(format!("per-lane demand {per_lane} veh/s must lie in (0, {})", fd.q_c()));
        }
        if !(self.red > 0.0) {
            return bad(format!("red must be positive, got {}", self.red));
        }
        if !(self.penetration >= 0.0 && self.penetration <= 1.0) {
            return bad(format!("penetration {} outside [0, 1]", self.penetration));
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return bad(format!("jitter {} outside [0, 1]", self.jitter));
        }
        if let ArrivalCase::Case2 { discharge } = self.case {
            if !(discharge >= 0.0) {
                return bad(format!("discharge duration {discharge} is negative"));
            }
        }
        Ok(())
    }
}

/// Time after red onset at which the capacity segment of a Case 2 queue
/// ends: `D·(1 − k_c/k_j)`.
pub fn case2_breakpoint(fd: &FundamentalDiagram, discharge: f64) -> f64 {
    discharge * (1.0 - fd.k_c() / fd.k_j)
}

/// FoQ points reported by a single fleet with the configured penetration.
pub fn simulate_foq(fd: &FundamentalDiagram, cfg: &MovementConfig, seed: u64) -> Result<FoQDataset, TrafficError> {
    let mut out = simulate_fleets(fd, cfg, &[cfg.penetration], seed)?;
    Ok(out.pop().unwrap_or_default())
}

/// FoQ points for several fleets sharing one traffic stream. Each vehicle
/// belongs to at most one fleet; fleet `k` holds a `shares[k]` fraction in
/// expectation. Cycles are folded onto one representative red interval.
pub fn simulate_fleets(
    fd: &FundamentalDiagram,
    cfg: &MovementConfig,
    shares: &[f64],
    seed: u64,
) -> Result<Vec<FoQDataset>, TrafficError> {
    cfg.validate(fd)?;
    let total: f64 = shares.iter().sum();
    if shares.iter().any(|&s| !(0.0..=1.0).contains(&s)) || total > 1.0 + 1e-12 {
        return Err(TrafficError::InvalidConfig(format!(
            "fleet shares {shares:?} must be nonnegative and sum to at most 1"
        )));
    }

    let q_lane = cfg.demand / cfg.lanes as f64;
    let q_sat = fd.q_c();
    let queue_time_shift = 1.0 / (fd.k_j * fd.v_f);
    let discharge = match cfg.case {
        ArrivalCase::Case1 => 0.0,
        ArrivalCase::Case2 { discharge } => discharge,
    };

    if let Some(link) = cfg.link_length {
        let queue = queue_length_at(fd, q_lane, discharge, cfg.red);
        if queue > link {
            return Err(TrafficError::Oversaturated { queue, link });
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut fleets: Vec<Vec<FoQPoint>> = vec![Vec::new(); shares.len()];
    for _cycle in 0..cfg.cycles {
        for _lane in 0..cfg.lanes {
            let mut base = 0.0;
            let mut n = 0u64;
            loop {
                let headway = if base < discharge { 1.0 / q_sat } else { 1.0 / q_lane };
                let jitter = if cfg.jitter > 0.0 { cfg.jitter * headway * rng.random_range(-0.5..0.5) } else { 0.0 };
                let tau = base + jitter;
                let t = tau - n as f64 * queue_time_shift;
                let h = -(n as f64) / fd.k_j;
                if t > cfg.red && base > cfg.red {
                    break;
                }
                let u: f64 = rng.random();
                if (0.0..=cfg.red).contains(&t) {
                    let mut acc = 0.0;
                    for (k, &s) in shares.iter().enumerate() {
                        acc += s;
                        if u < acc {
                            fleets[k].push(FoQPoint::new(t, h));
                            break;
                        }
                    }
                }
                base += headway;
                n += 1;
            }
        }
    }
    Ok(fleets.into_iter().enumerate().map(|(k, points)| FoQDataset::new(0, k as u32, points)).collect())
}

/// Queue extent (meters) reached at time `t` after red onset.
fn queue_length_at(fd: &FundamentalDiagram, q_lane: f64, discharge: f64, t: f64) -> f64 {
    let slope_b = fd.v_f * q_lane / (fd.v_f * fd.k_j - q_lane);
    let t_break = case2_breakpoint(fd, discharge);
    if t <= t_break {
        fd.w * t
    } else {
        fd.w * t_break + slope_b * (t - t_break)
    }
}
