//! Fixed-time arterial timing: Webster cycle and splits, MAXBAND offsets and
//! an analytical delay surrogate.

mod delay;
pub mod lp;
mod maxband;
mod webster;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use delay::{evaluate_delay, movement_delays};
pub use maxband::{band_problem, maxband_solve, offsets_from_band, BandProblem, BandSolution};
pub use webster::{build_plan, webster_cycle, webster_splits, PlanOutcome, TimingOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("intersection {intersection} is oversaturated (critical ratio sum {y:.4} >= 1)")]
    Oversaturated { intersection: usize, y: f64 },
    #[error("intersection {intersection}: minimum greens need {needed:.1} s but only {available:.1} s are available")]
    InfeasibleMinGreen { intersection: usize, needed: f64, available: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    OutboundThrough,
    InboundThrough,
    Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementGeom {
    pub intersection: usize,
    pub phase: usize,
    /// Saturation flow over all lanes, veh/s.
    pub capacity: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionGeom {
    /// Lost time per cycle, s.
    pub lost_time: f64,
    pub phases: usize,
    /// Queue-clearance advances of the outbound and inbound bands, s.
    #[serde(default)]
    pub e_out: f64,
    #[serde(default)]
    pub e_in: f64,
}

/// Intersections in outbound order, the segments between them and every
/// signalized movement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArterialGeometry {
    pub intersections: Vec<IntersectionGeom>,
    /// Distance from intersection `i` to `i + 1`, m.
    pub segment_lengths: Vec<f64>,
    /// Progression speed, m/s.
    pub cruise_speed: f64,
    pub movements: Vec<MovementGeom>,
}

impl ArterialGeometry {
    pub fn validate(&self) -> Result<(), SignalError> {
        let bad = |m: String| Err(SignalError::InvalidGeometry(m));
        let n = self.intersections.len();
        if n == 0 {
            return bad("no intersections".into());
        }
        if self.segment_lengths.len() != n - 1 {
            return bad(format!("{n} intersections need {} segments", n - 1));
        }
        if self.segment_lengths.iter().any(|l| !(*l > 0.0)) || !(self.cruise_speed > 0.0) {
            return bad("segment lengths and cruise speed must be positive".into());
        }
        for (i, x) in self.intersections.iter().enumerate() {
            if !(x.lost_time > 0.0) || x.phases == 0 {
                return bad(format!("intersection {i} needs positive lost time and a phase"));
            }
        }
        for (k, m) in self.movements.iter().enumerate() {
            if m.intersection >= n || m.phase >= self.intersections[m.intersection].phases {
                return bad(format!("movement {k} references a missing intersection or phase"));
            }
            if !(m.capacity > 0.0) {
                return bad(format!("movement {k} has non-positive capacity"));
            }
        }
        for i in 0..n {
            for dir in [Direction::OutboundThrough, Direction::InboundThrough] {
                if self.coordinated_phase(i, dir).is_none() {
                    return bad(format!("intersection {i} lacks a {dir:?} movement"));
                }
            }
        }
        Ok(())
    }

    /// Phase serving the coordinated movement of `dir` at intersection `i`.
    pub fn coordinated_phase(&self, i: usize, dir: Direction) -> Option<usize> {
        self.movements.iter().find(|m| m.intersection == i && m.direction == dir).map(|m| m.phase)
    }

    /// Critical ratio `max q/q^c` of every phase, per intersection.
    pub fn phase_ratios(&self, flows: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = self.intersections.iter().map(|x| vec![0.0; x.phases]).collect();
        for (m, &q) in self.movements.iter().zip(flows) {
            let r = &mut out[m.intersection][m.phase];
            *r = r.max(q.max(0.0) / m.capacity);
        }
        out
    }
}

/// Cycle, greens per intersection and phase, and absolute offsets
/// (intersection 0 anchored at zero), all in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPlan {
    pub cycle_s: f64,
    pub greens: Vec<Vec<f64>>,
    pub offsets_s: Vec<f64>,
}
