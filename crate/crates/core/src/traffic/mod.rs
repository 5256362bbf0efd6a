//! Queue kinematics under a triangular fundamental diagram.
//!
//! Vehicles arriving during red stop at the back of the queue. Under a
//! triangular fundamental diagram the stopping points of a constant arrival
//! stream lie on a straight line whose slope encodes the arrival flow, so
//! fitting that line on front-of-queue points from connected vehicles
//! recovers the demand.

mod estimate;
mod io;
mod regression;
mod simulate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use estimate::{
    estimate_demands, flow_to_slope, fuse_estimates, sample_true_demand, slope_to_flow, slope_to_flow_clamped,
    slope_to_flow_derivative, DemandEstimate, MovementInput, OwnerShare,
};
pub use io::{read_foq_csv, write_foq_csv};
pub use regression::{fit_case1, fit_case2a, fit_case2b, RegressionEstimate};
pub use simulate::{case2_breakpoint, simulate_fleets, simulate_foq, ArrivalCase, MovementConfig};

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("queue of {queue:.1} m at the end of red exceeds the {link:.1} m link")]
    Oversaturated { queue: f64, link: f64 },
    #[error("{n} points available, at least {need} required")]
    InsufficientData { n: usize, need: usize },
    #[error("design matrix is singular (all t values coincide)")]
    SingularDesign,
    #[error("no estimates to fuse")]
    EmptyInput,
    #[error("slope {psi} is outside [-{w}, 0)")]
    SlopeOutOfRange { psi: f64, w: f64 },
    #[error("movement {movement} has no shared data and no prior")]
    NoData { movement: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-lane triangular fundamental diagram `Q(k) = min(v_f·k, w·(k_j − k))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDiagram {
    /// Free-flow speed, m/s.
    pub v_f: f64,
    /// Backward wave speed magnitude, m/s.
    pub w: f64,
    /// Jam density, veh/m.
    pub k_j: f64,
}

impl FundamentalDiagram {
    pub fn new(v_f: f64, w: f64, k_j: f64) -> Result<Self, TrafficError> {
        let fd = FundamentalDiagram { v_f, w, k_j };
        fd.validate()?;
        Ok(fd)
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        if [self.v_f, self.w, self.k_j].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(TrafficError::InvalidConfig(format!(
                "fundamental diagram needs positive finite v_f, w, k_j; got {self:?}"
            )))
        }
    }

    /// Critical density `w·k_j/(v_f + w)`.
    pub fn k_c(&self) -> f64 {
        self.w * self.k_j / (self.v_f + self.w)
    }

    /// Capacity `v_f·k_c`, veh/s per lane.
    pub fn q_c(&self) -> f64 {
        self.v_f * self.k_c()
    }
}

impl Default for FundamentalDiagram {
    fn default() -> Self {
        FundamentalDiagram { v_f: 15.0, w: 5.0, k_j: 0.15 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_point() {
        let fd = FundamentalDiagram::default();
        assert!((fd.k_c() - 0.0375).abs() < 1e-15);
        assert!((fd.q_c() - 0.5625).abs() < 1e-15);
        // both branches meet at the critical density
        assert!((fd.v_f * fd.k_c() - fd.w * (fd.k_j - fd.k_c())).abs() < 1e-15);
    }
}
