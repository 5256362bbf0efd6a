//! End-to-end experiments: scenario files, the sharing pipeline, Monte Carlo
//! utility surfaces, the leader/follower game on those surfaces, the
//! data-utility map and file export.

mod datamap;
mod equilibrium;
mod export;
mod pipeline;
mod scenario;
mod surface;

use thiserror::Error;

use crate::game::GameError;
use crate::privacy::PrivacyError;
use crate::signal::SignalError;
use crate::traffic::TrafficError;

pub use datamap::{data_utility_map, DataUtilityMap, FamilyMap};
pub use equilibrium::{distortion_scales, run_game, run_game_on, GameReport, Region, RegionRow};
pub use export::{export_results, game_csv, map_csv, surface_csv, surface_svg, Artifact, ExportFormat};
pub use pipeline::{pipeline_delay, prepare, PipelineFlags, Prepared};
pub use scenario::{
    DemandSection, DpSection, Family, FamilyLanes, FamilyValues, GameSection, McSection, MovementSpec, MpSpec,
    NetworkSection, Scenario,
};
pub use surface::{utility_surface, utility_surface_on, SurfaceCell, UtilitySurface};

#[derive(Debug, Error)]
pub enum SimError {
    /// The scenario is well-formed TOML but a value is unusable.
    #[error("invalid `{key}`: {msg}")]
    Config { key: String, msg: String },
    /// The scenario does not parse; the message names the offending key.
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SimError {
    /// Whether the error comes from the scenario rather than the computation.
    pub fn is_config(&self) -> bool {
        matches!(self, SimError::Config { .. } | SimError::Parse(_))
    }
}

fn config_err<T>(key: &str, msg: impl Into<String>) -> Result<T, SimError> {
    Err(SimError::Config { key: key.to_string(), msg: msg.into() })
}

/// Compensated sum, so aggregates do not depend on summation grouping
/// beyond the fixed input order.
pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
