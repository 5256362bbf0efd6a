use serde::{Deserialize, Serialize};

use super::{prepare, Family, Scenario, SimError};
use crate::signal::{build_plan, evaluate_delay};

/// Delay of the plan built for `q̂` when the network carries `q`, for one
/// movement family with every other family at its true demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMap {
    pub family: Family,
    pub q_hat_vph: Vec<f64>,
    pub q_vph: Vec<f64>,
    /// `delay[i][j]`: true demand `q_vph[i]`, plan from `q_hat_vph[j]`, s/veh.
    pub delay: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataUtilityMap {
    pub families: Vec<FamilyMap>,
}

/// Grid evaluation of `W_0(q̂, q)`. Both grids are multipliers of each
/// family's true demand.
pub fn data_utility_map(scn: &Scenario, q_hat_scale: &[f64], q_scale: &[f64]) -> Result<DataUtilityMap, SimError> {
    if q_hat_scale.is_empty()
        || q_scale.is_empty()
        || q_hat_scale.iter().chain(q_scale).any(|s| !(*s >= 0.0) || !s.is_finite())
    {
        return super::config_err("datamap.scales", "grids need finite nonnegative multipliers");
    }
    let prep = prepare(scn)?;
    let movements = scn.movements();
    let with_family = |f: Family, s: f64| -> Vec<f64> {
        movements.iter().zip(&prep.q_true).map(|(m, &q)| if m.family == f { q * s } else { q }).collect()
    };
    let families = Family::ALL
        .iter()
        .map(|&f| {
            let base = scn.demand.true_vph.get(f);
            let plans = q_hat_scale
                .iter()
                .map(|&s| build_plan(&with_family(f, s), &prep.geometry, &scn.network.timing, true))
                .collect::<Result<Vec<_>, _>>()?;
            let delay = q_scale
                .iter()
                .map(|&s| {
                    let q = with_family(f, s);
                    plans.iter().map(|p| evaluate_delay(&p.plan, &q, &prep.geometry, &p.band)).collect()
                })
                .collect();
            Ok(FamilyMap {
                family: f,
                q_hat_vph: q_hat_scale.iter().map(|s| s * base).collect(),
                q_vph: q_scale.iter().map(|s| s * base).collect(),
                delay,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(DataUtilityMap { families })
}
