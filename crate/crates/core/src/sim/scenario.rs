use serde::{Deserialize, Serialize};

use super::{config_err, SimError};
use crate::privacy::{FoQBounds, PrivacyBudget, SensitivityWeights};
use crate::signal::{ArterialGeometry, Direction, IntersectionGeom, MovementGeom, TimingOptions};
use crate::traffic::FundamentalDiagram;

/// Movement families repeated at every intersection. Arterial throughs run
/// in phase 0, arterial lefts in phase 1 and the side street in phase 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Outbound,
    Inbound,
    Left,
    Side,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Outbound, Family::Inbound, Family::Left, Family::Side];

    pub fn name(self) -> &'static str {
        match self {
            Family::Outbound => "outbound",
            Family::Inbound => "inbound",
            Family::Left => "left",
            Family::Side => "side",
        }
    }

    fn phase(self) -> usize {
        match self {
            Family::Outbound | Family::Inbound => 0,
            Family::Left => 1,
            Family::Side => 2,
        }
    }

    fn direction(self) -> Direction {
        match self {
            Family::Outbound => Direction::OutboundThrough,
            Family::Inbound => Direction::InboundThrough,
            Family::Left | Family::Side => Direction::Side,
        }
    }
}

/// One number per family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyValues {
    pub outbound: f64,
    pub inbound: f64,
    pub left: f64,
    pub side: f64,
}

impl FamilyValues {
    pub fn get(&self, f: Family) -> f64 {
        match f {
            Family::Outbound => self.outbound,
            Family::Inbound => self.inbound,
            Family::Left => self.left,
            Family::Side => self.side,
        }
    }

    pub fn set(&mut self, f: Family, v: f64) {
        match f {
            Family::Outbound => self.outbound = v,
            Family::Inbound => self.inbound = v,
            Family::Left => self.left = v,
            Family::Side => self.side = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyLanes {
    pub outbound: u32,
    pub inbound: u32,
    pub left: u32,
    pub side: u32,
}

impl FamilyLanes {
    pub fn get(&self, f: Family) -> u32 {
        match f {
            Family::Outbound => self.outbound,
            Family::Inbound => self.inbound,
            Family::Left => self.left,
            Family::Side => self.side,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    /// Distances between consecutive intersections, m. One intersection
    /// more than segments.
    pub segments_m: Vec<f64>,
    /// Entry and exit links outside the coordinated stretch, m. Recorded
    /// only.
    #[serde(default)]
    pub boundary_links_m: Vec<f64>,
    pub cruise_speed_mps: f64,
    pub lost_time_s: f64,
    pub lanes: FamilyLanes,
    #[serde(default)]
    pub fd: FundamentalDiagram,
    #[serde(default)]
    pub timing: TimingOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandSection {
    /// Demand the network actually carries, veh/h per movement.
    pub true_vph: FamilyValues,
    /// Demand behind the outdated plan, veh/h per movement.
    pub prior_vph: FamilyValues,
    /// Coefficient of variation of the prior when fused with shared data.
    #[serde(default = "default_prior_cv")]
    pub prior_cv: f64,
}

fn default_prior_cv() -> f64 {
    0.3
}

fn default_kappa() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpSpec {
    pub id: String,
    /// Fleet share of every movement's traffic.
    pub penetration: f64,
    /// Privacy cost per unit budget.
    pub beta: f64,
    /// Share of the network welfare gain credited to this provider.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    /// Budgets at which the surface is sampled, increasing in `(0, 1)`.
    pub eps_grid: Vec<f64>,
    /// Quality thresholds (expected absolute slope error, m/s) offered to
    /// each provider; the leader grid is their Cartesian power.
    pub d_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpSection {
    pub delta: f64,
    pub t_max: f64,
    pub h_max: f64,
    /// `(ρ_T, ρ_TH, ρ_H, ρ_N)`.
    pub rho: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub samples: usize,
    pub seed: u64,
    /// Signal cycles of data each provider holds per movement.
    pub cycles: u32,
    #[serde(default)]
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub network: NetworkSection,
    pub demand: DemandSection,
    pub mps: Vec<MpSpec>,
    pub game: GameSection,
    pub dp: DpSection,
    pub mc: McSection,
}

/// A movement of the generated arterial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovementSpec {
    pub intersection: usize,
    pub family: Family,
    pub lanes: u32,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let scn: Scenario = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let n = &self.network;
        if n.segments_m.iter().any(|l| !(*l > 0.0)) {
            return config_err("network.segments_m", "lengths must be positive");
        }
        if !(n.cruise_speed_mps > 0.0) {
            return config_err("network.cruise_speed_mps", "must be positive");
        }
        if !(n.lost_time_s > 0.0) {
            return config_err("network.lost_time_s", "must be positive");
        }
        if Family::ALL.iter().any(|&f| n.lanes.get(f) == 0) {
            return config_err("network.lanes", "every family needs at least one lane");
        }
        if n.fd.validate().is_err() {
            return config_err("network.fd", "v_f, w and k_j must be positive");
        }
        for f in Family::ALL {
            let lanes = n.lanes.get(f) as f64;
            for (key, v) in
                [("demand.true_vph", self.demand.true_vph.get(f)), ("demand.prior_vph", self.demand.prior_vph.get(f))]
            {
                let per_lane = v / 3600.0 / lanes;
                if !(per_lane > 0.0 && per_lane < n.fd.q_c()) {
                    return config_err(
                        &format!("{key}.{}", f.name()),
                        format!("{v} veh/h over {lanes} lanes is outside (0, capacity)"),
                    );
                }
            }
        }
        if !(self.demand.prior_cv > 0.0) {
            return config_err("demand.prior_cv", "must be positive");
        }
        if self.mps.is_empty() {
            return config_err("mps", "at least one provider is required");
        }
        if self.mps.len() > 3 {
            return config_err("mps", "at most three providers are supported");
        }
        for (k, mp) in self.mps.iter().enumerate() {
            if !(mp.penetration > 0.0 && mp.penetration <= 1.0) {
                return config_err(&format!("mps[{k}].penetration"), "must lie in (0, 1]");
            }
            if !(mp.beta >= 0.0) || !mp.beta.is_finite() {
                return config_err(&format!("mps[{k}].beta"), "must be finite and nonnegative");
            }
            if !(mp.kappa >= 0.0) || !mp.kappa.is_finite() {
                return config_err(&format!("mps[{k}].kappa"), "must be finite and nonnegative");
            }
        }
        if self.mps.iter().map(|m| m.penetration).sum::<f64>() > 1.0 + 1e-12 {
            return config_err("mps", "penetrations sum above 1");
        }
        let g = &self.game.eps_grid;
        if g.is_empty() || g.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || g.windows(2).any(|w| w[1] <= w[0]) {
            return config_err("game.eps_grid", "needs increasing values in (0, 1)");
        }
        if self.game.d_values.is_empty() || self.game.d_values.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return config_err("game.d_values", "needs positive finite thresholds");
        }
        if PrivacyBudget::new(0.5, self.dp.delta).is_err() {
            return config_err("dp.delta", "must lie in (0, 1)");
        }
        if !(self.dp.t_max > 0.0 && self.dp.h_max > 0.0) {
            return config_err("dp.t_max", "bounds must be positive");
        }
        if self.weights().is_err() {
            return config_err("dp.rho", "weights must be positive and finite");
        }
        if self.mc.samples == 0 {
            return config_err("mc.samples", "must be at least 1");
        }
        if self.mc.cycles == 0 {
            return config_err("mc.cycles", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.mc.jitter) {
            return config_err("mc.jitter", "must lie in [0, 1]");
        }
        if let Err(e) = self.geometry().validate() {
            return config_err("network", e.to_string());
        }
        Ok(())
    }

    pub fn intersections(&self) -> usize {
        self.network.segments_m.len() + 1
    }

    /// Four movements per intersection in [`Family::ALL`] order.
    pub fn movements(&self) -> Vec<MovementSpec> {
        (0..self.intersections())
            .flat_map(|i| Family::ALL.into_iter().map(move |family| (i, family)))
            .map(|(intersection, family)| MovementSpec { intersection, family, lanes: self.network.lanes.get(family) })
            .collect()
    }

    /// Saturation flows follow the fundamental diagram's capacity.
    pub fn geometry(&self) -> ArterialGeometry {
        let q_c = self.network.fd.q_c();
        ArterialGeometry {
            intersections: vec![
                IntersectionGeom {
                    lost_time: self.network.lost_time_s,
                    phases: 3,
                    e_out: 0.0,
                    e_in: 0.0,
                };
                self.intersections()
            ],
            segment_lengths: self.network.segments_m.clone(),
            cruise_speed: self.network.cruise_speed_mps,
            movements: self
                .movements()
                .into_iter()
                .map(|m| MovementGeom {
                    intersection: m.intersection,
                    phase: m.family.phase(),
                    capacity: q_c * m.lanes as f64,
                    direction: m.family.direction(),
                })
                .collect(),
        }
    }

    fn flows(&self, v: &FamilyValues) -> Vec<f64> {
        self.movements().iter().map(|m| v.get(m.family) / 3600.0).collect()
    }

    /// True movement flows, veh/s.
    pub fn true_flows(&self) -> Vec<f64> {
        self.flows(&self.demand.true_vph)
    }

    /// Prior movement flows, veh/s.
    pub fn prior_flows(&self) -> Vec<f64> {
        self.flows(&self.demand.prior_vph)
    }

    pub fn bounds(&self) -> FoQBounds {
        FoQBounds { t_max: self.dp.t_max, h_max: self.dp.h_max }
    }

    pub fn weights(&self) -> Result<SensitivityWeights, SimError> {
        Ok(SensitivityWeights::new(self.dp.rho, self.bounds())?)
    }

    /// Axis of the utility surface for every provider: zero (not sharing)
    /// followed by the budget grid.
    pub fn surface_axes(&self) -> Vec<Vec<f64>> {
        let mut axis = vec![0.0];
        axis.extend(&self.game.eps_grid);
        vec![axis; self.mps.len()]
    }

    /// Every combination of one threshold per provider, first provider
    /// slowest.
    pub fn leader_grid(&self) -> Vec<Vec<f64>> {
        let mut grid: Vec<Vec<f64>> = vec![vec![]];
        for _ in &self.mps {
            grid = grid
                .into_iter()
                .flat_map(|d| {
                    self.game.d_values.iter().map(move |&v| {
                        let mut d = d.clone();
                        d.push(v);
                        d
                    })
                })
                .collect();
        }
        grid
    }
}
