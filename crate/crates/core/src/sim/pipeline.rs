use serde::{Deserialize, Serialize};

use super::{Scenario, SimError};
use crate::privacy::{
    noise_scales, perturb_with, query_stats, reconstruct_foq, slope_distribution, FoQDataset, NoiseScales,
    PrivacyBudget, QueryStats,
};
use crate::rng::{derive_seed, rng_from_seed};
use crate::signal::{build_plan, evaluate_delay, ArterialGeometry, PlanOutcome};
use crate::traffic::{estimate_demands, simulate_fleets, ArrivalCase, MovementConfig, MovementInput, OwnerShare};

const PERTURB_STREAM: u64 = 1 << 32;
const RECONSTRUCT_STREAM: u64 = 2 << 32;

/// Scenario quantities shared by every realization: the outdated plan the
/// data were collected under and its delay on the true demand.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub geometry: ArterialGeometry,
    pub q_true: Vec<f64>,
    pub prior: Vec<f64>,
    pub old: PlanOutcome,
    pub delay_old: f64,
    /// Effective red of every movement under the outdated plan, s.
    pub reds: Vec<f64>,
}

/// What went wrong, without aborting, in one realization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineFlags {
    /// Releases whose perturbed count or residual variance was clamped.
    pub degenerate_releases: usize,
    /// Releases unusable for estimation (non-positive perturbed `Λ_T`).
    pub dropped_releases: usize,
    /// The new plan hit the maximum cycle because estimated demand
    /// oversaturated an intersection.
    pub oversaturated_plan: bool,
}

pub fn prepare(scn: &Scenario) -> Result<Prepared, SimError> {
    scn.validate()?;
    let geometry = scn.geometry();
    let q_true = scn.true_flows();
    let prior = scn.prior_flows();
    let old = plan_from(scn, &geometry, &estimate(scn, &prior, vec![vec![]; prior.len()])?.0)?;
    let delay_old = evaluate_delay(&old.plan, &q_true, &geometry, &old.band);
    let reds = geometry.movements.iter().map(|m| old.plan.cycle_s - old.plan.greens[m.intersection][m.phase]).collect();
    Ok(Prepared { scenario: scn.clone(), geometry, q_true, prior, old, delay_old, reds })
}

fn estimate(scn: &Scenario, prior: &[f64], shares: Vec<Vec<OwnerShare>>) -> Result<(Vec<f64>, usize), SimError> {
    let inputs: Vec<MovementInput> = scn
        .movements()
        .iter()
        .zip(prior)
        .zip(shares)
        .map(|((m, &p), shares)| MovementInput {
            fd: scn.network.fd,
            lanes: m.lanes,
            segment_start: None,
            shares,
            prior_flow: p,
            prior_sd: scn.demand.prior_cv * p,
            fuse_prior: true,
        })
        .collect();
    let est = estimate_demands(&inputs)?;
    let dropped = est.iter().map(|e| e.dropped).sum();
    Ok((est.into_iter().map(|e| e.flow).collect(), dropped))
}

fn plan_from(scn: &Scenario, geometry: &ArterialGeometry, flows: &[f64]) -> Result<PlanOutcome, SimError> {
    Ok(build_plan(flows, geometry, &scn.network.timing, true)?)
}

/// Exact statistics of every provider's in-bounds FoQ points, indexed
/// `[provider][movement]`, with point counts.
pub(crate) type SampleStats = Vec<Vec<(QueryStats, usize)>>;

pub(crate) fn collect_sample(prep: &Prepared, seed: u64) -> Result<SampleStats, SimError> {
    let scn = &prep.scenario;
    let shares: Vec<f64> = scn.mps.iter().map(|m| m.penetration).collect();
    let bounds = scn.bounds();
    let mut out = vec![Vec::with_capacity(prep.q_true.len()); shares.len()];
    for (j, m) in scn.movements().iter().enumerate() {
        let cfg = MovementConfig {
            demand: prep.q_true[j],
            lanes: m.lanes,
            red: prep.reds[j],
            cycles: scn.mc.cycles,
            penetration: 1.0,
            case: ArrivalCase::Case1,
            jitter: scn.mc.jitter,
            link_length: None,
        };
        let fleets = simulate_fleets(&scn.network.fd, &cfg, &shares, derive_seed(seed, j as u64))?;
        for (k, ds) in fleets.into_iter().enumerate() {
            // providers clip to the public bounds before releasing
            let kept =
                FoQDataset::new(j as u32, k as u32, ds.points.into_iter().filter(|p| bounds.contains(p)).collect());
            let n = kept.len();
            out[k].push((query_stats(&kept, &bounds)?, n));
        }
    }
    Ok(out)
}

/// One realization for participation `active` and budgets `eps` on
/// already collected statistics.
pub(crate) fn release_and_plan(
    prep: &Prepared,
    data: &SampleStats,
    active: &[bool],
    eps: &[f64],
    seed: u64,
) -> Result<(f64, PipelineFlags), SimError> {
    let scn = &prep.scenario;
    let mut flags = PipelineFlags::default();
    if !active.iter().any(|&a| a) {
        return Ok((prep.delay_old, flags));
    }
    let weights = scn.weights()?;
    let bounds = scn.bounds();
    let scales: Vec<Option<NoiseScales>> = active
        .iter()
        .zip(eps)
        .map(
            |(&a, &e)| {
                if a {
                    noise_scales(&weights, &PrivacyBudget::new(e, scn.dp.delta)?).map(Some)
                } else {
                    Ok(None)
                }
            },
        )
        .collect::<Result<_, _>>()?;

    let n_mov = prep.q_true.len();
    let mut shares: Vec<Vec<OwnerShare>> = vec![Vec::new(); n_mov];
    for (k, sc) in scales.iter().enumerate() {
        let Some(sc) = sc else { continue };
        for (j, share) in shares.iter_mut().enumerate() {
            let (stats, count) = &data[k][j];
            let stream = (k as u64) << 16 | j as u64;
            let mut rng = rng_from_seed(derive_seed(seed, PERTURB_STREAM + stream));
            let released = perturb_with(stats, sc, &mut rng);
            if !(released.lam_t > 0.0) {
                flags.dropped_releases += 1;
                continue;
            }
            let t_red = prep.reds[j].min(bounds.t_max);
            let rec = reconstruct_foq(
                &released,
                (*count).max(1),
                t_red,
                &bounds,
                derive_seed(seed, RECONSTRUCT_STREAM + stream),
            )?;
            if rec.degenerate {
                flags.degenerate_releases += 1;
            }
            let dp = slope_distribution(&released, released.lam_t, sc)?;
            share.push(OwnerShare::Synthetic { dataset: rec.dataset, dp_slope_variance: dp.variance });
        }
    }
    let (q_hat, dropped) = estimate(scn, &prep.prior, shares)?;
    flags.dropped_releases += dropped;
    let new = plan_from(scn, &prep.geometry, &q_hat)?;
    flags.oversaturated_plan = new.oversaturated;
    Ok((evaluate_delay(&new.plan, &prep.q_true, &prep.geometry, &new.band), flags))
}

/// Delay (s/veh) on the true demand of the plan built from one realization
/// of sharing: simulate FoQ data, release it through the Gaussian mechanism,
/// estimate demand and retime. Deterministic in `seed`.
///
/// Nobody sharing reproduces the outdated plan and its delay.
pub fn pipeline_delay(
    scn: &Scenario,
    active: &[bool],
    eps: &[f64],
    seed: u64,
) -> Result<(f64, PipelineFlags), SimError> {
    if active.len() != scn.mps.len() || eps.len() != scn.mps.len() {
        return super::config_err(
            "mps",
            format!("{} providers but {} flags and {} budgets", scn.mps.len(), active.len(), eps.len()),
        );
    }
    let prep = prepare(scn)?;
    let data = collect_sample(&prep, seed)?;
    release_and_plan(&prep, &data, active, eps, seed)
}
