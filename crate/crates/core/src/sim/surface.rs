use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{collect_sample, release_and_plan};
use super::{kahan_sum, prepare, Prepared, Scenario, SimError};
use crate::rng::replicate_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCell {
    pub eps: Vec<f64>,
    /// A zero budget means the provider does not share.
    pub share: Vec<bool>,
    /// Expected delay reduction against the outdated plan, s/veh.
    pub u_ma: f64,
    /// Monte Carlo standard error of `u_ma`.
    pub se_ma: f64,
    /// `κ_k·u_ma`.
    pub w_mp: Vec<f64>,
    /// `w_mp_k − β_k·ε_k` for sharers, `w_mp_k` otherwise.
    pub u_mp: Vec<f64>,
    /// Degenerate or dropped releases summed over samples.
    pub degenerate: usize,
}

/// Utilities on the product grid of `axes`, cells in row-major order (last
/// provider fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilitySurface {
    pub axes: Vec<Vec<f64>>,
    pub cells: Vec<SurfaceCell>,
    pub samples: usize,
    /// Delay of the outdated plan on the true demand, s/veh.
    pub baseline_delay: f64,
}

impl UtilitySurface {
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.len() + i)
    }

    pub fn cell(&self, idx: &[usize]) -> &SurfaceCell {
        &self.cells[self.flat_index(idx)]
    }

    /// Multilinear interpolation of `u_ma`; coordinates outside an axis are
    /// clamped to its ends.
    pub fn interpolate(&self, z: &[f64]) -> f64 {
        let k = self.axes.len();
        let mut lo = vec![0usize; k];
        let mut frac = vec![0.0; k];
        for d in 0..k {
            let a = &self.axes[d];
            let x = z[d].clamp(a[0], a[a.len() - 1]);
            if a.len() == 1 {
                continue;
            }
            let i = a.partition_point(|&v| v <= x).clamp(1, a.len() - 1) - 1;
            lo[d] = i;
            frac[d] = (x - a[i]) / (a[i + 1] - a[i]);
        }
        let mut total = 0.0;
        for corner in 0..1usize << k {
            let mut w = 1.0;
            let mut idx = lo.clone();
            for d in 0..k {
                if corner >> d & 1 == 1 {
                    if self.axes[d].len() == 1 {
                        w = 0.0;
                        break;
                    }
                    idx[d] += 1;
                    w *= frac[d];
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            if w != 0.0 {
                total += w * self.cell(&idx).u_ma;
            }
        }
        total
    }
}

/// Surface on the scenario's own axes (zero plus the budget grid).
pub fn utility_surface(scn: &Scenario) -> Result<UtilitySurface, SimError> {
    utility_surface_on(scn, scn.surface_axes())
}

/// Monte Carlo utility surface on arbitrary axes.
///
/// Sample `s` uses seed `mc.seed + s` in every cell, so cells share their
/// simulated traffic and standard-normal noise draws and differ only through
/// the budgets.
pub fn utility_surface_on(scn: &Scenario, axes: Vec<Vec<f64>>) -> Result<UtilitySurface, SimError> {
    if axes.len() != scn.mps.len() {
        return super::config_err("game.eps_grid", format!("{} axes for {} providers", axes.len(), scn.mps.len()));
    }
    if axes
        .iter()
        .any(|a| a.is_empty() || a.iter().any(|e| !(*e >= 0.0 && *e < 1.0)) || a.windows(2).any(|w| w[1] <= w[0]))
    {
        return super::config_err("game.eps_grid", "axes need increasing budgets in [0, 1)");
    }
    let prep = prepare(scn)?;
    let cells = grid_points(&axes);
    let s = scn.mc.samples;
    let per_sample: Vec<Vec<(f64, usize)>> = (0..s)
        .into_par_iter()
        .map(|i| sample_row(&prep, &cells, replicate_seed(scn.mc.seed, i as u64)))
        .collect::<Result<_, _>>()?;

    let out = cells
        .iter()
        .enumerate()
        .map(|(c, eps)| {
            let vals: Vec<f64> = per_sample.iter().map(|r| r[c].0).collect();
            let mean = kahan_sum(vals.iter().copied()) / s as f64;
            let se = if s > 1 {
                (kahan_sum(vals.iter().map(|v| (v - mean).powi(2))) / (s - 1) as f64 / s as f64).sqrt()
            } else {
                0.0
            };
            let share: Vec<bool> = eps.iter().map(|&e| e > 0.0).collect();
            let w_mp: Vec<f64> = scn.mps.iter().map(|m| m.kappa * mean).collect();
            let u_mp = w_mp.iter().zip(&scn.mps).zip(eps).map(|((w, m), e)| w - m.beta * e).collect();
            SurfaceCell {
                eps: eps.clone(),
                share,
                u_ma: mean,
                se_ma: se,
                w_mp,
                u_mp,
                degenerate: per_sample.iter().map(|r| r[c].1).sum(),
            }
        })
        .collect();
    Ok(UtilitySurface { axes, cells: out, samples: s, baseline_delay: prep.delay_old })
}

fn sample_row(prep: &Prepared, cells: &[Vec<f64>], seed: u64) -> Result<Vec<(f64, usize)>, SimError> {
    let data = collect_sample(prep, seed)?;
    cells
        .iter()
        .map(|eps| {
            let active: Vec<bool> = eps.iter().map(|&e| e > 0.0).collect();
            if !active.iter().any(|&a| a) {
                return Ok((0.0, 0));
            }
            let (delay, flags) = release_and_plan(prep, &data, &active, eps, seed)?;
            Ok((prep.delay_old - delay, flags.degenerate_releases + flags.dropped_releases))
        })
        .collect()
}

fn grid_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    for a in axes {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                a.iter().map(move |&v| {
                    let mut p = p.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    pts
}
