//! Trajectory-level to count-level budget conversion and the adjacency chain
//! behind it.

use super::{FoQDataset, FoQPoint};

/// Which δ bound [`traj_to_count_budget_with`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaBound {
    /// `δ·Σ_{j=0}^{b-1} e^{jε}`, what chaining `b` single-point steps yields.
    #[default]
    Chain,
    /// `δ·Σ_{j=0}^{b} e^{jε}`, one extra term; looser.
    Extended,
}

/// Budget that a trajectory-level `(ε, δ)` guarantee implies for datasets
/// differing in `b` points: `(bε, δ·Σ_{j=0}^{b-1} e^{jε})`.
///
/// ```
/// use datacollab::privacy::traj_to_count_budget;
/// assert_eq!(traj_to_count_budget(0.5, 0.01, 1), (0.5, 0.01));
/// let (e, d) = traj_to_count_budget(0.5, 0.01, 2);
/// assert_eq!(e, 1.0);
/// assert!((d - 0.01 * (1.0 + 0.5f64.exp())).abs() < 1e-15);
/// ```
pub fn traj_to_count_budget(eps: f64, delta: f64, b: u32) -> (f64, f64) {
    traj_to_count_budget_with(eps, delta, b, DeltaBound::Chain)
}

pub fn traj_to_count_budget_with(eps: f64, delta: f64, b: u32, bound: DeltaBound) -> (f64, f64) {
    assert!(b >= 1, "count adjacency needs b >= 1");
    let terms = match bound {
        DeltaBound::Chain => b,
        DeltaBound::Extended => b + 1,
    };
    let sum: f64 = (0..terms).map(|j| (j as f64 * eps).exp()).sum();
    (b as f64 * eps, delta * sum)
}

/// `ds` followed by the datasets obtained by removing the points at
/// `indices` one at a time. Indices refer to the original dataset.
pub fn removal_chain(ds: &FoQDataset, indices: &[usize]) -> Vec<FoQDataset> {
    let mut chain = vec![ds.clone()];
    let mut removed = vec![false; ds.points.len()];
    for &i in indices {
        removed[i] = true;
        let points = ds.points.iter().zip(&removed).filter(|(_, &r)| !r).map(|(p, _)| *p).collect();
        chain.push(FoQDataset::new(ds.movement, ds.owner, points));
    }
    chain
}

/// Whether one dataset is the other with exactly one point removed.
pub fn is_trajectory_adjacent(a: &FoQDataset, b: &FoQDataset) -> bool {
    is_count_adjacent(a, b, 1)
}

/// Whether one dataset is the other with exactly `k` points removed
/// (as multisets).
pub fn is_count_adjacent(a: &FoQDataset, b: &FoQDataset, k: usize) -> bool {
    let (big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if big.len() - small.len() != k {
        return false;
    }
    let key = |p: &FoQPoint| (p.t.to_bits(), p.h.to_bits());
    let mut pool: Vec<_> = big.points.iter().map(key).collect();
    pool.sort_unstable();
    for p in &small.points {
        match pool.binary_search(&key(p)) {
            Ok(pos) => {
                pool.remove(pos);
            }
            Err(_) => return false,
        }
    }
    true
}
