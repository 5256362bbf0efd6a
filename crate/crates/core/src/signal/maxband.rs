//! MAXBAND offsets: for every admissible choice of loop integers the
//! bandwidth problem is a small LP; the best LP wins.

use serde::{Deserialize, Serialize};

use super::lp::LinearProgram;
use super::{ArterialGeometry, Direction};

/// Bandwidth problem data, all times in cycles. Intersections are listed in
/// outbound order; `t[i]`, `t_bar[i]` are the travel times on segment
/// `i → i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandProblem {
    pub r: Vec<f64>,
    pub r_bar: Vec<f64>,
    pub t: Vec<f64>,
    pub t_bar: Vec<f64>,
    /// Offset of the inbound red center from the outbound red center.
    pub delta: Vec<f64>,
    pub e: Vec<f64>,
    pub e_bar: Vec<f64>,
    pub w_out: f64,
    pub w_in: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSolution {
    pub b: f64,
    pub b_bar: f64,
    pub zeta: Vec<f64>,
    pub zeta_bar: Vec<f64>,
    pub m: Vec<i64>,
    pub objective: f64,
    /// False when no loop-integer choice was feasible; the zero band is
    /// returned in that case.
    pub feasible: bool,
}

impl BandProblem {
    fn len(&self) -> usize {
        self.r.len()
    }

    /// Constant part of loop equation `i`, so that
    /// `(ζ_i + ζ̄_i) − (ζ_{i+1} + ζ̄_{i+1}) = M_i − loop_constant(i)`.
    fn loop_constant(&self, i: usize) -> f64 {
        (self.t[i] + self.t_bar[i]) + self.delta[i] - self.delta[i + 1] + 0.5 * (self.r[i] + self.r_bar[i])
            - 0.5 * (self.r[i + 1] + self.r_bar[i + 1])
            - (self.e_bar[i] + self.e[i + 1])
    }

    /// Loop integers that can satisfy equation `i` for some admissible
    /// `ζ`, within `±(ceil(t_i + t̄_i + 2) + 2)`.
    pub fn loop_integer_candidates(&self, i: usize) -> Vec<i64> {
        let k = self.loop_constant(i);
        let hi_sum = 2.0 - self.r[i] - self.r_bar[i];
        let lo_sum = -(2.0 - self.r[i + 1] - self.r_bar[i + 1]);
        let span = (self.t[i] + self.t_bar[i] + 2.0).ceil() as i64 + 2;
        let lo = ((k + lo_sum - 1e-9).ceil() as i64).max(-span);
        let hi = ((k + hi_sum + 1e-9).floor() as i64).min(span);
        (lo..=hi).collect()
    }

    fn lp_for(&self, m: &[i64]) -> LinearProgram {
        let n = self.len();
        let vars = 2 + 2 * n;
        // x = [b, b̄, ζ_0.., ζ̄_0..]
        let mut a_ub = Vec::with_capacity(2 * n);
        let mut b_ub = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut row = vec![0.0; vars];
            row[0] = 1.0;
            row[2 + i] = 1.0;
            a_ub.push(row);
            b_ub.push(1.0 - self.r[i]);
            let mut row = vec![0.0; vars];
            row[1] = 1.0;
            row[2 + n + i] = 1.0;
            a_ub.push(row);
            b_ub.push(1.0 - self.r_bar[i]);
        }
        let mut a_eq = Vec::with_capacity(n.saturating_sub(1));
        let mut b_eq = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n.saturating_sub(1) {
            let mut row = vec![0.0; vars];
            row[2 + i] = 1.0;
            row[2 + n + i] = 1.0;
            row[2 + i + 1] = -1.0;
            row[2 + n + i + 1] = -1.0;
            a_eq.push(row);
            b_eq.push(m[i] as f64 - self.loop_constant(i));
        }
        let mut c = vec![0.0; vars];
        c[0] = self.w_out;
        c[1] = self.w_in;
        LinearProgram { c, a_ub, b_ub, a_eq, b_eq }
    }
}

/// Builds the band problem for a plan: reds from the coordinated phases,
/// travel times from segment lengths and cruise speed, weights from the
/// critical coordinated flow ratios raised to `alpha`.
pub fn band_problem(
    flows: &[f64],
    geom: &ArterialGeometry,
    greens: &[Vec<f64>],
    cycle: f64,
    alpha: f64,
) -> BandProblem {
    let n = geom.intersections.len();
    let mut r = vec![0.0; n];
    let mut r_bar = vec![0.0; n];
    let mut delta = vec![0.0; n];
    for i in 0..n {
        let g = &greens[i];
        let intergreen = geom.intersections[i].lost_time / g.len() as f64;
        let center = |p: usize| {
            let start: f64 = g[..p].iter().map(|x| x + intergreen).sum();
            start + 0.5 * g[p]
        };
        let po = geom.coordinated_phase(i, Direction::OutboundThrough).unwrap_or(0);
        let pi = geom.coordinated_phase(i, Direction::InboundThrough).unwrap_or(0);
        r[i] = 1.0 - g[po] / cycle;
        r_bar[i] = 1.0 - g[pi] / cycle;
        // red centers sit half a cycle from green centers, so their gap equals the green-center gap
        let d = (center(pi) - center(po)) / cycle;
        delta[i] = d - d.round();
    }
    let t: Vec<f64> = geom.segment_lengths.iter().map(|l| l / geom.cruise_speed / cycle).collect();
    let weight = |dir: Direction| {
        geom.movements
            .iter()
            .zip(flows)
            .filter(|(m, _)| m.direction == dir)
            .map(|(m, q)| q.max(0.0) / m.capacity)
            .fold(0.0, f64::max)
            .powf(alpha)
    };
    BandProblem {
        r,
        r_bar,
        t_bar: t.clone(),
        t,
        delta,
        e: geom.intersections.iter().map(|x| x.e_out / cycle).collect(),
        e_bar: geom.intersections.iter().map(|x| x.e_in / cycle).collect(),
        w_out: weight(Direction::OutboundThrough),
        w_in: weight(Direction::InboundThrough),
    }
}

/// Globally optimal band by enumeration of loop integers.
///
/// Ties keep the first loop-integer vector in lexicographic order.
pub fn maxband_solve(p: &BandProblem) -> BandSolution {
    let n = p.len();
    let candidates: Vec<Vec<i64>> = (0..n.saturating_sub(1)).map(|i| p.loop_integer_candidates(i)).collect();
    let mut best: Option<BandSolution> = None;
    let mut m = vec![0i64; candidates.len()];
    let mut idx = vec![0usize; candidates.len()];
    if candidates.iter().any(|c| c.is_empty()) {
        return zero_band(n);
    }
    loop {
        for (k, &j) in idx.iter().enumerate() {
            m[k] = candidates[k][j];
        }
        if let Ok(sol) = p.lp_for(&m).solve() {
            let better = best.as_ref().is_none_or(|b| sol.objective > b.objective + 1e-12);
            if better {
                let x = sol.x;
                best = Some(BandSolution {
                    b: x[0],
                    b_bar: x[1],
                    zeta: x[2..2 + n].to_vec(),
                    zeta_bar: x[2 + n..].to_vec(),
                    m: m.clone(),
                    objective: sol.objective,
                    feasible: true,
                });
            }
        }
        // odometer over candidate lists
        let mut k = idx.len();
        loop {
            if k == 0 {
                return best.unwrap_or_else(|| zero_band(n));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < candidates[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn zero_band(n: usize) -> BandSolution {
    log::warn!("no loop-integer choice admits a band; using the zero band");
    BandSolution {
        b: 0.0,
        b_bar: 0.0,
        zeta: vec![0.0; n],
        zeta_bar: vec![0.0; n],
        m: vec![0; n.saturating_sub(1)],
        objective: 0.0,
        feasible: false,
    }
}

/// Offset of intersection `i + 1` relative to `i`, seconds in `[0, C)`:
/// `((r_i/2 + ζ_i + t_i) − (r_{i+1}/2 + ζ_{i+1})) mod 1`, scaled by `C`.
pub fn offsets_from_band(sol: &BandSolution, p: &BandProblem, cycle: f64) -> Vec<f64> {
    (0..p.len().saturating_sub(1))
        .map(|i| {
            let o = (0.5 * p.r[i] + sol.zeta[i] + p.t[i]) - (0.5 * p.r[i + 1] + sol.zeta[i + 1]);
            o.rem_euclid(1.0) * cycle
        })
        .collect()
}
