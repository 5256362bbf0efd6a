//! Oracles shared by integration tests.
#![allow(dead_code)]

use datacollab::rng::rng_from_seed;
use datacollab::signal::BandProblem;
use rand::Rng;

/// Best band found by a grid over `(ζ_0, ζ̄_0)` at resolution `step`, for
/// every loop-integer vector in `±(ceil(t + t̄ + 2) + 2)`. Given the first
/// intersection's offsets the loop equations fix every later sum
/// `ζ_i + ζ̄_i`, and the best `(b, b̄)` follows in closed form.
pub fn maxband_grid_oracle(p: &BandProblem, step: f64) -> f64 {
    let n = p.r.len();
    let ranges: Vec<Vec<i64>> = (0..n - 1)
        .map(|i| {
            let span = (p.t[i] + p.t_bar[i] + 2.0).ceil() as i64 + 2;
            (-span..=span).collect()
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut combos: Vec<Vec<i64>> = vec![vec![]];
    for r in &ranges {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                r.iter().map(move |&m| {
                    let mut c = c.clone();
                    c.push(m);
                    c
                })
            })
            .collect();
    }
    let steps = (1.0 / step).round() as usize;
    for m in &combos {
        for a in 0..=steps {
            let z0 = a as f64 * step;
            if z0 > 1.0 - p.r[0] {
                break;
            }
            for c in 0..=steps {
                let zb0 = c as f64 * step;
                if zb0 > 1.0 - p.r_bar[0] {
                    break;
                }
                if let Some(v) = best_given_first(p, m, z0, zb0) {
                    best = best.max(v);
                }
            }
        }
    }
    best
}

#[allow(clippy::needless_range_loop)]
fn best_given_first(p: &BandProblem, m: &[i64], z0: f64, zb0: f64) -> Option<f64> {
    let n = p.r.len();
    let mut cap_b = 1.0 - p.r[0] - z0;
    let mut cap_bb = 1.0 - p.r_bar[0] - zb0;
    let mut cap_sum = f64::INFINITY;
    let mut s = z0 + zb0;
    for i in 0..n - 1 {
        let k = (p.t[i] + p.t_bar[i]) + p.delta[i] - p.delta[i + 1] + 0.5 * (p.r[i] + p.r_bar[i])
            - 0.5 * (p.r[i + 1] + p.r_bar[i + 1])
            - (p.e_bar[i] + p.e[i + 1]);
        s -= m[i] as f64 - k;
        if s < -1e-12 {
            return None;
        }
        cap_b = cap_b.min(1.0 - p.r[i + 1]);
        cap_bb = cap_bb.min(1.0 - p.r_bar[i + 1]);
        cap_sum = cap_sum.min((1.0 - p.r[i + 1]) + (1.0 - p.r_bar[i + 1]) - s);
    }
    if cap_b < -1e-12 || cap_bb < -1e-12 || cap_sum < -1e-12 {
        return None;
    }
    let (cap_b, cap_bb, cap_sum) = (cap_b.max(0.0), cap_bb.max(0.0), cap_sum.max(0.0));
    // fill the heavier direction first
    let (first_w, first_cap, second_w, second_cap) =
        if p.w_out >= p.w_in { (p.w_out, cap_b, p.w_in, cap_bb) } else { (p.w_in, cap_bb, p.w_out, cap_b) };
    let x = first_cap.min(cap_sum);
    let y = second_cap.min(cap_sum - x);
    Some(first_w * x + second_w * y)
}

/// Random well-posed band instance with `n` intersections.
pub fn random_band(seed: u64, n: usize) -> BandProblem {
    let mut rng = rng_from_seed(seed);
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let r: Vec<f64> = (0..n).map(|_| u(0.3, 0.6)).collect();
    let r_bar: Vec<f64> = (0..n).map(|_| u(0.3, 0.6)).collect();
    let t: Vec<f64> = (0..n - 1).map(|_| u(0.2, 1.8)).collect();
    let t_bar: Vec<f64> = (0..n - 1).map(|_| u(0.2, 1.8)).collect();
    let delta: Vec<f64> = (0..n).map(|_| u(-0.2, 0.2)).collect();
    let e: Vec<f64> = (0..n).map(|_| u(0.0, 0.05)).collect();
    let e_bar: Vec<f64> = (0..n).map(|_| u(0.0, 0.05)).collect();
    BandProblem { r, r_bar, t, t_bar, delta, e, e_bar, w_out: u(0.2, 1.0), w_in: u(0.2, 1.0) }
}
