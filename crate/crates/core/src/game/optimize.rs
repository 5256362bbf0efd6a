//! Bounded one-dimensional maximization.

const SCAN_POINTS: usize = 33;
const GOLDEN_WIDTH: f64 = 1e-6;
const POLISH_STEP: f64 = 1e-7;
const POLISH_WIDTH: f64 = 1e-12;

/// Maximizes `f` on `[lo, hi]`; returns the maximizer and the maximum.
///
/// A coarse scan picks the bracket, golden section shrinks it, and a final
/// bisection on the sign of a central-difference slope resolves the
/// maximizer below the `sqrt(eps)` limit that comparing function values
/// alone runs into. Both endpoints are always considered.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> =
        (0..SCAN_POINTS).map(|i| if i == SCAN_POINTS - 1 { hi } else { lo + step * i as f64 }).collect();
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = argmax(&vals);

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(SCAN_POINTS - 1)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > GOLDEN_WIDTH {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }

    // slope-sign bisection inside the golden bracket
    let mut pa = (a - GOLDEN_WIDTH).max(lo);
    let mut pb = (b + GOLDEN_WIDTH).min(hi);
    let slope = |x: f64| {
        let l = (x - POLISH_STEP).max(lo);
        let r = (x + POLISH_STEP).min(hi);
        (f(r) - f(l)) / (r - l)
    };
    if slope(pa) > 0.0 && slope(pb) < 0.0 {
        while pb - pa > POLISH_WIDTH {
            let mid = 0.5 * (pa + pb);
            if slope(mid) > 0.0 {
                pa = mid;
            } else {
                pb = mid;
            }
        }
    }
    let polished = 0.5 * (pa + pb);
    let golden = 0.5 * (a + b);

    let candidates = [polished, golden, grid[best], lo, hi];
    let mut best_x = candidates[0];
    let mut best_f = f(best_x);
    for &x in &candidates[1..] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f)
}

fn argmax(vals: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best] {
            best = i;
        }
    }
    best
}
