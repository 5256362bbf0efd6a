//! Three-provider log-utility instance whose follower game has no pure
//! equilibrium although decreasing differences hold.
//!
//! Provider `k` earns `ln(Σz + b) − c_k z_k − Σ_j γ_kj z_k z_j` and, when it
//! shares, must share at the full budget.

use super::FollowerSpec;

pub const B: f64 = 1.0099;
pub const C: [f64; 3] = [0.161, 0.1545, 0.1102];
/// `GAMMA[k][j]`: interaction weight of provider `k` with provider `j`.
pub const GAMMA: [[f64; 3]; 3] = [[0.0, 1.0622, 0.0979], [0.0521, 0.0, 0.5048], [0.9145, 0.2694, 0.0]];

/// Reference payoffs to two decimals, rows in lexicographic profile order
/// `000, 001, …, 111`.
pub const EXPECTED_TABLE: [[f64; 3]; 8] = [
    [0.01, 0.01, 0.01],
    [0.70, 0.70, 0.59],
    [0.70, 0.54, 0.70],
    [1.10, 0.44, 0.72],
    [0.54, 0.70, 0.70],
    [0.84, 1.10, 0.08],
    [-0.12, 0.90, 1.10],
    [0.07, 0.68, 0.09],
];

pub fn followers() -> Vec<FollowerSpec> {
    (0..3)
        .map(|k| {
            FollowerSpec::new(k, move |z: &[f64]| {
                let s: f64 = z.iter().sum();
                let cross: f64 = (0..3).map(|j| GAMMA[k][j] * z[k] * z[j]).sum();
                (s + B).ln() - C[k] * z[k] - cross
            })
            .with_floor(1.0)
        })
        .collect()
}
