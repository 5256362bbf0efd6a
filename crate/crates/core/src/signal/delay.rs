//! Uniform-delay surrogate with a bandwidth progression factor.

use super::{ArterialGeometry, BandSolution, Direction, SignalPlan};

const X_CAP: f64 = 0.98;
const PF_FLOOR: f64 = 0.15;

/// Delay per movement, s/veh:
/// `PF·½C(1 − g/C)²/(1 − min(X, 0.98)·g/C)` with `X = q/(q^c·g/C)`.
/// Coordinated through movements get `PF = clamp(1 − B/(g/C), 0.15, 1)`
/// with `B` their direction's bandwidth; all others `PF = 1`.
pub fn movement_delays(plan: &SignalPlan, flows: &[f64], geom: &ArterialGeometry, band: &BandSolution) -> Vec<f64> {
    let c = plan.cycle_s;
    geom.movements
        .iter()
        .zip(flows)
        .map(|(m, &q)| {
            let lambda = plan.greens[m.intersection][m.phase] / c;
            let x = q.max(0.0) / (m.capacity * lambda);
            let pf = match m.direction {
                Direction::OutboundThrough => (1.0 - band.b / lambda).clamp(PF_FLOOR, 1.0),
                Direction::InboundThrough => (1.0 - band.b_bar / lambda).clamp(PF_FLOOR, 1.0),
                Direction::Side => 1.0,
            };
            pf * 0.5 * c * (1.0 - lambda).powi(2) / (1.0 - x.min(X_CAP) * lambda)
        })
        .collect()
}

/// Flow-weighted mean delay, s/veh. Without any flow the plain mean is
/// returned.
pub fn evaluate_delay(plan: &SignalPlan, flows: &[f64], geom: &ArterialGeometry, band: &BandSolution) -> f64 {
    let d = movement_delays(plan, flows, geom, band);
    let total: f64 = flows.iter().map(|q| q.max(0.0)).sum();
    if total > 0.0 {
        d.iter().zip(flows).map(|(d, q)| d * q.max(0.0)).sum::<f64>() / total
    } else {
        d.iter().sum::<f64>() / d.len().max(1) as f64
    }
}
