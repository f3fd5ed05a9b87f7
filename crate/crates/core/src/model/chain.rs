//! The three-particle chain: q_L fixed at 0, q_R = 2a(1 + t) pulled at unit
//! speed in rescaled time, the middle particle q free.

use super::potential::PotentialSpec;

/// Force −∂H/∂q on the middle particle for arbitrary outer positions.
pub fn chain_force(positions: [f64; 3], potential: &PotentialSpec) -> f64 {
    let [q_l, q, q_r] = positions;
    -potential.du(q - q_l) + potential.du(q_r - q)
}

/// Position of the pulled end at rescaled time t.
pub fn right_end(t: f64, potential: &PotentialSpec) -> f64 {
    2.0 * potential.a * (1.0 + t)
}

/// Force on the middle particle at rescaled time t, in the original
/// coordinates: −U'(q) + U'(2a(1+t) − q).
pub fn chain_drift(q: f64, t: f64, potential: &PotentialSpec) -> f64 {
    chain_force([0.0, q, right_end(t, potential)], potential)
}

/// Which bond has broken, if any: `Some(true)` when q_R − q > b (right),
/// `Some(false)` when q − q_L > b (left).
pub fn broken_side(q: f64, t: f64, potential: &PotentialSpec) -> Option<bool> {
    if right_end(t, potential) - q > potential.b {
        Some(true)
    } else if q > potential.b {
        Some(false)
    } else {
        None
    }
}
