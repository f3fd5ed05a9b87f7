//! Potentials, drifts, equilibria and noise-free solutions.

pub mod chain;
pub mod equilibrium;
pub mod ode;
pub mod params;
pub mod potential;

pub use chain::{broken_side, chain_drift, chain_force, right_end};
pub use equilibrium::{equilibrium_branches, fold_time, EquilibriumBranches};
pub use ode::{deterministic_solve, dopri_scalar, xi_variance, ODE_TOL};
pub use params::NormalFormParams;
pub use potential::{PotentialConfig, PotentialSpec};

/// Drift of the normal form, (tq − q³ + ε)/ε.
pub fn drift_normal_form(q: f64, t: f64, params: &NormalFormParams) -> f64 {
    drift_unscaled(q, t, params.epsilon) / params.epsilon
}

/// tq − q³ + ε, the drift without the 1/ε factor.
pub fn drift_unscaled(q: f64, t: f64, epsilon: f64) -> f64 {
    t * q - q * q * q + epsilon
}

/// V(q, t) = −tq²/2 + q⁴/4.
pub fn potential_v(q: f64, t: f64) -> f64 {
    let q2 = q * q;
    -0.5 * t * q2 + 0.25 * q2 * q2
}
