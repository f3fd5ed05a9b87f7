//! Path-producing integrators for the reduced equations.

use super::grid::TimeGrid;
use super::noise::NoiseStream;
use super::path::Path;
use super::stepper::{drive, Force, Overdamped, Stepper, Underdamped};
use crate::error::{Error, Result};
use crate::model::NormalFormParams;

/// Run a stepper over the grid and record every point.
pub fn record<S: Stepper>(mut s: S, grid: &TimeGrid, noise: &NoiseStream) -> Result<(Path, S)> {
    let mut cursor = noise.cursor(grid)?;
    let mut q = Vec::with_capacity(grid.len());
    let mut p = s.p().map(|_| Vec::with_capacity(grid.len()));
    drive(&mut s, grid, &mut cursor, |_, _, st| {
        q.push(st.q());
        if let (Some(v), Some(x)) = (p.as_mut(), st.p()) {
            v.push(x);
        }
        true
    });
    let mut path = Path::new(*grid, q, p);
    path.truncated = s.truncated();
    Ok((path, s))
}

/// Euler–Maruyama for dq = (1/ε)(tq − q³ + ε)dt + (σ/√ε)dW.
pub fn integrate_overdamped(
    params: &NormalFormParams,
    x0: f64,
    grid: &TimeGrid,
    noise: &NoiseStream,
) -> Result<Path> {
    integrate_overdamped_with(params, Force::NormalForm { bias: params.epsilon }, x0, grid, noise)
}

/// Euler–Maruyama with an arbitrary force field and the normal-form noise.
pub fn integrate_overdamped_with(
    params: &NormalFormParams,
    force: Force,
    x0: f64,
    grid: &TimeGrid,
    noise: &NoiseStream,
) -> Result<Path> {
    params.validate()?;
    if !x0.is_finite() {
        return Err(Error::param("x0", format!("{x0} is not finite")));
    }
    grid.check_step(params.dt_max())?;
    let s = Overdamped::new(x0, force, params.epsilon, params.noise_scale());
    Ok(record(s, grid, noise)?.0)
}

fn check_beta(params: &NormalFormParams) -> Result<()> {
    if !(params.beta > 2.0) {
        return Err(Error::param("beta", format!("{} must exceed 2", params.beta)));
    }
    Ok(())
}

/// dq = p dt, ε^β dp = −p dt + (1/ε)(tq − q³ + ε)dt + (σ/√ε)dW, with the
/// exact frozen-force transition per step.
pub fn integrate_underdamped(
    params: &NormalFormParams,
    x0: f64,
    v0: f64,
    grid: &TimeGrid,
    noise: &NoiseStream,
) -> Result<Path> {
    params.validate()?;
    check_beta(params)?;
    if !(x0.is_finite() && v0.is_finite()) {
        return Err(Error::param("x0/v0", "initial data must be finite"));
    }
    grid.check_step(params.dt_max())?;
    let s = Underdamped::new(
        x0,
        v0,
        Force::NormalForm { bias: params.epsilon },
        params.epsilon,
        params.beta,
        params.noise_scale(),
    );
    Ok(record(s, grid, noise)?.0)
}

/// dQ = P dt, ε^β dP = −P dt + (σ/√ε)dW from Q = P = 0. The transition is
/// exact, so Q = (σ/√ε)W − ε^β P holds on the grid up to rounding.
pub fn integrate_ou_pair(params: &NormalFormParams, grid: &TimeGrid, noise: &NoiseStream) -> Result<Path> {
    params.validate()?;
    let mut s = Underdamped::new(0.0, 0.0, Force::Free, params.epsilon, params.beta, params.noise_scale());
    s.clamp = f64::INFINITY;
    Ok(record(s, grid, noise)?.0)
}
