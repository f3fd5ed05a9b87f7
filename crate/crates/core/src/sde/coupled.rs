//! Several processes stepped in lockstep from one noise stream. Every
//! process sees the same increment ΔW and, where needed, the same auxiliary
//! normal, so second-order processes share the same Y = ∫e^{−θ(h−r)}dW_r.

use serde::Serialize;

use super::grid::TimeGrid;
use super::noise::NoiseStream;
use super::path::Path;
use super::stepper::{Force, Overdamped, Stepper, Underdamped};
use crate::error::{Error, Result};
use crate::model::NormalFormParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProcessSpec {
    /// First-order process; `start` delays the start to the first grid
    /// point at or after the given time.
    Overdamped { force: Force, x0: f64, start: Option<f64> },
    Underdamped { force: Force, x0: f64, v0: f64 },
    /// The auxiliary pair (Q, P) from Q = P = 0.
    OuPair,
}

#[derive(Debug, Clone)]
enum Proc {
    First(Overdamped),
    Second(Underdamped),
}

#[derive(Debug, Clone)]
pub struct Slot {
    proc: Proc,
    pub start_index: usize,
    pub active: bool,
}

impl Slot {
    pub fn q(&self) -> Option<f64> {
        self.active.then(|| match &self.proc {
            Proc::First(s) => s.q(),
            Proc::Second(s) => s.q(),
        })
    }

    pub fn p(&self) -> Option<f64> {
        match &self.proc {
            Proc::Second(s) if self.active => s.p(),
            _ => None,
        }
    }

    pub fn truncated(&self) -> bool {
        match &self.proc {
            Proc::First(s) => s.truncated(),
            Proc::Second(s) => s.truncated(),
        }
    }
}

fn build(params: &NormalFormParams, spec: &ProcessSpec, grid: &TimeGrid) -> Result<Slot> {
    let noise = params.noise_scale();
    let eps = params.epsilon;
    Ok(match *spec {
        ProcessSpec::Overdamped { force, x0, start } => {
            let start_index = match start {
                None => 0,
                Some(t) if t >= grid.t_start && t < grid.t_end => {
                    let raw = ((t - grid.t_start) / grid.dt - 1e-9).ceil();
                    raw.max(0.0) as usize
                }
                Some(t) => {
                    return Err(Error::Config(format!(
                        "start {t} outside the shared grid [{}, {})",
                        grid.t_start, grid.t_end
                    )))
                }
            };
            Slot {
                proc: Proc::First(Overdamped::new(x0, force, eps, noise)),
                start_index,
                active: start_index == 0,
            }
        }
        ProcessSpec::Underdamped { force, x0, v0 } => {
            if !(params.beta > 2.0) {
                return Err(Error::param("beta", format!("{} must exceed 2", params.beta)));
            }
            Slot {
                proc: Proc::Second(Underdamped::new(x0, v0, force, eps, params.beta, noise)),
                start_index: 0,
                active: true,
            }
        }
        ProcessSpec::OuPair => {
            let mut s = Underdamped::new(0.0, 0.0, Force::Free, eps, params.beta, noise);
            s.clamp = f64::INFINITY;
            Slot { proc: Proc::Second(s), start_index: 0, active: true }
        }
    })
}

/// Stream all processes across `grid`. `observe(i, t, slots)` runs at every
/// grid point; returning `false` stops the run.
pub fn run_coupled<O: FnMut(usize, f64, &[Slot]) -> bool>(
    params: &NormalFormParams,
    specs: &[ProcessSpec],
    grid: &TimeGrid,
    noise: &NoiseStream,
    mut observe: O,
) -> Result<Vec<Slot>> {
    params.validate()?;
    grid.check_step(params.dt_max())?;
    let mut slots = specs.iter().map(|s| build(params, s, grid)).collect::<Result<Vec<_>>>()?;
    let aux = slots.iter().any(|s| matches!(s.proc, Proc::Second(_)));
    let mut cursor = noise.cursor(grid)?;
    if !observe(0, grid.t_start, &slots) {
        return Ok(slots);
    }
    for i in 0..grid.n_steps {
        let t = grid.time(i);
        let inc = cursor.next(aux);
        for s in slots.iter_mut() {
            if s.active {
                match &mut s.proc {
                    Proc::First(p) => p.step(t, grid.dt, inc),
                    Proc::Second(p) => p.step(t, grid.dt, inc),
                }
            } else if s.start_index == i + 1 {
                s.active = true;
            }
        }
        if !observe(i + 1, grid.time(i + 1), &slots) {
            break;
        }
    }
    Ok(slots)
}

/// Lockstep run that records one path per process. A delayed process gets
/// a path on the tail of the grid starting at its first active point.
pub fn integrate_coupled(
    params: &NormalFormParams,
    specs: &[ProcessSpec],
    grid: &TimeGrid,
    noise: &NoiseStream,
) -> Result<Vec<Path>> {
    let mut q: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); specs.len()];
    let mut p: Vec<Vec<f64>> = vec![Vec::new(); specs.len()];
    let slots = run_coupled(params, specs, grid, noise, |_, _, slots| {
        for (k, s) in slots.iter().enumerate() {
            if let Some(v) = s.q() {
                q[k].push(v);
            }
            if let Some(v) = s.p() {
                p[k].push(v);
            }
        }
        true
    })?;
    slots
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let sub = if s.start_index == 0 {
                *grid
            } else {
                TimeGrid::with_steps(grid.time(s.start_index), grid.t_end, grid.n_steps - s.start_index)?
            };
            let momenta = (!p[k].is_empty()).then(|| std::mem::take(&mut p[k]));
            let mut path = Path::new(sub, std::mem::take(&mut q[k]), momenta);
            path.truncated = s.truncated();
            Ok(path)
        })
        .collect()
}
