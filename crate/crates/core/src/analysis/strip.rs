//! Space-time strips and their exit times.
//!
//! Every strip is a band center(t) ± halfwidth(t) over a time domain. The
//! B(h) and A^τ(h) bands follow a deterministic reference solution with
//! width h√ξ(t); K(κ) and S(h) are centered at zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{deterministic_solve, xi_variance, NormalFormParams};
use crate::sde::{Path, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StripKind {
    Bh,
    Kkappa,
    Sh,
    AtauH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exit {
    pub t: f64,
    pub side: Side,
}

/// Samples on a uniform grid, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    grid: TimeGrid,
    center: Vec<f64>,
    sqrt_xi: Vec<f64>,
}

impl Table {
    fn at(&self, t: f64) -> (f64, f64) {
        let g = &self.grid;
        let x = ((t - g.t_start) / g.dt).clamp(0.0, g.n_steps as f64);
        let i = (x.floor() as usize).min(g.n_steps.saturating_sub(1));
        let w = x - i as f64;
        let lerp = |v: &[f64]| v[i] + w * (v[i + 1] - v[i]);
        (lerp(&self.center), lerp(&self.sqrt_xi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StripSpec {
    pub kind: StripKind,
    /// h for B, S and A^τ; κ for K.
    pub level: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    table: Option<Table>,
}

fn reference_table(params: &NormalFormParams, x0: f64, t_lo: f64, t_hi: f64) -> Result<Table> {
    let dt = (params.epsilon * 0.01).min((t_hi - t_lo) / 64.0);
    let grid = TimeGrid::new(t_lo, t_hi, dt)?;
    let det = deterministic_solve(params, x0, &grid)?;
    let xi = xi_variance(params, &grid, &det)?;
    if let Some(bad) = xi.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Degenerate(format!("xi = {bad} on the strip domain")));
    }
    Ok(Table { grid, center: det.q, sqrt_xi: xi.iter().map(|v| v.sqrt()).collect() })
}

impl StripSpec {
    /// B(h) = {|q − q_det(t)| < h√ξ(t), −T ≤ t ≤ √ε} for the deterministic
    /// solution started at x0.
    pub fn b_h(params: &NormalFormParams, h: f64, x0: f64) -> Result<Self> {
        check_level("h", h)?;
        let (t_lo, t_hi) = (params.t_start(), params.epsilon.sqrt());
        let table = reference_table(params, x0, t_lo, t_hi)?;
        Ok(Self { kind: StripKind::Bh, level: h, t_lo, t_hi, table: Some(table) })
    }

    /// K(κ) = {|q| ≤ √((1−κ)t), t ≥ √ε}.
    pub fn k_kappa(params: &NormalFormParams) -> Result<Self> {
        let k = params.kappa;
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::param("kappa", format!("{k} not in (0, 1)")));
        }
        Ok(Self { kind: StripKind::Kkappa, level: k, t_lo: params.epsilon.sqrt(), t_hi: f64::INFINITY, table: None })
    }

    /// S(h) = {|q| < h/√t, t ≥ √ε}.
    pub fn s_h(params: &NormalFormParams, h: f64) -> Result<Self> {
        check_level("h", h)?;
        Ok(Self { kind: StripKind::Sh, level: h, t_lo: params.epsilon.sqrt(), t_hi: f64::INFINITY, table: None })
    }

    /// A^τ(h) = {|q − q_det^τ(t)| ≤ h√ξ^τ(t), τ ≤ t ≤ t2}, the reference
    /// solution starting from `q_tau` at τ.
    pub fn a_tau(params: &NormalFormParams, h: f64, tau: f64, q_tau: f64) -> Result<Self> {
        check_level("h", h)?;
        if !(tau < params.t2) {
            return Err(Error::Config(format!("tau = {tau} is not below t2 = {}", params.t2)));
        }
        let table = reference_table(params, q_tau, tau, params.t2)?;
        Ok(Self { kind: StripKind::AtauH, level: h, t_lo: tau, t_hi: params.t2, table: Some(table) })
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.t_lo && t <= self.t_hi
    }

    /// (center, half-width) at time t, `None` outside the time domain.
    pub fn bounds(&self, t: f64) -> Option<(f64, f64)> {
        if !self.contains_time(t) {
            return None;
        }
        Some(match self.kind {
            StripKind::Kkappa => (0.0, ((1.0 - self.level) * t).sqrt()),
            StripKind::Sh => (0.0, self.level / t.sqrt()),
            StripKind::Bh | StripKind::AtauH => {
                let (c, s) = self.table.as_ref().expect("reference table").at(t);
                (c, self.level * s)
            }
        })
    }

    /// Side through which (q, t) lies outside the strip. B and S are open
    /// bands, K and A^τ closed.
    pub fn outside(&self, q: f64, t: f64) -> Option<Side> {
        let (c, w) = self.bounds(t)?;
        let d = q - c;
        let strict = matches!(self.kind, StripKind::Bh | StripKind::Sh);
        let out = if strict { d.abs() >= w } else { d.abs() > w };
        out.then_some(if d > 0.0 { Side::Upper } else { Side::Lower })
    }
}

fn check_level(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::param(name, format!("{v} must be positive")));
    }
    Ok(())
}

/// Streaming first-exit detector.
#[derive(Debug, Clone)]
pub struct ExitTracker<'a> {
    strip: &'a StripSpec,
    pub exit: Option<Exit>,
}

impl<'a> ExitTracker<'a> {
    pub fn new(strip: &'a StripSpec) -> Self {
        Self { strip, exit: None }
    }

    /// Feed one grid point; true once an exit has been seen.
    #[inline]
    pub fn observe(&mut self, t: f64, q: f64) -> bool {
        if self.exit.is_none() {
            if let Some(side) = self.strip.outside(q, t) {
                self.exit = Some(Exit { t, side });
            }
        }
        self.exit.is_some()
    }

    /// True once t lies beyond the strip's domain, so no exit can follow.
    pub fn finished(&self, t: f64) -> bool {
        self.exit.is_some() || t > self.strip.t_hi
    }
}

/// First grid time at which the path is outside the strip, with its side.
pub fn exit_time(path: &Path, strip: &StripSpec) -> Option<Exit> {
    let mut tr = ExitTracker::new(strip);
    for (t, q) in path.points() {
        if tr.observe(t, q) || t > strip.t_hi {
            break;
        }
    }
    tr.exit
}
