//! The linear model
//!
//! dq = p dt, ε^β dp = −p dt + (1/ε)(tq + ε)dt + ε^α dW,
//!
//! its Gaussian limit law in closed form, and direct simulation by exact
//! Gaussian transitions.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::mc_types::{McSummary, Outcome, Tally};
use crate::analysis::stats::{normal_cdf, Moments};
use crate::error::{Error, Result};
use crate::model::NormalFormParams;
use crate::sde::{derive_seed, NoiseStream, TimeGrid};
use crate::special_fn::{airy_eval, j_integral_scaled, log_bi};

/// |q⁰| at the final time beyond which the sign counts as decided.
pub const ESCAPE_LEVEL: f64 = 1.0;
pub const DEFAULT_T: f64 = 4.0;
pub const DEFAULT_T_END: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianLimitStats {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub m: f64,
    pub v: f64,
    pub ratio: f64,
    pub p_plus: f64,
}

/// Mean m = ε^{(1+β)/3} e^{−ε^{1−2β}/12} and variance
/// v = ε^{2α+(1+β)/3} e^{−ε^{1−2β}/4} J(ε^{(1−2β)/3}/2) of the limit of the
/// renormalized process.
pub fn limit_stats(epsilon: f64, alpha: f64, beta: f64) -> Result<GaussianLimitStats> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param("epsilon", format!("{epsilon} not in (0, 1)")));
    }
    if !(alpha > -0.5) || !beta.is_finite() {
        return Err(Error::param("alpha", format!("{alpha} must exceed -1/2")));
    }
    let k = epsilon.powf(1.0 - 2.0 * beta);
    let m = epsilon.powf((1.0 + beta) / 3.0) * (-k / 12.0).exp();
    let p = epsilon.powf((1.0 - 2.0 * beta) / 3.0) / 2.0;
    // J(p) = e^{2p³/3} J̃(p) and 2p³/3 = k/12.
    let log_v = (2.0 * alpha + (1.0 + beta) / 3.0) * epsilon.ln() - k / 4.0 + k / 12.0;
    let v = log_v.exp() * j_integral_scaled(p)?;
    if !(v > 0.0 && v.is_finite() && m > 0.0) {
        return Err(Error::Range(format!("limit statistics out of range: m = {m}, v = {v}")));
    }
    let ratio = m / v.sqrt();
    Ok(GaussianLimitStats { epsilon, alpha, beta, m, v, ratio, p_plus: normal_cdf(ratio) })
}

/// Argument ε^{−(1+β)/3}(t + ε^{1−β}/4) of Bi in the renormalization.
pub fn airy_argument(t: f64, epsilon: f64, beta: f64) -> f64 {
    epsilon.powf(-(1.0 + beta) / 3.0) * (t + epsilon.powf(1.0 - beta) / 4.0)
}

/// q̃ = e^{t/(2ε^β)} / (π ε^{(1−2β)/3} Bi(z)) · q⁰, evaluated in log space.
pub fn renormalize(q0: f64, t: f64, epsilon: f64, beta: f64) -> Result<f64> {
    if q0 == 0.0 {
        return Ok(0.0);
    }
    let z = airy_argument(t, epsilon, beta);
    let ln_bi = if z >= 0.0 {
        log_bi(z)?
    } else {
        let bi = airy_eval(z)?.bi;
        if bi <= 0.0 {
            return Err(Error::Range(format!("Bi({z}) = {bi} is not positive")));
        }
        bi.ln()
    };
    let log_scale = t / (2.0 * epsilon.powf(beta)) - PI.ln() - (1.0 - 2.0 * beta) / 3.0 * epsilon.ln() - ln_bi;
    let v = q0.signum() * (log_scale + q0.abs().ln()).exp();
    if !v.is_finite() {
        return Err(Error::Range(format!("renormalized value overflowed at t = {t}")));
    }
    Ok(v)
}

/// Renormalized value at the last grid time of a path.
pub fn renormalized_tail(path: &crate::sde::Path, params: &NormalFormParams) -> Result<f64> {
    renormalize(path.last_q(), path.grid.t_end, params.epsilon, params.beta)
}

/// Grid on [−4, 1.5] resolving both ε^β and the Airy scale ε^{(1+β)/3}.
pub fn default_grid(epsilon: f64, beta: f64) -> Result<TimeGrid> {
    let scale = epsilon.powf(beta).min(epsilon.powf((1.0 + beta) / 3.0));
    TimeGrid::new(-DEFAULT_T, DEFAULT_T_END, 0.05 * scale)
}

/// Exact transition of one step with t frozen at the midpoint:
/// X' = Φ X + μ + L Z.
#[derive(Debug, Clone, Copy)]
struct Transition {
    phi: Matrix2<f64>,
    mu: Vector2<f64>,
    chol: [f64; 3],
}

fn transition(t_mid: f64, h: f64, epsilon: f64, beta: f64, g: f64) -> Transition {
    let theta = epsilon.powf(-beta);
    let a = Matrix2::new(0.0, 1.0, t_mid * theta / epsilon, -theta);
    let b = Vector2::new(0.0, theta);
    // [[A, b], [0, 0]] carries the affine part.
    let mut aug = Matrix3::zeros();
    aug.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    aug.fixed_view_mut::<2, 1>(0, 2).copy_from(&b);
    let e = (aug * h).exp();
    let phi: Matrix2<f64> = e.fixed_view::<2, 2>(0, 0).into();
    let mu: Vector2<f64> = e.fixed_view::<2, 1>(0, 2).into();
    // Van Loan: exp([[−A, ggᵀ], [0, Aᵀ]] h) = [[·, F12], [0, F22]], Σ = F22ᵀ F12.
    let mut vl = Matrix4::zeros();
    vl.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-a));
    vl[(1, 3)] = g * g;
    vl.fixed_view_mut::<2, 2>(2, 2).copy_from(&a.transpose());
    let f = (vl * h).exp();
    let f12: Matrix2<f64> = f.fixed_view::<2, 2>(0, 2).into();
    let f22: Matrix2<f64> = f.fixed_view::<2, 2>(2, 2).into();
    let sigma = f22.transpose() * f12;
    let s11 = sigma[(0, 0)].max(0.0);
    let s21 = 0.5 * (sigma[(1, 0)] + sigma[(0, 1)]);
    let l11 = s11.sqrt();
    let l21 = if l11 > 0.0 { s21 / l11 } else { 0.0 };
    let l22 = (sigma[(1, 1)] - l21 * l21).max(0.0).sqrt();
    Transition { phi, mu, chol: [l11, l21, l22] }
}

/// Result of a linear-model ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct LinearRun {
    pub summary: McSummary,
    /// Moments of the renormalized value at the final time.
    pub tail: Moments,
    /// Final q⁰ of every path, in path order.
    pub finals: Vec<f64>,
    pub tails: Vec<f64>,
}

/// Noise coefficient ε^α in front of dW (σ/√ε when α is not set).
fn linear_noise(params: &NormalFormParams) -> f64 {
    match params.alpha {
        Some(alpha) => params.epsilon.powf(alpha),
        None => params.noise_scale(),
    }
}

/// Ensemble of the linear model from zero data at the grid start; Right and
/// Left mean q⁰(t_end) ≥ +1 and ≤ −1.
pub fn simulate_linear(params: &NormalFormParams, n_paths: usize, grid: &TimeGrid, seed: u64) -> Result<McSummary> {
    Ok(simulate_linear_full(params, n_paths, grid, seed, ESCAPE_LEVEL)?.summary)
}

pub fn simulate_linear_full(
    params: &NormalFormParams,
    n_paths: usize,
    grid: &TimeGrid,
    seed: u64,
    escape_level: f64,
) -> Result<LinearRun> {
    let eps = params.epsilon;
    let beta = params.beta;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("epsilon", format!("{eps} not in (0, 1)")));
    }
    if n_paths == 0 {
        return Err(Error::param("n_paths", "must be positive"));
    }
    let g = linear_noise(params) / eps.powf(beta);
    let steps: Vec<Transition> = (0..grid.n_steps)
        .map(|i| {
            let t0 = grid.time(i);
            let t1 = grid.time(i + 1);
            transition(0.5 * (t0 + t1), t1 - t0, eps, beta, g)
        })
        .collect();
    let sqrt_dt = grid.dt.sqrt();
    let finals = (0..n_paths)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let mut cursor = NoiseStream::new(derive_seed(seed, i as u64)).cursor(grid)?;
            let mut x = Vector2::new(0.0, 0.0);
            for st in &steps {
                let inc = cursor.next(true);
                let z1 = inc.dw / sqrt_dt;
                let z2 = inc.aux;
                let noise = Vector2::new(st.chol[0] * z1, st.chol[1] * z1 + st.chol[2] * z2);
                x = st.phi * x + st.mu + noise;
            }
            Ok(x[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut tally = Tally::default();
    let mut tails = Vec::with_capacity(n_paths);
    let mut tail = Moments::default();
    for &q in &finals {
        let outcome = if q >= escape_level {
            Outcome::Right
        } else if q <= -escape_level {
            Outcome::Left
        } else {
            Outcome::Undecided
        };
        tally.record(outcome, !q.is_finite());
        let r = renormalize(q, grid.t_end, eps, beta)?;
        tail.push(r);
        tails.push(r);
    }
    Ok(LinearRun { summary: McSummary::from_tally(tally), tail, finals, tails })
}

/// Mean and variance of q⁰(t_end) propagated exactly through the same
/// transitions (no sampling).
pub fn propagate_moments(params: &NormalFormParams, grid: &TimeGrid) -> (f64, f64) {
    let eps = params.epsilon;
    let g = linear_noise(params) / eps.powf(params.beta);
    let mut mean = Vector2::new(0.0, 0.0);
    let mut cov = Matrix2::zeros();
    for i in 0..grid.n_steps {
        let t0 = grid.time(i);
        let t1 = grid.time(i + 1);
        let st = transition(0.5 * (t0 + t1), t1 - t0, eps, params.beta, g);
        let l = Matrix2::new(st.chol[0], 0.0, st.chol[1], st.chol[2]);
        mean = st.phi * mean + st.mu;
        cov = st.phi * cov * st.phi.transpose() + l * l.transpose();
    }
    (mean[0], cov[(0, 0)])
}
