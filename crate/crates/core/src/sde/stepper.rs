//! Single-process steppers and the streaming driver.

use serde::Serialize;

use super::grid::TimeGrid;
use super::noise::{Increment, NoiseCursor};
use crate::model::{chain_drift, PotentialSpec};

/// Default clamp level for the normal form.
pub const TRUNCATION_LEVEL: f64 = 10.0;

/// Velocity field in slow time, 1/ε included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Force {
    /// (tq − q³ + bias)/ε; `bias = ε` is the pulled normal form, 0 the
    /// symmetric process.
    NormalForm { bias: f64 },
    /// −∂H/∂q of the three-particle chain, over ε.
    Chain(PotentialSpec),
    Free,
}

impl Force {
    #[inline]
    pub fn eval(&self, q: f64, t: f64, epsilon: f64) -> f64 {
        self.eval_unscaled(q, t) / epsilon
    }

    /// The field without the 1/ε factor.
    #[inline]
    pub fn eval_unscaled(&self, q: f64, t: f64) -> f64 {
        match self {
            Force::NormalForm { bias } => t * q - q * q * q + bias,
            Force::Chain(u) => chain_drift(q, t, u),
            Force::Free => 0.0,
        }
    }
}

/// One step of a process driven by a shared increment.
pub trait Stepper {
    fn step(&mut self, t: f64, h: f64, inc: Increment);
    fn q(&self) -> f64;
    fn p(&self) -> Option<f64> {
        None
    }
    fn truncated(&self) -> bool {
        false
    }
    fn needs_aux(&self) -> bool {
        false
    }
}

/// Euler–Maruyama for dq = F(q, t) dt + s dW.
#[derive(Debug, Clone)]
pub struct Overdamped {
    pub q: f64,
    pub force: Force,
    pub epsilon: f64,
    pub noise: f64,
    pub clamp: f64,
    pub truncated: bool,
}

impl Overdamped {
    pub fn new(q: f64, force: Force, epsilon: f64, noise: f64) -> Self {
        Self { q, force, epsilon, noise, clamp: TRUNCATION_LEVEL, truncated: false }
    }
}

impl Stepper for Overdamped {
    #[inline]
    fn step(&mut self, t: f64, h: f64, inc: Increment) {
        let q = self.q + (h / self.epsilon) * self.force.eval_unscaled(self.q, t) + self.noise * inc.dw;
        if q.abs() > self.clamp || !q.is_finite() {
            self.truncated = true;
            self.q = self.clamp.copysign(if q.is_nan() { self.q } else { q });
        } else {
            self.q = q;
        }
    }
    fn q(&self) -> f64 {
        self.q
    }
    fn truncated(&self) -> bool {
        self.truncated
    }
}

/// Coefficients of the exact step of du = −θu dt + θs dW over a step h,
/// together with the correlated pair (ΔW, Y), Y = ∫ e^{−θ(h−r)} dW_r,
/// written as Y = c ΔW + d Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuCoeffs {
    pub h: f64,
    pub theta: f64,
    /// e^{−θh}
    pub decay: f64,
    /// (1 − e^{−θh})/θ
    pub lag: f64,
    pub c: f64,
    pub d: f64,
}

impl OuCoeffs {
    pub fn new(theta: f64, h: f64) -> Self {
        let x = theta * h;
        let one_minus = -(-x).exp_m1();
        let lag = if x < 1e-8 { h * (1.0 - 0.5 * x) } else { one_minus / theta };
        // d²/h = (1 − e^{−2x})/(2x) − ((1 − e^{−x})/x)²
        let phi = if x < 1e-2 {
            x * x / 12.0 - x * x * x / 12.0 + 17.0 / 360.0 * x.powi(4)
        } else {
            let a = -(-2.0 * x).exp_m1() / (2.0 * x);
            let b = one_minus / x;
            (a - b * b).max(0.0)
        };
        let c = if x < 1e-8 { 1.0 - 0.5 * x } else { one_minus / x };
        Self { h, theta, decay: (-x).exp(), lag, c, d: (phi * h).sqrt() }
    }

    #[inline]
    pub fn y(&self, inc: Increment) -> f64 {
        self.c * inc.dw + self.d * inc.aux
    }
}

/// dq = p dt, ε^β dp = (F(q, t) − p) dt + s dW, stepped in the form
/// dp = θ(F − p) dt + θ s dW with θ = ε^{−β}.
///
/// Each step freezes F at the left point and advances (q, p) by the exact
/// transition of the resulting linear system, so arbitrarily stiff θ is
/// fine; q then carries the error of a first-order method in F.
#[derive(Debug, Clone)]
pub struct Underdamped {
    pub q: f64,
    pub p: f64,
    pub force: Force,
    pub epsilon: f64,
    pub noise: f64,
    pub clamp: f64,
    pub truncated: bool,
    coeffs: OuCoeffs,
}

impl Underdamped {
    pub fn new(q: f64, p: f64, force: Force, epsilon: f64, beta: f64, noise: f64) -> Self {
        let theta = epsilon.powf(-beta);
        Self {
            q,
            p,
            force,
            epsilon,
            noise,
            clamp: TRUNCATION_LEVEL,
            truncated: false,
            coeffs: OuCoeffs::new(theta, 0.0),
        }
    }

    pub fn theta(&self) -> f64 {
        self.coeffs.theta
    }
}

impl Stepper for Underdamped {
    #[inline]
    fn step(&mut self, t: f64, h: f64, inc: Increment) {
        if self.coeffs.h != h {
            self.coeffs = OuCoeffs::new(self.coeffs.theta, h);
        }
        let k = self.coeffs;
        let f = self.force.eval(self.q, t, self.epsilon);
        let u = self.p - f;
        let y = k.y(inc);
        let q = self.q + f * h + u * k.lag + self.noise * (inc.dw - y);
        let p = f + k.decay * u + k.theta * self.noise * y;
        if q.abs() > self.clamp || !q.is_finite() || !p.is_finite() {
            self.truncated = true;
            self.q = self.clamp.copysign(if q.is_nan() { self.q } else { q });
            self.p = 0.0;
        } else {
            self.q = q;
            self.p = p;
        }
    }
    fn q(&self) -> f64 {
        self.q
    }
    fn p(&self) -> Option<f64> {
        Some(self.p)
    }
    fn truncated(&self) -> bool {
        self.truncated
    }
    fn needs_aux(&self) -> bool {
        true
    }
}

/// Step `s` across `grid`, calling `observe(i, t_i, &s)` at every grid point
/// (including the initial one). Returning `false` stops early. Returns the
/// index of the last observed point.
pub fn drive<S: Stepper, O: FnMut(usize, f64, &S) -> bool>(
    s: &mut S,
    grid: &TimeGrid,
    cursor: &mut NoiseCursor,
    mut observe: O,
) -> usize {
    if !observe(0, grid.t_start, s) {
        return 0;
    }
    let aux = s.needs_aux();
    for i in 0..grid.n_steps {
        let t = grid.time(i);
        let inc = cursor.next(aux);
        s.step(t, grid.dt, inc);
        if !observe(i + 1, grid.time(i + 1), s) {
            return i + 1;
        }
    }
    grid.n_steps
}
