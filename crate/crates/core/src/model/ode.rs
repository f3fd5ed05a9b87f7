//! Noise-free normal form and the linearized variance equation.

use crate::error::{Error, Result};
use crate::sde::{Path, TimeGrid};

use super::NormalFormParams;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub const ODE_TOL: f64 = 1e-10;

/// Adaptive Dormand–Prince integration of a scalar ODE y' = f(s, y) from
/// `s0` to `s1`, starting with step `h` (updated in place).
pub fn dopri_scalar<F: Fn(f64, f64) -> f64>(
    f: &F,
    s0: f64,
    s1: f64,
    y0: f64,
    h: &mut f64,
    tol: f64,
) -> Result<f64> {
    let mut s = s0;
    let mut y = y0;
    let span = s1 - s0;
    let h_min = 1e-14 * span.abs().max(s0.abs()).max(1.0);
    while s < s1 {
        let mut step = h.min(s1 - s);
        let last = step >= s1 - s;
        if last {
            step = s1 - s;
        }
        let mut k = [0.0; 7];
        k[0] = f(s, y);
        for i in 1..7 {
            let mut yi = y;
            for j in 0..i {
                yi += step * A[i][j] * k[j];
            }
            k[i] = f(s + C[i] * step, yi);
        }
        let mut y5 = y;
        let mut y4 = y;
        for i in 0..7 {
            y5 += step * B5[i] * k[i];
            y4 += step * B4[i] * k[i];
        }
        let scale = tol * (1.0 + y.abs().max(y5.abs()));
        let err = (y5 - y4).abs() / scale;
        if err <= 1.0 && y5.is_finite() {
            s = if last { s1 } else { s + step };
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            // A short final step says nothing about the natural step size.
            *h = if last { h.max(step * factor) } else { step * factor };
        } else {
            *h = step * factor.min(0.9);
        }
        if *h < h_min {
            return Err(Error::Stiffness { t: s, h: *h });
        }
    }
    Ok(y)
}

/// High-accuracy noise-free solution of dq/dt = (tq − q³ + ε)/ε on `grid`,
/// integrated in the fast time s = t/ε.
pub fn deterministic_solve(params: &NormalFormParams, x0: f64, grid: &TimeGrid) -> Result<Path> {
    if !(-1.0..=1.0).contains(&x0) {
        return Err(Error::param("x0", format!("{x0} not in [-1, 1]")));
    }
    let eps = params.epsilon;
    let f = |s: f64, q: f64| {
        let t = eps * s;
        t * q - q * q * q + eps
    };
    let mut q = Vec::with_capacity(grid.len());
    q.push(x0);
    let mut y = x0;
    let mut h = 0.01;
    for i in 0..grid.n_steps {
        let s0 = grid.time(i) / eps;
        let s1 = grid.time(i + 1) / eps;
        y = dopri_scalar(&f, s0, s1, y, &mut h, ODE_TOL)?;
        q.push(y);
    }
    Ok(Path::new(*grid, q, None))
}

// 4-point Gauss–Legendre on [0, 1].
const GL_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_87,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GL_W: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_07,
    0.326_072_577_431_273_07,
    0.173_927_422_568_726_93,
];

/// Solution of ε ξ' = 2a(t)ξ + 1 with a(t) = t − 3 q_det(t)² and
/// ξ(−T) = 1/(2|a(−T)|).
///
/// On each grid interval a is taken linear between its end values and the
/// variation-of-constants integral is done by Gauss–Legendre, which is exact
/// for the frozen exponent when a is itself linear in t.
pub fn xi_variance(params: &NormalFormParams, grid: &TimeGrid, q_det: &Path) -> Result<Vec<f64>> {
    if q_det.len() != grid.len() {
        return Err(Error::Config("q_det does not live on the given grid".into()));
    }
    let eps = params.epsilon;
    let a_of = |i: usize| grid.time(i) - 3.0 * q_det.q[i] * q_det.q[i];
    let a0 = a_of(0);
    if a0 == 0.0 {
        return Err(Error::Degenerate("a(-T) = 0, xi(-T) undefined".into()));
    }
    let mut xi = Vec::with_capacity(grid.len());
    let mut x = 1.0 / (2.0 * a0.abs());
    xi.push(x);
    for i in 0..grid.n_steps {
        let h = grid.time(i + 1) - grid.time(i);
        let (al, ar) = (a_of(i), a_of(i + 1));
        // E(u) = (2/ε)∫_u^h a, with a(v) = al + (ar − al) v/h.
        let big = |u: f64| {
            let int_from0 = |v: f64| al * v + 0.5 * (ar - al) * v * v / h;
            2.0 / eps * (int_from0(h) - int_from0(u))
        };
        let forcing: f64 = GL_X
            .iter()
            .zip(GL_W)
            .map(|(&g, w)| w * big(g * h).exp())
            .sum::<f64>()
            * h
            / eps;
        x = x * big(0.0).exp() + forcing;
        xi.push(x);
    }
    Ok(xi)
}
