use std::f64::consts::PI;

use serde::Serialize;

/// Real roots of t·q − q³ + ε = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumBranches {
    pub t: f64,
    /// Stable branch that carries the bias; always present.
    pub q_plus: f64,
    /// Second stable branch, present above the fold.
    pub q_minus: Option<f64>,
    /// Unstable middle branch, present above the fold.
    pub q_mid: Option<f64>,
}

impl EquilibriumBranches {
    pub fn count(&self) -> usize {
        1 + self.q_minus.is_some() as usize + self.q_mid.is_some() as usize
    }
}

/// Fold time 3(ε/2)^{2/3}: one real root below it, three above.
pub fn fold_time(epsilon: f64) -> f64 {
    3.0 * (0.5 * epsilon).powf(2.0 / 3.0)
}

pub fn residual(q: f64, t: f64, epsilon: f64) -> f64 {
    t * q - q * q * q + epsilon
}

fn polish(mut q: f64, t: f64, epsilon: f64) -> f64 {
    // Newton on f(q) = q³ − t q − ε; stop once the residual stops shrinking.
    for _ in 0..4 {
        let f = q * q * q - t * q - epsilon;
        let df = 3.0 * q * q - t;
        if df == 0.0 || f == 0.0 {
            break;
        }
        let next = q - f / df;
        if residual(next, t, epsilon).abs() >= f.abs() {
            break;
        }
        q = next;
    }
    q
}

pub fn equilibrium_branches(t: f64, epsilon: f64) -> EquilibriumBranches {
    // q³ + P q + Q = 0 with P = −t, Q = −ε.
    let disc = 4.0 * t * t * t - 27.0 * epsilon * epsilon;
    if disc > 0.0 {
        let m = 2.0 * (t / 3.0).sqrt();
        let c = (1.5 * epsilon / t * (3.0 / t).sqrt()).clamp(-1.0, 1.0);
        let phi = c.acos() / 3.0;
        let mut roots = [0, 1, 2].map(|k| polish(m * (phi - 2.0 * PI * k as f64 / 3.0).cos(), t, epsilon));
        roots.sort_by(|x, y| x.total_cmp(y));
        EquilibriumBranches { t, q_plus: roots[2], q_minus: Some(roots[0]), q_mid: Some(roots[1]) }
    } else {
        // One real root, which is positive since the cubic is −ε at 0.
        let d = (0.25 * epsilon * epsilon - t * t * t / 27.0).max(0.0).sqrt();
        let u = (0.5 * epsilon + d).cbrt();
        let q0 = if t < 0.0 {
            // u + t/(3u) cancels; q = ε/(q² − t) is the stable rewrite.
            let guess = u + t / (3.0 * u);
            epsilon / (guess * guess - t)
        } else {
            u + t / (3.0 * u)
        };
        EquilibriumBranches { t, q_plus: polish(q0, t, epsilon), q_minus: None, q_mid: None }
    }
}
