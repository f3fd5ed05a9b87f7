use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar parameters of the reduced equations.
///
/// `t_start_abs` is T: runs start at −T. `h0` and `k_exit` are the constants
/// in h* = h0·σ√|ln σ| and t* = √(2kε ln(h*/σ)); `sandwich_c` scales r(σ) in
/// the sandwich processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormParams {
    pub epsilon: f64,
    pub sigma: f64,
    pub alpha: Option<f64>,
    pub beta: f64,
    #[serde(rename = "T")]
    pub t_start_abs: f64,
    pub t2: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub c1_time: f64,
    pub delta: f64,
    pub h0: f64,
    pub k_exit: f64,
    pub sandwich_c: f64,
    /// Step-size ceiling in units of ε.
    pub h_rel: f64,
}

impl NormalFormParams {
    pub fn new(epsilon: f64, sigma: f64) -> Self {
        Self {
            epsilon,
            sigma,
            alpha: None,
            beta: 3.0,
            t_start_abs: 1.0,
            t2: 1.0,
            kappa: 0.6,
            gamma: 0.3,
            c1_time: 2.0,
            delta: 0.4,
            h0: 3.0,
            k_exit: 3.0,
            sandwich_c: 1.0,
            h_rel: 0.02,
        }
    }

    /// σ tied to ε through σ = ε^{α+1/2}.
    pub fn with_alpha(epsilon: f64, alpha: f64) -> Self {
        let mut p = Self::new(epsilon, epsilon.powf(alpha + 0.5));
        p.alpha = Some(alpha);
        p
    }

    pub fn t_start(&self) -> f64 {
        -self.t_start_abs
    }

    /// Noise coefficient σ/√ε in front of dW.
    pub fn noise_scale(&self) -> f64 {
        self.sigma / self.epsilon.sqrt()
    }

    /// Largest admissible step, h_rel·ε.
    pub fn dt_max(&self) -> f64 {
        self.h_rel * self.epsilon
    }

    /// r(σ) = C·max{ε^{β−2−δ}, σ ε^{−3/2+β/2−2δ}} of the sandwich processes.
    pub fn sandwich_r(&self) -> f64 {
        let e = self.epsilon;
        let (b, d) = (self.beta, self.delta);
        self.sandwich_c * e.powf(b - 2.0 - d).max(self.sigma * e.powf(-1.5 + b / 2.0 - 2.0 * d))
    }

    /// Start of the classification window, c1·√(ε|ln σ|).
    pub fn t1(&self) -> f64 {
        self.c1_time * (self.epsilon * self.sigma.ln().abs()).sqrt()
    }

    /// h* = h0·σ√|ln σ|.
    pub fn h_star(&self) -> f64 {
        self.h0 * self.sigma * self.sigma.ln().abs().sqrt()
    }

    /// t* = √(2kε ln(h*/σ)).
    pub fn t_star(&self) -> f64 {
        let ratio = (self.h_star() / self.sigma).ln().max(0.0);
        (2.0 * self.k_exit * self.epsilon * ratio).sqrt()
    }

    /// Checks shared by every model. σ = 0 is accepted for noise-free runs.
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.epsilon) {
            return Err(Error::param("epsilon", format!("{} not in (0, 1)", self.epsilon)));
        }
        if !(self.sigma >= 0.0 && self.sigma < 1.0) {
            return Err(Error::param("sigma", format!("{} not in [0, 1)", self.sigma)));
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > -0.5) {
                return Err(Error::param("alpha", format!("{alpha} must exceed -1/2")));
            }
        }
        if !(self.t_start_abs >= 1.0 && self.t_start_abs.is_finite()) {
            return Err(Error::param("T", format!("{} must be >= 1", self.t_start_abs)));
        }
        if !(self.t2 > 0.0 && self.t2.is_finite()) {
            return Err(Error::param("t2", format!("{} must be positive", self.t2)));
        }
        if !(self.kappa > 0.5 && self.kappa < 2.0 / 3.0) {
            return Err(Error::param("kappa", format!("{} not in (1/2, 2/3)", self.kappa)));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("c1_time", self.c1_time),
            ("h0", self.h0),
            ("k_exit", self.k_exit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        if !(self.h_rel > 0.0 && self.h_rel <= 1.0) {
            return Err(Error::param("h_rel", format!("{} not in (0, 1]", self.h_rel)));
        }
        if !(self.sandwich_c >= 0.0) {
            return Err(Error::param("sandwich_c", format!("{} must be >= 0", self.sandwich_c)));
        }
        Ok(())
    }

    /// Additional constraints of the second-order model: β > 2 and
    /// 0 < δ < β/2 − 1.
    pub fn validate_underdamped(&self) -> Result<()> {
        self.validate()?;
        if !(self.beta > 2.0) {
            return Err(Error::param("beta", format!("{} must exceed 2", self.beta)));
        }
        if !(self.delta > 0.0 && self.delta < self.beta / 2.0 - 1.0) {
            return Err(Error::param(
                "delta",
                format!("{} not in (0, beta/2 - 1) = (0, {})", self.delta, self.beta / 2.0 - 1.0),
            ));
        }
        Ok(())
    }

    /// Classification window [t1, t2]; empty windows are a configuration error.
    pub fn classification_window(&self) -> Result<(f64, f64)> {
        let t1 = self.t1();
        if !(t1 < self.t2) {
            return Err(Error::Config(format!("t1 = {t1} is not below t2 = {}", self.t2)));
        }
        Ok((t1, self.t2))
    }
}
