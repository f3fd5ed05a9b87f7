//! Finite-range pair potential for the three-particle chain.
//!
//! The well is specified through its curvature w = U'':
//! on [0, r_m] a concave parabola w = −A(r − c0)(r − r_q), on [r_m, b] a
//! cubic x²(e0 + e1·x) in x = b − r matched to the parabola in value and slope.
//! U and U' follow by integrating down from U(b) = U'(b) = 0, so U is C³ at
//! the cutoff. The root r_q is chosen so that U'(a) = 0. With the defaults
//! U'''' = −2A on the whole parabola piece, which covers the window around
//! the inflection point c0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub a: f64,
    pub b: f64,
    /// Design location of the inflection point.
    pub c0: f64,
    /// Where the parabola hands over to the cubic.
    pub join: f64,
    /// Curvature scale A of the parabola piece.
    pub stiffness: f64,
    /// Half-width, in time units, of the window around t0 on which U''''
    /// must be negative.
    pub window: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { a: 1.0, b: 2.5, c0: 1.6, join: 1.85, stiffness: 1.0, window: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub a: f64,
    pub b: f64,
    /// Inflection point, located by bisection on U''.
    pub c0: f64,
    c0_design: f64,
    join: f64,
    stiffness: f64,
    r_q: f64,
    e0: f64,
    e1: f64,
    // Value and slope of U at the join, for the parabola piece.
    u_join: f64,
    du_join: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self::new(PotentialConfig::default()).expect("default potential is valid")
    }
}

impl PotentialSpec {
    pub fn new(cfg: PotentialConfig) -> Result<Self> {
        let PotentialConfig { a, b, c0, join, stiffness, window } = cfg;
        if !(a > 0.0 && a < c0 && c0 < join && join < b && stiffness > 0.0 && window > 0.0) {
            return Err(Error::param(
                "potential",
                format!("need 0 < a < c0 < join < b and positive stiffness/window, got {cfg:?}"),
            ));
        }
        // ∫_a^b w is affine in r_q; solve for the root directly.
        let integral = |r_q: f64| {
            let mut s = Self::raw(a, b, c0, join, stiffness, r_q);
            s.finish();
            s.w_integral(a)
        };
        let i0 = integral(0.0);
        let i1 = integral(1.0);
        if i1 == i0 {
            return Err(Error::param("potential", "cannot place the minimum at a"));
        }
        let r_q = -i0 / (i1 - i0);
        let mut spec = Self::raw(a, b, c0, join, stiffness, r_q);
        spec.finish();
        spec.c0 = spec.find_inflection()?;
        spec.check(window)?;
        Ok(spec)
    }

    fn raw(a: f64, b: f64, c0: f64, join: f64, stiffness: f64, r_q: f64) -> Self {
        Self { a, b, c0, c0_design: c0, join, stiffness, r_q, e0: 0.0, e1: 0.0, u_join: 0.0, du_join: 0.0 }
    }

    /// Fill the cubic coefficients and the join data from r_q.
    fn finish(&mut self) {
        let xm = self.b - self.join;
        let w = self.w1(self.join);
        let dw = self.dw1(self.join);
        // e0 xm² + e1 xm³ = w ;  −(2 e0 xm + 3 e1 xm²) = dw
        let det = xm * xm * (-3.0 * xm * xm) - xm * xm * xm * (-2.0 * xm);
        self.e0 = (w * (-3.0 * xm * xm) - xm * xm * xm * dw) / det;
        self.e1 = (xm * xm * dw - (-2.0 * xm) * w) / det;
        self.u_join = self.e0 * xm.powi(4) / 12.0 + self.e1 * xm.powi(5) / 20.0;
        self.du_join = -(self.e0 * xm.powi(3) / 3.0 + self.e1 * xm.powi(4) / 4.0);
    }

    fn w1(&self, r: f64) -> f64 {
        -self.stiffness * (r - self.c0_design()) * (r - self.r_q)
    }

    fn dw1(&self, r: f64) -> f64 {
        -self.stiffness * ((r - self.r_q) + (r - self.c0_design()))
    }

    fn c0_design(&self) -> f64 {
        self.c0_design
    }

    /// ∫_r^b U''(s) ds = −U'(r).
    fn w_integral(&self, r: f64) -> f64 {
        -self.du(r)
    }

    pub fn u(&self, r: f64) -> f64 {
        if r >= self.b {
            0.0
        } else if r >= self.join {
            let x = self.b - r;
            self.e0 * x.powi(4) / 12.0 + self.e1 * x.powi(5) / 20.0
        } else {
            let d = r - self.join;
            let w = self.w1(self.join);
            let dw = self.dw1(self.join);
            let k2 = -self.stiffness;
            self.u_join + self.du_join * d + w * d * d / 2.0 + dw * d.powi(3) / 6.0 + k2 * d.powi(4) / 12.0
        }
    }

    pub fn du(&self, r: f64) -> f64 {
        if r >= self.b {
            0.0
        } else if r >= self.join {
            let x = self.b - r;
            -(self.e0 * x.powi(3) / 3.0 + self.e1 * x.powi(4) / 4.0)
        } else {
            let d = r - self.join;
            let w = self.w1(self.join);
            let dw = self.dw1(self.join);
            let k2 = -self.stiffness;
            self.du_join + w * d + dw * d * d / 2.0 + k2 * d.powi(3) / 3.0
        }
    }

    pub fn d2u(&self, r: f64) -> f64 {
        if r >= self.b {
            0.0
        } else if r >= self.join {
            let x = self.b - r;
            x * x * (self.e0 + self.e1 * x)
        } else {
            self.w1(r)
        }
    }

    pub fn d3u(&self, r: f64) -> f64 {
        if r >= self.b {
            0.0
        } else if r >= self.join {
            let x = self.b - r;
            -(2.0 * self.e0 * x + 3.0 * self.e1 * x * x)
        } else {
            self.dw1(r)
        }
    }

    pub fn d4u(&self, r: f64) -> f64 {
        if r >= self.b {
            0.0
        } else if r >= self.join {
            let x = self.b - r;
            2.0 * self.e0 + 6.0 * self.e1 * x
        } else {
            -2.0 * self.stiffness
        }
    }

    /// Largest |U''| on [0, b], used to bound explicit step sizes.
    pub fn max_curvature(&self) -> f64 {
        (0..=1000)
            .map(|i| self.d2u(self.b * i as f64 / 1000.0).abs())
            .fold(0.0, f64::max)
    }

    /// Bifurcation time t0 with a(1 + t0) = c0.
    pub fn t0(&self) -> f64 {
        self.c0 / self.a - 1.0
    }

    fn find_inflection(&self) -> Result<f64> {
        let (mut lo, mut hi) = (self.a, self.b);
        // U'' > 0 at a and < 0 just before b.
        hi -= 1e-9 * (self.b - self.a);
        if !(self.d2u(lo) > 0.0 && self.d2u(hi) < 0.0) {
            return Err(Error::param("potential", "U'' does not change sign on (a, b)"));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.d2u(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn check(&self, window: f64) -> Result<()> {
        let n = 2000;
        if (self.du(self.a)).abs() > 1e-10 || !(self.d2u(self.a) > 0.0) {
            return Err(Error::param("potential", "a is not a nondegenerate minimum"));
        }
        // Exactly one sign change of U'' on (0, b).
        let mut changes = 0;
        let mut prev = self.d2u(0.0);
        for i in 1..n {
            let w = self.d2u(self.b * i as f64 / n as f64);
            if w != 0.0 && prev != 0.0 && w.signum() != prev.signum() {
                changes += 1;
            }
            if w != 0.0 {
                prev = w;
            }
        }
        if changes != 1 {
            return Err(Error::param("potential", format!("U'' changes sign {changes} times")));
        }
        let lo = self.a * (1.0 + self.t0() - window);
        let hi = self.a * (1.0 + self.t0() + window);
        let worst = (0..=n)
            .map(|i| self.d4u(lo + (hi - lo) * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(worst < 0.0) {
            return Err(Error::param(
                "potential",
                format!("U'''' reaches {worst} on [{lo}, {hi}]; it must stay negative"),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let u = PotentialSpec::default();
        assert!(u.du(u.a).abs() < 1e-12);
        assert!(u.d2u(u.a) > 0.0);
        assert!(u.u(u.a) < 0.0);
        assert!((u.c0 - 1.6).abs() < 1e-12);
        assert!(u.d2u(u.c0).abs() < 1e-12);
        assert!((u.t0() - 0.6).abs() < 1e-12);
        for r in [2.5, 2.7, 10.0] {
            assert_eq!((u.u(r), u.du(r), u.d2u(r)), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn smooth_at_join_and_cutoff() {
        let u = PotentialSpec::default();
        let h = 1e-9;
        for r in [u.join, u.b] {
            for f in [PotentialSpec::u, PotentialSpec::du, PotentialSpec::d2u, PotentialSpec::d3u] {
                assert!((f(&u, r - h) - f(&u, r + h)).abs() < 1e-7, "jump at {r}");
            }
        }
    }

    #[test]
    fn derivatives_are_consistent() {
        let u = PotentialSpec::default();
        let h = 1e-5;
        for r in [0.3, 1.0, 1.5, 1.7, 2.0, 2.4] {
            let fd1 = (u.u(r + h) - u.u(r - h)) / (2.0 * h);
            let fd2 = (u.du(r + h) - u.du(r - h)) / (2.0 * h);
            let fd3 = (u.d2u(r + h) - u.d2u(r - h)) / (2.0 * h);
            let fd4 = (u.d3u(r + h) - u.d3u(r - h)) / (2.0 * h);
            assert!((fd1 - u.du(r)).abs() < 1e-8);
            assert!((fd2 - u.d2u(r)).abs() < 1e-8);
            assert!((fd3 - u.d3u(r)).abs() < 1e-8);
            assert!((fd4 - u.d4u(r)).abs() < 1e-6);
        }
    }

    #[test]
    fn fourth_derivative_negative_near_inflection() {
        let u = PotentialSpec::default();
        for i in 0..=40 {
            let r = u.c0 - 0.2 + 0.01 * i as f64;
            assert!(u.d4u(r) < 0.0);
        }
    }

    #[test]
    fn rejects_window_over_join() {
        let cfg = PotentialConfig { join: 1.75, ..Default::default() };
        assert!(PotentialSpec::new(cfg).is_err());
        let cfg = PotentialConfig { c0: 0.9, ..Default::default() };
        assert!(PotentialSpec::new(cfg).is_err());
    }
}
