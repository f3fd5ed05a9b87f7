//! Airy functions and the exponentially weighted Airy integrals behind the
//! linear model's limit law.

pub mod airy;
pub mod quadrature;

use std::f64::consts::PI;

use serde::Serialize;

pub use airy::{airy_eval, log_bi, AiryValue};

use crate::error::{Error, Result};
use airy::{positive_asym, MATCH};
use quadrature::RealLine;

/// Large-p constant quoted for p^{1/2} e^{-2p³/3} J(p).
pub const C1_QUOTED: f64 = 0.141_047_395_886_939_07; // 1/(4√π)
/// Small-p constant for the same quantity, 1/(√π 2^{3/2}).
pub const C2: f64 = 0.199_471_140_200_716_34;
/// Exact value of p^{1/2} e^{-2p³/3} J(p) for every p > 0.
pub const J_EXACT_CONSTANT: f64 = C2;

const PANEL_TOL: f64 = 1e-14;
const TAIL_CUTOFF: f64 = 1e-18;

fn panel_width(s: f64) -> f64 {
    if s < -1.0 {
        (PI / (2.0 * (-s).sqrt())).min(1.0)
    } else {
        1.0
    }
}

fn check_p(func: &'static str, p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(func, format!("p = {p} must be positive and finite")));
    }
    Ok(())
}

/// ps − (2/3)s^{3/2} − p³/3 in the factored form −(r − p)²(2r + p)/3 with
/// r = √s, which avoids cancelling large terms near the peak s = p².
fn laplace_exponent(p: f64, s: f64) -> f64 {
    let r = s.sqrt();
    -(r - p) * (r - p) * (2.0 * r + p) / 3.0
}

/// ∫ e^{ps} Ai(s) ds over the real line by quadrature. Equals e^{p³/3}.
pub fn airy_laplace(p: f64) -> Result<f64> {
    check_p("airy_laplace", p)?;
    let shift = p * p * p / 3.0;
    // Integrand scaled by e^{-p³/3} so the peak stays O(1).
    let f = |s: f64| -> f64 {
        if s > MATCH {
            let a = positive_asym(s);
            laplace_exponent(p, s).exp() / (2.0 * PI.sqrt() * s.powf(0.25)) * a.sa
        } else {
            airy_eval(s).map(|v| v.ai).unwrap_or(f64::NAN) * (p * s - shift).exp()
        }
    };
    let envelope = |s: f64| -> f64 {
        if s > 0.0 {
            laplace_exponent(p, s).exp()
        } else {
            (p * s - shift).exp()
        }
    };
    let line = RealLine {
        center: p * p,
        width: &panel_width,
        envelope: &envelope,
        cutoff: TAIL_CUTOFF,
        panel_tol: PANEL_TOL,
        max_extent: 1e6,
    };
    let scaled = line.integrate(&f)?;
    finite("airy_laplace", scaled * shift.exp())
}

/// e^{-2p³/3} J(p), which stays O(p^{-1/2}) where J itself overflows.
pub fn j_integral_scaled(p: f64) -> Result<f64> {
    check_p("j_integral", p)?;
    let shift = 2.0 * p * p * p / 3.0;
    // Beyond the match point Ai is replaced by its asymptotic form, kept in
    // log space so the cancellation of e^{2ps} against e^{-2ζ} is exact.
    let f = |s: f64| -> f64 {
        if s > MATCH {
            let a = positive_asym(s);
            (2.0 * laplace_exponent(p, s)).exp() / (4.0 * PI * s.sqrt()) * a.sa * a.sa
        } else {
            let ai = airy_eval(s).map(|v| v.ai).unwrap_or(f64::NAN);
            ai * ai * (2.0 * p * s - shift).exp()
        }
    };
    let envelope = |s: f64| -> f64 {
        if s > 0.0 {
            (2.0 * laplace_exponent(p, s)).exp()
        } else {
            (2.0 * p * s - shift).exp() / (-s).sqrt().max(1.0)
        }
    };
    let line = RealLine {
        center: p * p,
        width: &panel_width,
        envelope: &envelope,
        cutoff: TAIL_CUTOFF,
        panel_tol: PANEL_TOL,
        max_extent: 1e7,
    };
    finite("j_integral", line.integrate(&f)?)
}

/// J(p) = ∫ e^{2ps} Ai(s)² ds.
pub fn j_integral(p: f64) -> Result<f64> {
    let scaled = j_integral_scaled(p)?;
    finite("j_integral", scaled * (2.0 * p * p * p / 3.0).exp())
}

/// p^{1/2} e^{-2p³/3} J(p), the quantity whose p → ∞ and p → 0 limits the
/// constants above describe.
pub fn j_limit_ratio(p: f64) -> Result<f64> {
    Ok(p.sqrt() * j_integral_scaled(p)?)
}

/// Closed form e^{2p³/3} / (2√(2πp)) of J(p), used as a cross-check.
pub fn j_closed_form(p: f64) -> f64 {
    (2.0 * p * p * p / 3.0).exp() / (2.0 * (2.0 * PI * p).sqrt())
}

fn finite(func: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("{func}: result {v} is not finite")))
    }
}

/// Summary of the built-in special-function checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfTestReport {
    /// max |W − 1/π| over a uniform grid of [−10, 10].
    pub wronskian_max_error: f64,
    pub wronskian_points: usize,
    /// max |∫e^{ps}Ai / e^{p³/3} − 1| over p ∈ {0.5, 1, 2}.
    pub laplace_max_rel_error: f64,
    /// p^{1/2}e^{−2p³/3}J(p) at p = 4 and its relative distance to C1_QUOTED.
    pub j_ratio_large: f64,
    pub c1_rel_error: f64,
    /// The same quantity at p = 0.01 against C2.
    pub j_ratio_small: f64,
    pub c2_rel_error: f64,
}

pub const SELF_TEST_LAPLACE_P: [f64; 3] = [0.5, 1.0, 2.0];
pub const SELF_TEST_J_LARGE: f64 = 4.0;
pub const SELF_TEST_J_SMALL: f64 = 0.01;

pub fn self_test(wronskian_points: usize) -> Result<SelfTestReport> {
    if wronskian_points < 2 {
        return Err(Error::domain("self_test", "need at least two Wronskian points"));
    }
    let mut w_err: f64 = 0.0;
    for i in 0..wronskian_points {
        let x = -10.0 + 20.0 * i as f64 / (wronskian_points - 1) as f64;
        w_err = w_err.max((airy_eval(x)?.wronskian() - 1.0 / PI).abs());
    }
    let mut l_err: f64 = 0.0;
    for p in SELF_TEST_LAPLACE_P {
        l_err = l_err.max((airy_laplace(p)? / (p * p * p / 3.0).exp() - 1.0).abs());
    }
    let large = j_limit_ratio(SELF_TEST_J_LARGE)?;
    let small = j_limit_ratio(SELF_TEST_J_SMALL)?;
    Ok(SelfTestReport {
        wronskian_max_error: w_err,
        wronskian_points,
        laplace_max_rel_error: l_err,
        j_ratio_large: large,
        c1_rel_error: (large / C1_QUOTED - 1.0).abs(),
        j_ratio_small: small,
        c2_rel_error: (small / C2 - 1.0).abs(),
    })
}
