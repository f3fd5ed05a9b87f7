//! Airy functions Ai, Bi and their derivatives on the real line.
//!
//! Inside |x| <= 9 values come from a table of nodes spaced 0.5 apart, built
//! once by Taylor re-expansion of w'' = x w, followed by a single Taylor step
//! of length at most 0.25 to the requested point. Beyond |x| = 9 the standard
//! asymptotic expansions are summed to their smallest term.
//!
//! Stepping directions follow the dominant solution so errors never grow:
//! Bi forward from 0, Ai forward from 0 up to 2 and backward from 9 (seeded by
//! the asymptotic series) down to 2.5, both forward on the negative axis.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

pub const AI0: f64 = 0.355_028_053_887_817_239_26;
pub const DAI0: f64 = -0.258_819_403_792_806_798_41;
pub const BI0: f64 = 0.614_926_627_446_000_735_15;
pub const DBI0: f64 = 0.448_288_357_353_826_357_91;

/// Boundary of the tabulated region.
pub const MATCH: f64 = 9.0;
const NODE_STEP: f64 = 0.5;
const N_HALF: usize = 18;
/// Ai is stepped forward up to this node index (x = 2) and backward above it.
const AI_FORWARD_LAST: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryValue {
    pub x: f64,
    pub ai: f64,
    pub bi: f64,
    pub dai: f64,
    pub dbi: f64,
}

impl AiryValue {
    /// Ai·Bi' − Ai'·Bi, which equals 1/π.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.dbi - self.dai * self.bi
    }

    /// sqrt(Ai² + Bi²); the natural error scale on the oscillatory axis.
    pub fn modulus(&self) -> f64 {
        self.ai.hypot(self.bi)
    }
}

/// Pair (w, w') of a solution of w'' = x w.
type Sol = (f64, f64);

/// Advance two solutions of w'' = x w from `x0` by `h` with a Taylor series.
fn taylor_step(x0: f64, h: f64, a: Sol, b: Sol) -> (Sol, Sol) {
    // c[n-1], c[n] for each solution; c2 = x0 c0 / 2
    let mut ca = [a.0, a.1, 0.5 * x0 * a.0];
    let mut cb = [b.0, b.1, 0.5 * x0 * b.0];
    let mut wa = a.0 + h * a.1 + h * h * ca[2];
    let mut wb = b.0 + h * b.1 + h * h * cb[2];
    let mut da = a.1 + 2.0 * h * ca[2];
    let mut db = b.1 + 2.0 * h * cb[2];
    let mut hn = h * h; // h^n for the current top coefficient index n = 2
    let mut quiet = 0;
    for n in 2..200usize {
        // c[n+1] = (x0 c[n-1] + c[n-2]) / ((n+1) n)
        let denom = ((n + 1) * n) as f64;
        let na = (x0 * ca[1] + ca[0]) / denom;
        let nb = (x0 * cb[1] + cb[0]) / denom;
        ca = [ca[1], ca[2], na];
        cb = [cb[1], cb[2], nb];
        let dterm_a = (n + 1) as f64 * na * hn;
        let dterm_b = (n + 1) as f64 * nb * hn;
        hn *= h;
        let ta = na * hn;
        let tb = nb * hn;
        wa += ta;
        wb += tb;
        da += dterm_a;
        db += dterm_b;
        let small = |t: f64, s: f64| t.abs() <= 1e-18 * s.abs();
        if small(ta, wa) && small(tb, wb) && small(dterm_a, da) && small(dterm_b, db) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    ((wa, da), (wb, db))
}

/// Asymptotic-series coefficients u_k and v_k.
fn uv_coefficients() -> &'static ([f64; 64], [f64; 64]) {
    static UV: OnceLock<([f64; 64], [f64; 64])> = OnceLock::new();
    UV.get_or_init(|| {
        let mut u = [0.0; 64];
        let mut v = [0.0; 64];
        u[0] = 1.0;
        v[0] = 1.0;
        for k in 1..64 {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
        }
        (u, v)
    })
}

/// Sum c_k (sign)^k / zeta^k over the indices `start, start+2, ...` (or every
/// index when `stride` is 1), stopping at the smallest term.
fn asym_sum(c: &[f64; 64], zeta: f64, alternate: bool, start: usize, stride: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = start;
    while k < 64 {
        let mut term = c[k] / zeta.powi(k as i32);
        if alternate && ((k - start) / stride) % 2 == 1 {
            term = -term;
        }
        if term.abs() > prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if prev <= 1e-18 * sum.abs() {
            break;
        }
        k += stride;
    }
    sum
}

/// Series factors of the x > 0 expansions:
/// Ai = e^{-ζ}/(2√π x^{1/4}) sa, Ai' = −x^{1/4} e^{-ζ}/(2√π) sda,
/// Bi = e^{ζ}/(√π x^{1/4}) sb, Bi' = x^{1/4} e^{ζ}/√π sdb.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PositiveAsym {
    pub zeta: f64,
    pub sa: f64,
    pub sda: f64,
    pub sb: f64,
    pub sdb: f64,
}

pub(crate) fn positive_asym(x: f64) -> PositiveAsym {
    let (u, v) = uv_coefficients();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    PositiveAsym {
        zeta,
        sa: asym_sum(u, zeta, true, 0, 1),
        sda: asym_sum(v, zeta, true, 0, 1),
        sb: asym_sum(u, zeta, false, 0, 1),
        sdb: asym_sum(v, zeta, false, 0, 1),
    }
}

fn asym_positive(x: f64) -> AiryValue {
    let s = positive_asym(x);
    let q = x.powf(0.25);
    let sp = PI.sqrt();
    let decay = (-s.zeta).exp();
    let growth = s.zeta.exp();
    AiryValue {
        x,
        ai: decay / (2.0 * sp * q) * s.sa,
        dai: -q * decay / (2.0 * sp) * s.sda,
        bi: growth / (sp * q) * s.sb,
        dbi: q * growth / sp * s.sdb,
    }
}

fn asym_negative(x: f64) -> AiryValue {
    let (u, v) = uv_coefficients();
    let y = -x;
    let zeta = 2.0 / 3.0 * y * y.sqrt();
    let (sn, cs) = (zeta - FRAC_PI_4).sin_cos();
    let ue = asym_sum(u, zeta, true, 0, 2);
    let uo = asym_sum(u, zeta, true, 1, 2);
    let ve = asym_sum(v, zeta, true, 0, 2);
    let vo = asym_sum(v, zeta, true, 1, 2);
    let q = y.powf(0.25);
    let sp = PI.sqrt();
    AiryValue {
        x,
        ai: (cs * ue + sn * uo) / (sp * q),
        dai: q / sp * (sn * ve - cs * vo),
        bi: (-sn * ue + cs * uo) / (sp * q),
        dbi: q / sp * (cs * ve + sn * vo),
    }
}

/// Node values indexed by k + N_HALF for x = k·NODE_STEP, k in −18..=18.
fn table() -> &'static [AiryValue; 2 * N_HALF + 1] {
    static TABLE: OnceLock<[AiryValue; 2 * N_HALF + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let blank = AiryValue { x: 0.0, ai: 0.0, bi: 0.0, dai: 0.0, dbi: 0.0 };
        let mut t = [blank; 2 * N_HALF + 1];
        let origin = AiryValue { x: 0.0, ai: AI0, bi: BI0, dai: DAI0, dbi: DBI0 };
        t[N_HALF] = origin;
        for dir in [1.0f64, -1.0] {
            let mut a = (AI0, DAI0);
            let mut b = (BI0, DBI0);
            for k in 1..=N_HALF {
                let x0 = dir * (k - 1) as f64 * NODE_STEP;
                let (na, nb) = taylor_step(x0, dir * NODE_STEP, a, b);
                a = na;
                b = nb;
                let idx = (N_HALF as isize + dir as isize * k as isize) as usize;
                t[idx] = AiryValue { x: x0 + dir * NODE_STEP, ai: a.0, dai: a.1, bi: b.0, dbi: b.1 };
            }
        }
        // Ai backward from the asymptotic value at the far node.
        let far = asym_positive(MATCH);
        let mut a = (far.ai, far.dai);
        t[2 * N_HALF].ai = far.ai;
        t[2 * N_HALF].dai = far.dai;
        for k in (AI_FORWARD_LAST + 1..N_HALF).rev() {
            let x0 = (k + 1) as f64 * NODE_STEP;
            let (na, _) = taylor_step(x0, -NODE_STEP, a, (0.0, 0.0));
            a = na;
            t[N_HALF + k].ai = a.0;
            t[N_HALF + k].dai = a.1;
        }
        t
    })
}

/// Ai, Bi, Ai', Bi' at `x`.
pub fn airy_eval(x: f64) -> Result<AiryValue> {
    if !x.is_finite() {
        return Err(Error::domain("airy_eval", format!("non-finite argument {x}")));
    }
    if x > MATCH {
        return Ok(asym_positive(x));
    }
    if x < -MATCH {
        return Ok(asym_negative(x));
    }
    let k = (x / NODE_STEP).round();
    let node = table()[(k as isize + N_HALF as isize) as usize];
    let h = x - node.x;
    if h == 0.0 {
        return Ok(node);
    }
    let (a, b) = taylor_step(node.x, h, (node.ai, node.dai), (node.bi, node.dbi));
    Ok(AiryValue { x, ai: a.0, dai: a.1, bi: b.0, dbi: b.1 })
}

/// ln Bi(x) for x >= 0, finite far beyond the point where Bi overflows.
pub fn log_bi(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain("log_bi", format!("argument {x} outside [0, inf)")));
    }
    if x <= MATCH {
        return Ok(airy_eval(x)?.bi.ln());
    }
    let s = positive_asym(x);
    Ok(s.zeta - 0.5 * PI.ln() - 0.25 * x.ln() + s.sb.ln())
}
