//! Pathwise ordering checks between processes driven by the same noise.

use rayon::prelude::*;
use serde::Serialize;

use super::classify::Classifier;
use super::mc::{funnel, main_grid, path_noise};
use super::mc_types::Outcome;
use crate::error::{Error, Result};
use crate::model::{dopri_scalar, NormalFormParams, ODE_TOL};
use crate::sde::{run_coupled, Force, Path, ProcessSpec, TimeGrid};

/// Largest signed violation of `lower ≤ upper + envelope` and the first
/// time it is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditReport {
    pub max_violation: f64,
    pub first_violation: Option<f64>,
    pub n_compared: usize,
}

impl AuditReport {
    fn empty() -> Self {
        AuditReport { max_violation: f64::NEG_INFINITY, first_violation: None, n_compared: 0 }
    }

    #[inline]
    fn push(&mut self, t: f64, v: f64) {
        self.n_compared += 1;
        if v > self.max_violation {
            self.max_violation = v;
        }
        if v > 0.0 && self.first_violation.is_none() {
            self.first_violation = Some(t);
        }
    }

    pub fn merge(self, o: AuditReport) -> AuditReport {
        let first = match (self.first_violation, o.first_violation) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        AuditReport {
            max_violation: self.max_violation.max(o.max_violation),
            first_violation: first,
            n_compared: self.n_compared + o.n_compared,
        }
    }

    /// True when no violation exceeds `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Check `lower(t) ≤ upper(t) + envelope(i, t)` on the common part of two
/// paths; `i` indexes the grid of `lower`. The paths must share the step.
pub fn comparison_audit(
    lower: &Path,
    upper: &Path,
    envelope: Option<&dyn Fn(usize, f64) -> f64>,
) -> Result<AuditReport> {
    let (ga, gb) = (&lower.grid, &upper.grid);
    if (ga.dt - gb.dt).abs() > 1e-12 * ga.dt {
        return Err(Error::Config(format!("grids differ in step: {} vs {}", ga.dt, gb.dt)));
    }
    let offset = |g: &TimeGrid, t: f64| ((t - g.t_start) / g.dt).round() as usize;
    let t0 = ga.t_start.max(gb.t_start);
    let (ia, ib) = (offset(ga, t0), offset(gb, t0));
    let n = (lower.len() - ia).min(upper.len() - ib);
    let mut r = AuditReport::empty();
    for k in 0..n {
        let i = ia + k;
        let t = ga.time(i);
        let env = envelope.map_or(0.0, |e| e(i, t));
        r.push(t, lower.q[i] - upper.q[ib + k] - env);
    }
    Ok(r)
}

/// Envelopes of d = q − q̃ for the Euler scheme on `grid`:
/// L_{n+1} = L_n(1 + t_n dt/ε) from min(x, 0) and
/// E_{n+1} = E_n(1 + t_n dt/ε) + dt from max(x, 0). They bound d exactly
/// while 1 + (dt/ε)(t − q² − qq̃ − q̃²) > 0 along the path.
pub fn discrete_envelopes(params: &NormalFormParams, x0: f64, grid: &TimeGrid) -> (Vec<f64>, Vec<f64>) {
    let eps = params.epsilon;
    let mut lo = Vec::with_capacity(grid.len());
    let mut hi = Vec::with_capacity(grid.len());
    let (mut l, mut e) = (x0.min(0.0), x0.max(0.0));
    lo.push(l);
    hi.push(e);
    for i in 0..grid.n_steps {
        let m = 1.0 + grid.time(i) * grid.dt / eps;
        l *= m;
        e = e * m + grid.dt;
        lo.push(l);
        hi.push(e);
    }
    (lo, hi)
}

/// The same bounds for the continuous equations:
/// min(x, 0)e^{(t²−T²)/2ε} and max(x, 0)e^{(t²−T²)/2ε} + ∫_{−T}^t e^{(t²−s²)/2ε} ds.
pub fn continuous_envelopes(params: &NormalFormParams, x0: f64, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let eps = params.epsilon;
    let t0 = grid.t_start;
    let lo = grid.times().map(|t| x0.min(0.0) * ((t * t - t0 * t0) / (2.0 * eps)).exp()).collect();
    // dE/ds = tE + ε in fast time s = t/ε, carrying the integral term only.
    let f = |s: f64, e: f64| eps * s * e + eps;
    let mut hi = Vec::with_capacity(grid.len());
    let mut e = 0.0;
    let mut h = 0.01;
    hi.push(x0.max(0.0));
    for i in 0..grid.n_steps {
        e = dopri_scalar(&f, grid.time(i) / eps, grid.time(i + 1) / eps, e, &mut h, ODE_TOL)?;
        let t = grid.time(i + 1);
        hi.push(e + x0.max(0.0) * ((t * t - t0 * t0) / (2.0 * eps)).exp());
    }
    Ok((lo, hi))
}

/// Ordering checks of the coupled pair (q from x0, q̃ from 0) over an
/// ensemble; violations are positive when an ordering fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub x0: f64,
    pub n_paths: usize,
    /// L_n ≤ q − q̃ on the discrete envelope.
    pub lower: AuditReport,
    /// q − q̃ ≤ E_n on the discrete envelope.
    pub upper: AuditReport,
    pub lower_continuous: AuditReport,
    pub upper_continuous: AuditReport,
    /// Steps where the Euler difference map was not order-preserving.
    pub non_monotone_steps: u64,
}

pub fn comparison_suite(params: &NormalFormParams, x0: f64, n_paths: usize, seed: u64) -> Result<ComparisonReport> {
    params.validate()?;
    let grid = main_grid(params)?;
    let eps = params.epsilon;
    let (dlo, dhi) = discrete_envelopes(params, x0, &grid);
    let (clo, chi) = continuous_envelopes(params, x0, &grid)?;
    let specs = [
        ProcessSpec::Overdamped { force: Force::NormalForm { bias: eps }, x0, start: None },
        ProcessSpec::Overdamped { force: Force::NormalForm { bias: 0.0 }, x0: 0.0, start: None },
    ];
    let per_path = (0..n_paths)
        .into_par_iter()
        .map(|k| -> Result<[AuditReport; 4]> {
            let mut r = [AuditReport::empty(); 4];
            let mut prev: Option<(f64, f64)> = None;
            let mut bad = 0u64;
            run_coupled(params, &specs, &grid, &path_noise(seed, k), |i, t, s| {
                let (q, qt) = (s[0].q().unwrap_or(f64::NAN), s[1].q().unwrap_or(f64::NAN));
                let d = q - qt;
                r[0].push(t, dlo[i] - d);
                r[1].push(t, d - dhi[i]);
                r[2].push(t, clo[i] - d);
                r[3].push(t, d - chi[i]);
                if let Some((a, b)) = prev {
                    let c = a * a + a * b + b * b;
                    if 1.0 + grid.dt / eps * (grid.time(i - 1) - c) <= 0.0 {
                        bad += 1;
                    }
                }
                prev = Some((q, qt));
                true
            })?;
            r[0].n_compared = bad as usize;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = [AuditReport::empty(); 4];
    let mut non_monotone = 0u64;
    for mut r in per_path {
        non_monotone += r[0].n_compared as u64;
        r[0].n_compared = r[1].n_compared;
        for j in 0..4 {
            acc[j] = acc[j].merge(r[j]);
        }
    }
    Ok(ComparisonReport {
        x0,
        n_paths,
        lower: acc[0],
        upper: acc[1],
        lower_continuous: acc[2],
        upper_continuous: acc[3],
        non_monotone_steps: non_monotone,
    })
}

/// Sandwich q⁻ ≤ q + ε^β P ≤ q⁺ for one value of the constant C in r(σ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub c: f64,
    pub r: f64,
    pub t0: f64,
    pub n_paths: usize,
    /// max of q⁻ − (q + ε^β P).
    pub lower: AuditReport,
    /// max of (q + ε^β P) − q⁺.
    pub upper: AuditReport,
    pub violating_paths: usize,
    /// Paths in E1 ∪ E2 (sup|Q| > σε^{−1/2−δ} or sup|P| > σε^{−1/2−β/2−δ}).
    pub n_e1: usize,
    pub n_e2: usize,
    /// q⁻ and q⁺ agree on Right or Left but q does not.
    pub implication_counterexamples: usize,
}

#[derive(Debug, Clone, Copy)]
struct SandwichPath {
    lower: AuditReport,
    upper: AuditReport,
    e1: bool,
    e2: bool,
    counterexample: bool,
}

fn sandwich_path(params: &NormalFormParams, grid: &TimeGrid, t0: f64, seed: u64, k: usize) -> Result<SandwichPath> {
    let eps = params.epsilon;
    let r = params.sandwich_r();
    let noise = path_noise(seed, k);
    let start = funnel(params, Force::NormalForm { bias: eps }, &noise)?;
    let (x, v) = (start.q, start.p);
    let specs = [
        ProcessSpec::Underdamped { force: Force::NormalForm { bias: eps }, x0: x, v0: v },
        ProcessSpec::OuPair,
        ProcessSpec::Overdamped { force: Force::NormalForm { bias: eps * (1.0 - r) }, x0: x - 3.0, start: Some(t0) },
        ProcessSpec::Overdamped { force: Force::NormalForm { bias: eps * (1.0 + r) }, x0: x + 3.0, start: Some(t0) },
    ];
    let mass = eps.powf(params.beta);
    let q_bound = params.sigma * eps.powf(-0.5 - params.delta);
    let p_bound = params.sigma * eps.powf(-0.5 - params.beta / 2.0 - params.delta);
    let mut out = SandwichPath {
        lower: AuditReport::empty(),
        upper: AuditReport::empty(),
        e1: false,
        e2: false,
        counterexample: false,
    };
    let mut cls = [Classifier::new(params)?; 3];
    run_coupled(params, &specs, grid, &noise, |_, t, s| {
        let (big_q, big_p) = (s[1].q().unwrap_or(0.0), s[1].p().unwrap_or(0.0));
        out.e1 |= big_q.abs() > q_bound;
        out.e2 |= big_p.abs() > p_bound;
        let q = s[0].q().unwrap_or(f64::NAN);
        cls[0].observe(t, q);
        if let (Some(lo), Some(hi)) = (s[2].q(), s[3].q()) {
            let eta = q + mass * big_p;
            out.lower.push(t, lo - eta);
            out.upper.push(t, eta - hi);
            cls[1].observe(t, lo);
            cls[2].observe(t, hi);
        }
        true
    })?;
    let (o, lo, hi) = (cls[0].outcome(), cls[1].outcome(), cls[2].outcome());
    out.counterexample = lo == hi && lo != Outcome::Undecided && o != lo;
    Ok(out)
}

/// Coupled run of the underdamped q (funnel start), the pair (Q, P) and
/// q± from x ± 3 at t0 = −T + 2ε^{β−δ}, x = q(−T).
pub fn sandwich_run(params: &NormalFormParams, n_paths: usize, seed: u64, tol: f64) -> Result<SandwichReport> {
    params.validate_underdamped()?;
    let grid = main_grid(params)?;
    let t0 = params.t_start() + 2.0 * params.epsilon.powf(params.beta - params.delta);
    let paths = (0..n_paths)
        .into_par_iter()
        .map(|k| sandwich_path(params, &grid, t0, seed, k))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = SandwichReport {
        c: params.sandwich_c,
        r: params.sandwich_r(),
        t0,
        n_paths,
        lower: AuditReport::empty(),
        upper: AuditReport::empty(),
        violating_paths: 0,
        n_e1: 0,
        n_e2: 0,
        implication_counterexamples: 0,
    };
    for p in &paths {
        rep.lower = rep.lower.merge(p.lower);
        rep.upper = rep.upper.merge(p.upper);
        rep.violating_paths += (!p.lower.holds(tol) || !p.upper.holds(tol)) as usize;
        rep.n_e1 += p.e1 as usize;
        rep.n_e2 += p.e2 as usize;
        rep.implication_counterexamples += p.counterexample as usize;
    }
    Ok(rep)
}

/// Candidate values of C tried in increasing order.
pub const SANDWICH_C_CANDIDATES: [f64; 8] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];

/// Smallest candidate C for which the sandwich holds on every path within
/// `tol`, with the report of every candidate tried.
pub fn minimal_sandwich_c(
    params: &NormalFormParams,
    n_paths: usize,
    seed: u64,
    tol: f64,
) -> Result<(Option<f64>, Vec<SandwichReport>)> {
    let mut reports = Vec::new();
    for &c in &SANDWICH_C_CANDIDATES {
        let mut p = *params;
        p.sandwich_c = c;
        let rep = sandwich_run(&p, n_paths, seed, tol)?;
        let ok = rep.violating_paths == 0;
        reports.push(rep);
        if ok {
            return Ok((Some(c), reports));
        }
    }
    Ok((None, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_paths_have_zero_violation() {
        let grid = TimeGrid::new(0.0, 1.0, 0.01).unwrap();
        let q: Vec<f64> = grid.times().map(|t| t.sin()).collect();
        let a = Path::new(grid, q, None);
        let r = comparison_audit(&a, &a, None).unwrap();
        assert_eq!(r.max_violation, 0.0);
        assert_eq!(r.first_violation, None);
        assert_eq!(r.n_compared, grid.len());
    }

    #[test]
    fn audit_aligns_delayed_path() {
        let grid = TimeGrid::new(0.0, 1.0, 0.01).unwrap();
        let late = TimeGrid::with_steps(grid.time(10), 1.0, 90).unwrap();
        let a = Path::new(grid, vec![0.0; grid.len()], None);
        let mut q = vec![1.0; late.len()];
        q[5] = -0.5;
        let b = Path::new(late, q, None);
        let r = comparison_audit(&a, &b, None).unwrap();
        assert_eq!(r.n_compared, 91);
        assert_eq!(r.max_violation, 0.5);
        assert!((r.first_violation.unwrap() - 0.15).abs() < 1e-12);
        let env = |_: usize, _: f64| 0.5;
        assert_eq!(comparison_audit(&a, &b, Some(&env)).unwrap().max_violation, 0.0);
    }

    #[test]
    fn envelopes_agree_for_small_steps() {
        let params = NormalFormParams::new(0.05, 0.0);
        let grid = TimeGrid::new(-1.0, 1.0, 1e-5).unwrap();
        let (dl, dh) = discrete_envelopes(&params, 0.5, &grid);
        let (cl, ch) = continuous_envelopes(&params, 0.5, &grid).unwrap();
        let i = grid.len() / 2;
        assert_eq!(dl[i], 0.0);
        assert_eq!(cl[i], 0.0);
        assert!((dh[i] / ch[i] - 1.0).abs() < 1e-3, "{} {}", dh[i], ch[i]);
    }

    #[test]
    fn noiseless_orderings_hold() {
        let mut params = NormalFormParams::new(0.05, 0.0);
        params.h_rel = 0.02;
        for x0 in [-0.5, 0.5] {
            let r = comparison_suite(&params, x0, 1, 1).unwrap();
            assert!(r.lower.holds(1e-12) && r.upper.holds(1e-12), "{r:?}");
        }
    }
}
