//! Adaptive Gauss–Kronrod (10/21 point) quadrature on finite panels, plus a
//! panel walker for integrands on the whole real line whose tails decay
//! superexponentially or exponentially.

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1], descending; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_887_140_558,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const MAX_DEPTH: u32 = 40;

/// One application of the 21-point rule.
#[derive(Debug, Clone, Copy)]
pub struct GkEstimate {
    pub value: f64,
    pub error: f64,
    /// Largest |f| seen at the nodes.
    pub peak: f64,
}

pub fn gk21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> GkEstimate {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut peak = fc.abs();
    for i in 0..10 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        peak = peak.max(f1.abs()).max(f2.abs());
        kronrod += WGK[i] * (f1 + f2);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    GkEstimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        peak,
    }
}

/// Adaptive bisection until each leaf satisfies
/// `err <= max(abs_tol, rel_tol * |value|)` (the tolerance is split between
/// the two halves on refinement).
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<GkEstimate> {
    let whole = gk21(f, lo, hi);
    refine(f, lo, hi, whole, abs_tol, rel_tol, 0)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    est: GkEstimate,
    abs_tol: f64,
    rel_tol: f64,
    depth: u32,
) -> Result<GkEstimate> {
    if est.error <= abs_tol.max(rel_tol * est.value.abs()) || est.error == 0.0 {
        return Ok(est);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature {
            lo,
            hi,
            err: est.error,
        });
    }
    let mid = 0.5 * (lo + hi);
    let left = gk21(f, lo, mid);
    let right = gk21(f, mid, hi);
    let left = refine(f, lo, mid, left, 0.5 * abs_tol, rel_tol, depth + 1)?;
    let right = refine(f, mid, hi, right, 0.5 * abs_tol, rel_tol, depth + 1)?;
    Ok(GkEstimate {
        value: left.value + right.value,
        error: left.error + right.error,
        peak: left.peak.max(right.peak),
    })
}

/// Integration over the real line by walking panels outward from `center`.
///
/// `width(s)` gives the panel width near `s` (narrow where the integrand
/// oscillates). A side stops once `envelope(s)` (an upper bound on |f| beyond
/// `s`) drops below `cutoff` times the running maximum of |f|.
pub struct RealLine<'a> {
    pub center: f64,
    pub width: &'a dyn Fn(f64) -> f64,
    pub envelope: &'a dyn Fn(f64) -> f64,
    pub cutoff: f64,
    /// Per-panel absolute tolerance, scaled by the running maximum of |f|.
    pub panel_tol: f64,
    /// Hard limit on how far either side may extend.
    pub max_extent: f64,
}

impl RealLine<'_> {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F) -> Result<f64> {
        let mut peak = f(self.center).abs();
        let mut right_parts = Vec::new();
        let mut left_parts = Vec::new();
        let mut right = self.center;
        let mut left = self.center;
        let mut right_open = true;
        let mut left_open = true;
        while right_open || left_open {
            if right_open {
                let w = (self.width)(right);
                let est = self.panel(f, right, right + w, peak)?;
                peak = peak.max(est.peak);
                right_parts.push(est.value);
                right += w;
                right_open = (self.envelope)(right) >= self.cutoff * peak
                    && right - self.center < self.max_extent;
            }
            if left_open {
                let w = (self.width)(left);
                let est = self.panel(f, left - w, left, peak)?;
                peak = peak.max(est.peak);
                left_parts.push(est.value);
                left -= w;
                left_open = (self.envelope)(left) >= self.cutoff * peak
                    && self.center - left < self.max_extent;
            }
        }
        // Sum the small tail contributions first.
        let sum_rev = |v: &[f64]| v.iter().rev().fold(0.0, |acc, x| acc + x);
        Ok(sum_rev(&left_parts) + sum_rev(&right_parts))
    }

    fn panel<F: Fn(f64) -> f64>(&self, f: &F, lo: f64, hi: f64, peak: f64) -> Result<GkEstimate> {
        let tol = self.panel_tol * peak.max(f64::MIN_POSITIVE) * (hi - lo);
        integrate(f, lo, hi, tol, 1e-14)
    }
}
