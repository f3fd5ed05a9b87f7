//! Criterion benchmarks for the numerical kernels; see `benches/`.

use pitchfork::model::NormalFormParams;

/// Fast-regime parameters shared by the stepping benchmarks.
pub fn fast_params() -> NormalFormParams {
    NormalFormParams::new(1e-2, 1e-3)
}
