//! Reproducible Brownian increments.
//!
//! A stream is a seed plus a refinement level L. The increment over each
//! block of 2^L fine steps is drawn first and then split by Brownian-bridge
//! midpoints, one level at a time, each level with its own generator. The
//! level-ℓ generator is consumed left to right whatever L is, so the same
//! seed at level L + 1 yields increments that sum pairwise to those at
//! level L.
//!
//! Auxiliary standard normals (used by the exact second-order step) come
//! from a separate generator so they never disturb the increments.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use super::grid::TimeGrid;
use crate::error::{Error, Result};

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

const AUX_TAG: u64 = 0xA0A0_0001;
const LEVEL_TAG: u64 = 0x1E7E_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NoiseStream {
    pub seed: u64,
    /// Number of bridge refinements below the generating step.
    pub level: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Increment {
    pub dw: f64,
    /// Independent standard normal for the same step.
    pub aux: f64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, level: 0 }
    }

    /// The same Brownian path seen on a grid with 2^levels times more steps.
    pub fn refined(self, levels: u32) -> Self {
        Self { level: self.level + levels, ..self }
    }

    /// Independent stream for an auxiliary purpose (burn-in, initial data).
    pub fn substream(self, tag: u64) -> Self {
        Self { seed: derive_seed(self.seed, tag), level: 0 }
    }

    pub fn rng(&self, tag: u64) -> Xoshiro256PlusPlus {
        Xoshiro256PlusPlus::seed_from_u64(derive_seed(self.seed, tag))
    }

    pub fn cursor(&self, grid: &TimeGrid) -> Result<NoiseCursor> {
        let block = 1usize << self.level;
        if !grid.n_steps.is_multiple_of(block) {
            return Err(Error::Config(format!(
                "grid with {} steps cannot carry noise refined {} times",
                grid.n_steps, self.level
            )));
        }
        let levels = (0..=self.level)
            .map(|l| self.rng(LEVEL_TAG + l as u64))
            .collect();
        Ok(NoiseCursor {
            levels,
            aux: self.rng(AUX_TAG),
            dt_block: grid.dt * block as f64,
            sqrt_block: (grid.dt * block as f64).sqrt(),
            buf: vec![0.0; block],
            scratch: vec![0.0; block],
            pos: block,
        })
    }

    /// All increments for `grid`, mainly for tests and dumps.
    pub fn increments(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        let mut c = self.cursor(grid)?;
        Ok((0..grid.n_steps).map(|_| c.next_dw()).collect())
    }
}

pub struct NoiseCursor {
    levels: Vec<Xoshiro256PlusPlus>,
    aux: Xoshiro256PlusPlus,
    dt_block: f64,
    sqrt_block: f64,
    buf: Vec<f64>,
    scratch: Vec<f64>,
    pos: usize,
}

impl NoiseCursor {
    fn refill(&mut self) {
        let z: f64 = self.levels[0].sample(StandardNormal);
        self.buf[0] = self.sqrt_block * z;
        let mut width = 1;
        let mut h = self.dt_block;
        for rng in self.levels.iter_mut().skip(1) {
            let sd = 0.5 * h.sqrt();
            for j in 0..width {
                let d = self.buf[j];
                let z: f64 = rng.sample(StandardNormal);
                let left = 0.5 * d + sd * z;
                self.scratch[2 * j] = left;
                self.scratch[2 * j + 1] = d - left;
            }
            width *= 2;
            h *= 0.5;
            self.buf[..width].copy_from_slice(&self.scratch[..width]);
        }
        self.pos = 0;
    }

    #[inline]
    pub fn next_dw(&mut self) -> f64 {
        if self.levels.len() == 1 {
            let z: f64 = self.levels[0].sample(StandardNormal);
            return self.sqrt_block * z;
        }
        if self.pos == self.buf.len() {
            self.refill();
        }
        let v = self.buf[self.pos];
        self.pos += 1;
        v
    }

    #[inline]
    pub fn next_aux(&mut self) -> f64 {
        self.aux.sample(StandardNormal)
    }

    #[inline]
    pub fn next(&mut self, with_aux: bool) -> Increment {
        let dw = self.next_dw();
        let aux = if with_aux { self.next_aux() } else { 0.0 };
        Increment { dw, aux }
    }
}
