//! Stochastic integrators: Euler–Maruyama for first-order equations, an
//! exact-transition scheme for the second-order ones, and lockstep coupling
//! of several processes on one Brownian path.

pub mod coupled;
pub mod dump;
pub mod grid;
pub mod integrate;
pub mod noise;
pub mod path;
pub mod stepper;

pub use coupled::{integrate_coupled, run_coupled, ProcessSpec};
pub use grid::TimeGrid;
pub use integrate::{integrate_ou_pair, integrate_overdamped, integrate_overdamped_with, integrate_underdamped};
pub use noise::{derive_seed, Increment, NoiseStream};
pub use path::Path;
pub use stepper::{drive, Force, Overdamped, Stepper, Underdamped, TRUNCATION_LEVEL};
