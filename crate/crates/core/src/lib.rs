//! Numerical laboratory for a pulled three-particle chain near its pitchfork
//! bifurcation: the Airy-solvable linear model, the overdamped and
//! underdamped normal forms, the full chain, and the Monte Carlo machinery
//! that estimates which bond breaks.

pub mod error;
pub mod special_fn;

pub use error::{Error, Result};
pub mod model;
pub mod sde;
pub mod analysis;
pub mod linear;
