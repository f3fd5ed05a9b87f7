//! Right/Left/Undecided classification on the window [t1, t2].

use serde::Serialize;

use super::mc_types::Outcome;
use crate::error::Result;
use crate::model::NormalFormParams;
use crate::sde::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub outcome: Outcome,
    pub t1: f64,
    pub margin: f64,
}

/// Running inf and sup of q/√t over grid points in [t1, t2].
#[derive(Debug, Clone, Copy)]
pub struct Classifier {
    pub t1: f64,
    pub t2: f64,
    pub gamma: f64,
    lo: f64,
    hi: f64,
    seen: bool,
}

impl Classifier {
    pub fn new(params: &NormalFormParams) -> Result<Self> {
        let (t1, t2) = params.classification_window()?;
        Ok(Self { t1, t2, gamma: params.gamma, lo: f64::INFINITY, hi: f64::NEG_INFINITY, seen: false })
    }

    /// Feed one grid point. Returns false once the outcome can no longer
    /// change (Undecided already forced, or past t2).
    #[inline]
    pub fn observe(&mut self, t: f64, q: f64) -> bool {
        if t > self.t2 {
            return false;
        }
        if t >= self.t1 {
            let x = q / t.sqrt();
            self.lo = self.lo.min(x);
            self.hi = self.hi.max(x);
            self.seen = true;
            if self.lo <= self.gamma && self.hi >= -self.gamma {
                return false;
            }
        }
        true
    }

    pub fn outcome(&self) -> Outcome {
        if !self.seen {
            Outcome::Undecided
        } else if self.lo > self.gamma {
            Outcome::Right
        } else if self.hi < -self.gamma {
            Outcome::Left
        } else {
            Outcome::Undecided
        }
    }

    pub fn classification(&self) -> Classification {
        Classification { outcome: self.outcome(), t1: self.t1, margin: self.gamma }
    }

    /// inf of q/√t over the window seen so far.
    pub fn inf_ratio(&self) -> f64 {
        self.lo
    }

    pub fn sup_ratio(&self) -> f64 {
        self.hi
    }
}

/// Right if inf q/√t > γ on [t1, t2], Left if sup < −γ, else Undecided.
pub fn classify_path(path: &Path, params: &NormalFormParams) -> Result<Classification> {
    let mut c = Classifier::new(params)?;
    for (t, q) in path.points() {
        if !c.observe(t, q) {
            break;
        }
    }
    Ok(c.classification())
}
