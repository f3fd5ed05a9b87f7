use serde::Serialize;

use super::stats::{wilson, Interval, Z95};

/// Outcome of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Right,
    Left,
    Undecided,
}

/// Counts over an ensemble. Merging is commutative and associative, so
/// per-worker tallies can be combined in any order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub n_total: u64,
    pub n_right: u64,
    pub n_left: u64,
    pub n_undecided: u64,
    pub n_truncated: u64,
}

impl Tally {
    pub fn record(&mut self, outcome: Outcome, truncated: bool) {
        self.n_total += 1;
        match outcome {
            Outcome::Right => self.n_right += 1,
            Outcome::Left => self.n_left += 1,
            Outcome::Undecided => self.n_undecided += 1,
        }
        self.n_truncated += truncated as u64;
    }

    pub fn single(outcome: Outcome, truncated: bool) -> Self {
        let mut t = Tally::default();
        t.record(outcome, truncated);
        t
    }

    pub fn merge(self, o: Tally) -> Tally {
        Tally {
            n_total: self.n_total + o.n_total,
            n_right: self.n_right + o.n_right,
            n_left: self.n_left + o.n_left,
            n_undecided: self.n_undecided + o.n_undecided,
            n_truncated: self.n_truncated + o.n_truncated,
        }
    }
}

/// Fraction of truncated paths tolerated before a run is rejected.
pub const TRUNCATION_BUDGET: f64 = 1e-3;
/// Fraction of undecided paths above which the summary is flagged.
pub const UNDECIDED_WARNING: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McFlags {
    pub truncation_warning: bool,
    pub undecided_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSummary {
    pub n_total: u64,
    pub n_right: u64,
    pub n_left: u64,
    pub n_undecided: u64,
    pub n_truncated: u64,
    pub p_right: f64,
    pub p_right_ci: Interval,
    pub p_left: f64,
    pub p_left_ci: Interval,
    pub flags: McFlags,
}

impl McSummary {
    pub fn from_tally(t: Tally) -> Self {
        let n = t.n_total.max(1) as f64;
        McSummary {
            n_total: t.n_total,
            n_right: t.n_right,
            n_left: t.n_left,
            n_undecided: t.n_undecided,
            n_truncated: t.n_truncated,
            p_right: t.n_right as f64 / n,
            p_right_ci: wilson(t.n_right, t.n_total, Z95),
            p_left: t.n_left as f64 / n,
            p_left_ci: wilson(t.n_left, t.n_total, Z95),
            flags: McFlags {
                truncation_warning: t.n_truncated > 0,
                undecided_warning: t.n_undecided as f64 / n > UNDECIDED_WARNING,
            },
        }
    }

    pub fn tally(&self) -> Tally {
        Tally {
            n_total: self.n_total,
            n_right: self.n_right,
            n_left: self.n_left,
            n_undecided: self.n_undecided,
            n_truncated: self.n_truncated,
        }
    }

    pub fn undecided_fraction(&self) -> f64 {
        self.n_undecided as f64 / self.n_total.max(1) as f64
    }
}
