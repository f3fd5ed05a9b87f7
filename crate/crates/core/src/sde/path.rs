use serde::Serialize;

use super::grid::TimeGrid;

/// One realization on a grid: positions and, for second-order models,
/// momenta.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub grid: TimeGrid,
    pub q: Vec<f64>,
    pub p: Option<Vec<f64>>,
    /// Set when the path was clamped at the truncation level.
    pub truncated: bool,
}

impl Path {
    pub fn new(grid: TimeGrid, q: Vec<f64>, p: Option<Vec<f64>>) -> Self {
        debug_assert_eq!(q.len(), grid.len());
        Self { grid, q, p, truncated: false }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.grid.time(i)
    }

    pub fn last_q(&self) -> f64 {
        *self.q.last().expect("path has at least one point")
    }

    /// Iterate over (t, q) pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.q.iter().enumerate().map(|(i, &q)| (self.grid.time(i), q))
    }
}
