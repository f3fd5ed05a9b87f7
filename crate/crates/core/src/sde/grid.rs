use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform time grid. The step is adjusted down so that an integer number of
/// steps lands exactly on `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    /// Grid with step at most `dt_target`.
    pub fn new(t_start: f64, t_end: f64, dt_target: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(Error::param("grid", format!("need t_start < t_end, got [{t_start}, {t_end}]")));
        }
        if !(dt_target > 0.0 && dt_target.is_finite()) {
            return Err(Error::param("dt", format!("{dt_target} must be positive")));
        }
        let span = t_end - t_start;
        let n = (span / dt_target * (1.0 - 1e-12)).ceil().max(1.0);
        if n > 4e9 {
            return Err(Error::param("dt", format!("{dt_target} gives {n:e} steps")));
        }
        Self::with_steps(t_start, t_end, n as usize)
    }

    pub fn with_steps(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_start < t_end) || n_steps == 0 {
            return Err(Error::param("grid", format!("invalid grid [{t_start}, {t_end}] with {n_steps} steps")));
        }
        Ok(Self {
            t_start,
            t_end,
            dt: (t_end - t_start) / n_steps as f64,
            n_steps,
        })
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        if i >= self.n_steps {
            self.t_end
        } else {
            self.t_start + i as f64 * self.dt
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// Same span with each step halved.
    pub fn refined(&self) -> Self {
        Self {
            dt: 0.5 * self.dt,
            n_steps: 2 * self.n_steps,
            ..*self
        }
    }

    /// Index of the last grid point at or before `t` (clamped to the grid).
    pub fn index_at_or_before(&self, t: f64) -> usize {
        if t <= self.t_start {
            return 0;
        }
        let i = ((t - self.t_start) / self.dt * (1.0 + 1e-14)).floor() as usize;
        i.min(self.n_steps)
    }

    /// Error unless the step respects `dt_max`.
    pub fn check_step(&self, dt_max: f64) -> Result<()> {
        if self.dt > dt_max * (1.0 + 1e-12) {
            return Err(Error::StepSize { dt: self.dt, dt_max });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lands_on_end() {
        let g = TimeGrid::new(-1.0, 1.0, 0.3).unwrap();
        assert_eq!(g.n_steps, 7);
        assert_eq!(g.time(g.n_steps), 1.0);
        assert!(g.dt <= 0.3);
        let g = TimeGrid::new(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g.n_steps, 4);
    }

    #[test]
    fn refinement_doubles_steps() {
        let g = TimeGrid::new(-1.0, 1.0, 0.1).unwrap().refined();
        assert_eq!(g.n_steps, 40);
        assert!((g.time(20) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());
        let g = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        assert!(matches!(g.check_step(0.01), Err(Error::StepSize { .. })));
    }

    #[test]
    fn index_lookup() {
        let g = TimeGrid::new(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.index_at_or_before(0.35), 3);
        assert_eq!(g.index_at_or_before(0.3), 3);
        assert_eq!(g.index_at_or_before(7.0), 10);
        assert_eq!(g.index_at_or_before(-1.0), 0);
    }
}
