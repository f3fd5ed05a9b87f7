//! Monte Carlo estimation over independent paths.
//!
//! Path i is driven by `NoiseStream::new(derive_seed(seed, i))` on the grid
//! [−T, t2] whatever the model, so overdamped and underdamped ensembles with
//! the same master seed share their Brownian paths on that interval.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::Classifier;
use super::mc_types::{McSummary, Outcome, Tally, TRUNCATION_BUDGET};
use super::stats::Interval;
use super::strip::{Exit, ExitTracker, StripSpec};
use crate::error::{Error, Result};
use crate::linear::{default_grid, simulate_linear};
use crate::model::{broken_side, NormalFormParams, PotentialConfig, PotentialSpec};
use crate::sde::integrate::record;
use crate::sde::{derive_seed, drive as drive_stepper, Force, NoiseStream, Overdamped, Path, Stepper, TimeGrid, Underdamped};

/// Substream tag of the initial-condition draw.
pub const TAG_INITIAL: u64 = 0x1417;
/// Substream tag of the pre-start funnel of second-order runs.
pub const TAG_FUNNEL: u64 = 0xF0E1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Overdamped,
    Underdamped,
    Linear,
    Chain,
}

/// Initial condition of first-order runs at −T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Fixed { x0: f64 },
    /// Uniform on [−1, 1], drawn from a per-path substream.
    Uniform,
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Fixed { x0: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub model: ModelKind,
    pub params: NormalFormParams,
    pub n_paths: usize,
    pub seed: u64,
    pub initial: InitialCondition,
    /// Zero bias: the symmetric process q̃ instead of q.
    pub symmetric: bool,
    pub potential: PotentialConfig,
}

impl McConfig {
    pub fn new(model: ModelKind, params: NormalFormParams, n_paths: usize, seed: u64) -> Self {
        Self {
            model,
            params,
            n_paths,
            seed,
            initial: InitialCondition::default(),
            symmetric: false,
            potential: PotentialConfig::default(),
        }
    }

    fn bias(&self) -> f64 {
        if self.symmetric {
            0.0
        } else {
            self.params.epsilon
        }
    }
}

/// Per-path result of a normal-form run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRecord {
    pub outcome: Outcome,
    pub truncated: bool,
    /// Exit from K(κ), if it happened before the run stopped.
    pub k_exit: Option<Exit>,
    pub x0: f64,
}

/// Main grid [−T, t2] at the largest admissible step.
pub fn main_grid(params: &NormalFormParams) -> Result<TimeGrid> {
    TimeGrid::new(params.t_start(), params.t2, params.dt_max())
}

/// Funnel grid [−2T, −T] of second-order runs.
pub fn funnel_grid(params: &NormalFormParams) -> Result<TimeGrid> {
    TimeGrid::new(2.0 * params.t_start(), params.t_start(), params.dt_max())
}

pub fn path_noise(seed: u64, index: usize) -> NoiseStream {
    NoiseStream::new(derive_seed(seed, index as u64))
}

fn initial_value(initial: InitialCondition, noise: &NoiseStream) -> f64 {
    match initial {
        InitialCondition::Fixed { x0 } => x0,
        InitialCondition::Uniform => noise.rng(TAG_INITIAL).random_range(-1.0..=1.0),
    }
}

/// Run a second-order process from (0, 0) at −2T to −T on the funnel
/// substream and return its state.
pub fn funnel(params: &NormalFormParams, force: Force, noise: &NoiseStream) -> Result<Underdamped> {
    let grid = funnel_grid(params)?;
    let mut s = Underdamped::new(0.0, 0.0, force, params.epsilon, params.beta, params.noise_scale());
    let mut cursor = noise.substream(TAG_FUNNEL).cursor(&grid)?;
    drive_stepper(&mut s, &grid, &mut cursor, |_, _, _| true);
    Ok(s)
}

/// Classify one stepper over the main grid while tracking its K(κ) exit.
fn observe_main<S: Stepper>(
    s: &mut S,
    params: &NormalFormParams,
    grid: &TimeGrid,
    noise: &NoiseStream,
    k_strip: &StripSpec,
) -> Result<(Outcome, Option<Exit>)> {
    let mut classifier = Classifier::new(params)?;
    let mut k = ExitTracker::new(k_strip);
    let mut cursor = noise.cursor(grid)?;
    let mut classifying = true;
    drive_stepper(s, grid, &mut cursor, |_, t, st| {
        let q = st.q();
        if classifying {
            classifying = classifier.observe(t, q);
        }
        let k_done = k.observe(t, q);
        classifying || !k_done
    });
    Ok((classifier.outcome(), k.exit))
}

/// One overdamped path of the normal form (or of q̃ when `symmetric`).
pub fn overdamped_record(cfg: &McConfig, index: usize, k_strip: &StripSpec) -> Result<PathRecord> {
    let params = &cfg.params;
    let grid = main_grid(params)?;
    let noise = path_noise(cfg.seed, index);
    let x0 = initial_value(cfg.initial, &noise);
    let mut s = Overdamped::new(x0, Force::NormalForm { bias: cfg.bias() }, params.epsilon, params.noise_scale());
    let (outcome, k_exit) = observe_main(&mut s, params, &grid, &noise, k_strip)?;
    Ok(PathRecord { outcome, truncated: s.truncated(), k_exit, x0 })
}

/// One underdamped path: funnel from (0, 0) at −2T, then the main grid.
pub fn underdamped_record(cfg: &McConfig, index: usize, k_strip: &StripSpec) -> Result<PathRecord> {
    let params = &cfg.params;
    let grid = main_grid(params)?;
    let noise = path_noise(cfg.seed, index);
    let mut s = funnel(params, Force::NormalForm { bias: cfg.bias() }, &noise)?;
    let x0 = s.q;
    let (outcome, k_exit) = observe_main(&mut s, params, &grid, &noise, k_strip)?;
    Ok(PathRecord { outcome, truncated: s.truncated(), k_exit, x0 })
}

/// One chain path in rescaled time from q = a with the co-moving velocity
/// a, stopped at the first broken bond. Right means q_R − q > b.
pub fn chain_record(cfg: &McConfig, potential: &PotentialSpec, index: usize) -> Result<PathRecord> {
    let params = &cfg.params;
    let t_end = potential.b / potential.a;
    let grid = TimeGrid::new(0.0, t_end, params.dt_max())?;
    let noise = path_noise(cfg.seed, index);
    let mut s = Underdamped::new(
        potential.a,
        potential.a,
        Force::Chain(*potential),
        params.epsilon,
        params.beta,
        params.noise_scale(),
    );
    let mut cursor = noise.cursor(&grid)?;
    let mut outcome = Outcome::Undecided;
    drive_stepper(&mut s, &grid, &mut cursor, |_, t, st| match broken_side(st.q(), t, potential) {
        Some(right) => {
            outcome = if right { Outcome::Right } else { Outcome::Left };
            false
        }
        None => true,
    });
    Ok(PathRecord { outcome, truncated: s.truncated(), k_exit: None, x0: potential.a })
}

fn check_budget(t: &Tally) -> Result<()> {
    if t.n_truncated as f64 > TRUNCATION_BUDGET * t.n_total as f64 {
        return Err(Error::TruncationBudget {
            truncated: t.n_truncated,
            total: t.n_total,
            budget: TRUNCATION_BUDGET,
        });
    }
    Ok(())
}

/// Per-path records of an overdamped, underdamped or chain ensemble, in
/// path order.
pub fn mc_records(cfg: &McConfig) -> Result<Vec<PathRecord>> {
    if cfg.n_paths == 0 {
        return Err(Error::param("n_paths", "must be positive"));
    }
    let params = &cfg.params;
    match cfg.model {
        ModelKind::Underdamped => params.validate_underdamped()?,
        _ => params.validate()?,
    }
    let records: Vec<Result<PathRecord>> = match cfg.model {
        ModelKind::Overdamped | ModelKind::Underdamped => {
            main_grid(params)?.check_step(params.dt_max())?;
            let k_strip = StripSpec::k_kappa(params)?;
            Classifier::new(params)?;
            let f = if cfg.model == ModelKind::Overdamped { overdamped_record } else { underdamped_record };
            (0..cfg.n_paths).into_par_iter().map(|i| f(cfg, i, &k_strip)).collect()
        }
        ModelKind::Chain => {
            let potential = PotentialSpec::new(cfg.potential)?;
            (0..cfg.n_paths).into_par_iter().map(|i| chain_record(cfg, &potential, i)).collect()
        }
        ModelKind::Linear => {
            return Err(Error::Config("the linear model has no per-path records".into()));
        }
    };
    records.into_iter().collect()
}

pub fn summarize(records: &[PathRecord]) -> Result<McSummary> {
    let tally = records.iter().fold(Tally::default(), |t, r| t.merge(Tally::single(r.outcome, r.truncated)));
    check_budget(&tally)?;
    Ok(McSummary::from_tally(tally))
}

/// Summary over `n_paths` independent runs of the configured model.
pub fn mc_estimate(cfg: &McConfig) -> Result<McSummary> {
    match cfg.model {
        ModelKind::Linear => {
            let p = &cfg.params;
            let grid = default_grid(p.epsilon, p.beta)?;
            let s = simulate_linear(p, cfg.n_paths, &grid, cfg.seed)?;
            check_budget(&s.tally())?;
            Ok(s)
        }
        _ => summarize(&mc_records(cfg)?),
    }
}

/// Full trajectories of the first `n` paths of the ensemble `cfg` describes,
/// on the whole grid without early stopping. Noise and starts match
/// `mc_records` path for path.
pub fn record_paths(cfg: &McConfig, n: usize) -> Result<Vec<Path>> {
    let params = &cfg.params;
    let n = n.min(cfg.n_paths);
    match cfg.model {
        ModelKind::Overdamped => {
            params.validate()?;
            let grid = main_grid(params)?;
            (0..n)
                .map(|i| {
                    let noise = path_noise(cfg.seed, i);
                    let x0 = initial_value(cfg.initial, &noise);
                    let s = Overdamped::new(x0, Force::NormalForm { bias: cfg.bias() }, params.epsilon, params.noise_scale());
                    Ok(record(s, &grid, &noise)?.0)
                })
                .collect()
        }
        ModelKind::Underdamped => {
            params.validate_underdamped()?;
            let grid = main_grid(params)?;
            (0..n)
                .map(|i| {
                    let noise = path_noise(cfg.seed, i);
                    let s = funnel(params, Force::NormalForm { bias: cfg.bias() }, &noise)?;
                    Ok(record(s, &grid, &noise)?.0)
                })
                .collect()
        }
        ModelKind::Chain => {
            params.validate()?;
            let potential = PotentialSpec::new(cfg.potential)?;
            let grid = TimeGrid::new(0.0, potential.b / potential.a, params.dt_max())?;
            (0..n)
                .map(|i| {
                    let noise = path_noise(cfg.seed, i);
                    let s = Underdamped::new(
                        potential.a,
                        potential.a,
                        Force::Chain(potential),
                        params.epsilon,
                        params.beta,
                        params.noise_scale(),
                    );
                    Ok(record(s, &grid, &noise)?.0)
                })
                .collect()
        }
        ModelKind::Linear => Err(Error::Config("path dumps are not available for the linear model".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub summary: McSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub sigma: f64,
    pub rows: Vec<SweepRow>,
    /// Each step either does not decrease p_right or has overlapping
    /// Wilson intervals.
    pub monotone: bool,
    /// Indices i with p_right[i+1] < p_right[i] and disjoint intervals.
    pub violations: Vec<usize>,
}

/// {σ², σ^{5/3}, σ^{4/3}, σ, σ^{2/3}}.
pub fn threshold_grid(sigma: f64) -> Vec<f64> {
    [2.0, 5.0 / 3.0, 4.0 / 3.0, 1.0, 2.0 / 3.0].iter().map(|e| sigma.powf(*e)).collect()
}

/// One summary per ε at fixed σ, all with the base config's master seed.
pub fn threshold_sweep(base: &McConfig, epsilons: &[f64]) -> Result<SweepReport> {
    let mut sorted = epsilons.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows = sorted
        .iter()
        .map(|&epsilon| {
            let mut cfg = *base;
            cfg.params.epsilon = epsilon;
            Ok(SweepRow { epsilon, summary: mc_estimate(&cfg)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries: Vec<McSummary> = rows.iter().map(|r| r.summary).collect();
    let violations = monotone_violations(&summaries);
    Ok(SweepReport { sigma: base.params.sigma, monotone: violations.is_empty(), rows, violations })
}

/// Indices i where p_right drops from row i to row i + 1 with disjoint
/// Wilson intervals.
pub fn monotone_violations(rows: &[McSummary]) -> Vec<usize> {
    rows.windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].p_right < w[0].p_right && !w[0].p_right_ci.overlaps(&w[1].p_right_ci))
        .map(|(i, _)| i)
        .collect()
}

/// Exit statistics of an ensemble against one strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitCounts {
    pub n: u64,
    pub exits: u64,
    pub upper: u64,
    pub fraction: f64,
    pub ci: Interval,
}

impl ExitCounts {
    fn from(exits: &[Option<Exit>]) -> Self {
        let n = exits.len() as u64;
        let e = exits.iter().flatten().count() as u64;
        let upper = exits.iter().flatten().filter(|x| x.side == super::strip::Side::Upper).count() as u64;
        let fraction = e as f64 / n.max(1) as f64;
        ExitCounts { n, exits: e, upper, fraction, ci: super::stats::wilson(e, n, super::stats::Z95) }
    }
}

/// Overdamped paths (bias per `cfg`) from the configured start, stepped
/// until they leave `strip` or pass `t_stop`.
pub fn strip_exits(cfg: &McConfig, strip: &StripSpec, t_stop: f64) -> Result<Vec<Option<Exit>>> {
    let params = &cfg.params;
    params.validate()?;
    let t_end = t_stop.min(params.t2);
    let grid = TimeGrid::new(params.t_start(), t_end, params.dt_max())?;
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            let noise = path_noise(cfg.seed, i);
            let x0 = initial_value(cfg.initial, &noise);
            let mut s = Overdamped::new(x0, Force::NormalForm { bias: cfg.bias() }, params.epsilon, params.noise_scale());
            let mut cursor = noise.cursor(&grid)?;
            let mut tr = ExitTracker::new(strip);
            drive_stepper(&mut s, &grid, &mut cursor, |_, t, st| !tr.observe(t, st.q()) && t <= t_stop);
            Ok(tr.exit.filter(|e| e.t <= t_stop))
        })
        .collect()
}

/// Fraction of paths leaving B(h), h = k·σ√|ln σ|, before √ε. The band
/// follows the deterministic solution from the same start.
pub fn b_h_exit_fraction(cfg: &McConfig, k: f64) -> Result<ExitCounts> {
    let p = &cfg.params;
    let x0 = match cfg.initial {
        InitialCondition::Fixed { x0 } => x0,
        InitialCondition::Uniform => {
            return Err(Error::Config("B(h) exits need a fixed start".into()));
        }
    };
    let h = k * p.sigma * p.sigma.ln().abs().sqrt();
    let strip = StripSpec::b_h(p, h, x0)?;
    Ok(ExitCounts::from(&strip_exits(cfg, &strip, p.epsilon.sqrt())?))
}

/// Fraction of paths that have left K(κ) by t = √(2kε|ln σ|), k = `k_exit`.
pub fn k_kappa_exit_fraction(cfg: &McConfig) -> Result<(f64, ExitCounts)> {
    let p = &cfg.params;
    let t = (2.0 * p.k_exit * p.epsilon * p.sigma.ln().abs()).sqrt();
    let strip = StripSpec::k_kappa(p)?;
    Ok((t, ExitCounts::from(&strip_exits(cfg, &strip, t)?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub exits: u64,
    pub upper: u64,
    pub fraction_upper: f64,
    pub se: f64,
    /// Fewer than 100 exits.
    pub insufficient: bool,
}

pub const MIN_SYMMETRY_EXITS: u64 = 100;

fn symmetry_from(exits: &[Option<Exit>]) -> SymmetryReport {
    let c = ExitCounts::from(exits);
    let f = if c.exits > 0 { c.upper as f64 / c.exits as f64 } else { f64::NAN };
    SymmetryReport {
        exits: c.exits,
        upper: c.upper,
        fraction_upper: f,
        se: super::stats::binomial_se(if f.is_nan() { 0.5 } else { f }, c.exits),
        insufficient: c.exits < MIN_SYMMETRY_EXITS,
    }
}

/// Fraction of exits from `strip` through its upper boundary.
pub fn strip_exit_symmetry(paths: &[crate::sde::Path], strip: &StripSpec) -> SymmetryReport {
    let exits: Vec<Option<Exit>> = paths.iter().map(|p| super::strip::exit_time(p, strip)).collect();
    symmetry_from(&exits)
}

/// Streaming version over an ensemble generated from `cfg`, against
/// S(h*) on [√ε, t2].
pub fn s_h_symmetry(cfg: &McConfig) -> Result<SymmetryReport> {
    let p = &cfg.params;
    let strip = StripSpec::s_h(p, p.h_star())?;
    Ok(symmetry_from(&strip_exits(cfg, &strip, p.t2)?))
}
