//! Subcommand execution.

use std::path::PathBuf;

use pitchfork::analysis::audit::comparison_suite;
use pitchfork::analysis::mc::{mc_estimate, monotone_violations, record_paths, ModelKind};
use pitchfork::analysis::McSummary;
use pitchfork::linear::{default_grid, limit_stats, simulate_linear_full, ESCAPE_LEVEL};
use pitchfork::model::{NormalFormParams, PotentialSpec};
use pitchfork::sde::dump::write_paths;
use pitchfork::sde::Path;
use pitchfork::special_fn::{self_test, SELF_TEST_J_LARGE, SELF_TEST_J_SMALL};
use serde_json::{json, Value};

use crate::config::{ConfigError, Format, LoadedConfig, SweepParameter};
use crate::output::{Cell, OutputSet, Provenance, Report, Table};

/// Points of the Wronskian scan over [−10, 10].
pub const WRONSKIAN_POINTS: usize = 2001;
pub const WRONSKIAN_TOL: f64 = 1e-9;
pub const LAPLACE_TOL: f64 = 1e-6;
pub const J_CONSTANT_TOL: f64 = 0.05;
/// Violation tolerance of the comparison orderings.
pub const ORDERING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Sweep,
    LinearStats,
    AiryCheck,
    Compare,
    Chain,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::LinearStats => "linear-stats",
            Command::AiryCheck => "airy-check",
            Command::Compare => "compare",
            Command::Chain => "chain",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(#[from] pitchfork::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Command-line overrides of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Number of leading paths to dump in binary form.
    pub dump_paths: Option<usize>,
}

/// Library errors that name a parameter are reported against the config.
fn lift(loaded: &LoadedConfig, e: pitchfork::Error) -> CliError {
    match e {
        pitchfork::Error::InvalidParam { .. } | pitchfork::Error::Config(_) => CliError::Config(loaded.lib_error(&e)),
        e => CliError::Run(e),
    }
}

const SUMMARY_COLUMNS: [&str; 9] =
    ["n_total", "n_right", "n_left", "n_undecided", "n_truncated", "p_right", "ci_lo", "ci_hi", "p_left"];

fn summary_cells(s: &McSummary) -> Vec<Cell> {
    vec![
        s.n_total.into(),
        s.n_right.into(),
        s.n_left.into(),
        s.n_undecided.into(),
        s.n_truncated.into(),
        s.p_right.into(),
        s.p_right_ci.lo.into(),
        s.p_right_ci.hi.into(),
        s.p_left.into(),
    ]
}

fn model_name(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Overdamped => "overdamped",
        ModelKind::Underdamped => "underdamped",
        ModelKind::Linear => "linear",
        ModelKind::Chain => "chain",
    }
}

fn simulate(loaded: &LoadedConfig, seed: u64, model: ModelKind) -> Result<(Table, Value), CliError> {
    let mut cfg = loaded.mc_config(seed)?;
    cfg.model = model;
    let s = mc_estimate(&cfg).map_err(|e| lift(loaded, e))?;
    let mut cols = vec!["model", "epsilon", "sigma", "beta"];
    cols.extend(SUMMARY_COLUMNS);
    let mut t = Table::new(cols);
    let p = &cfg.params;
    let mut row = vec![model_name(model).into(), p.epsilon.into(), p.sigma.into(), p.beta.into()];
    row.extend(summary_cells(&s));
    t.push(row);
    let mut details = json!({ "params": p, "initial": cfg.initial, "symmetric": cfg.symmetric, "summary": s });
    if model == ModelKind::Chain {
        let spec = PotentialSpec::new(cfg.potential)?;
        details["potential"] = json!(spec);
        details["break_side"] = json!({
            "right_bond": s.n_right,
            "left_bond": s.n_left,
            "intact": s.n_undecided,
        });
    }
    Ok((t, details))
}

fn apply_sweep_value(p: &mut NormalFormParams, axis: SweepParameter, v: f64) {
    match axis {
        SweepParameter::Epsilon => {
            p.epsilon = v;
            if let Some(a) = p.alpha {
                p.sigma = v.powf(a + 0.5);
            }
        }
        SweepParameter::Sigma => {
            p.sigma = v;
            p.alpha = None;
        }
        SweepParameter::Alpha => {
            p.alpha = Some(v);
            p.sigma = p.epsilon.powf(v + 0.5);
        }
    }
}

fn sweep(loaded: &LoadedConfig, seed: u64) -> Result<(Table, Value), CliError> {
    let base = loaded.mc_config(seed)?;
    let (axis, values) = loaded.sweep_values(&base.params)?;
    let mut summaries = Vec::with_capacity(values.len());
    for &v in &values {
        let mut cfg = base;
        apply_sweep_value(&mut cfg.params, axis, v);
        summaries.push(mc_estimate(&cfg).map_err(|e| lift(loaded, e))?);
    }
    let mut t = Table::new(vec![axis.name(), "p_right", "ci_lo", "ci_hi", "n_undecided"]);
    for (v, s) in values.iter().zip(&summaries) {
        t.push(vec![(*v).into(), s.p_right.into(), s.p_right_ci.lo.into(), s.p_right_ci.hi.into(), s.n_undecided.into()]);
    }
    let violations = monotone_violations(&summaries);
    let details = json!({
        "parameter": axis.name(),
        "model": model_name(base.model),
        "params": base.params,
        "monotone": violations.is_empty(),
        "violations": violations,
        "summaries": summaries,
    });
    Ok((t, details))
}

fn linear_stats(loaded: &LoadedConfig, seed: u64) -> Result<(Table, Value), CliError> {
    let sec = loaded.linear_section()?;
    let mut keys = Vec::new();
    for &e in &sec.epsilon {
        for &a in &sec.alpha {
            for &b in &sec.beta {
                keys.push((e, a, b));
            }
        }
    }
    keys.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)).then(x.2.total_cmp(&y.2)));
    keys.dedup();
    let mut t = Table::new(vec![
        "epsilon",
        "alpha",
        "beta",
        "m",
        "v",
        "ratio",
        "ratio_scaled",
        "p_plus",
        "n_paths",
        "p_hat",
        "p_hat_ci_lo",
        "p_hat_ci_hi",
        "tail_mean",
        "tail_mean_se",
        "tail_var",
    ]);
    for (e, a, b) in keys {
        let st = limit_stats(e, a, b).map_err(|err| lift(loaded, err))?;
        let mut row: Vec<Cell> = vec![
            e.into(),
            a.into(),
            b.into(),
            st.m.into(),
            st.v.into(),
            st.ratio.into(),
            (st.ratio / e.powf(0.25 - a)).into(),
            st.p_plus.into(),
            sec.n_paths.into(),
        ];
        if sec.n_paths > 0 {
            let mut p = NormalFormParams::with_alpha(e, a);
            p.beta = b;
            let grid = default_grid(e, b).map_err(|err| lift(loaded, err))?;
            let run = simulate_linear_full(&p, sec.n_paths, &grid, seed, ESCAPE_LEVEL).map_err(|err| lift(loaded, err))?;
            let s = run.summary;
            row.extend([
                s.p_right.into(),
                s.p_right_ci.lo.into(),
                s.p_right_ci.hi.into(),
                run.tail.mean.into(),
                run.tail.se_mean().into(),
                run.tail.variance().into(),
            ]);
        } else {
            row.extend(std::iter::repeat_n(Cell::Empty, 6));
        }
        t.push(row);
    }
    Ok((t, json!({ "escape_level": ESCAPE_LEVEL })))
}

fn airy_check() -> Result<(Table, Value), CliError> {
    let r = self_test(WRONSKIAN_POINTS)?;
    let mut t = Table::new(vec!["check", "value", "tolerance", "pass"]);
    for (name, v, tol) in [
        ("wronskian_max_error", r.wronskian_max_error, WRONSKIAN_TOL),
        ("laplace_max_rel_error", r.laplace_max_rel_error, LAPLACE_TOL),
        ("j_large_p_rel_error_c1", r.c1_rel_error, J_CONSTANT_TOL),
        ("j_small_p_rel_error_c2", r.c2_rel_error, J_CONSTANT_TOL),
    ] {
        t.push(vec![name.into(), v.into(), tol.into(), (v <= tol).into()]);
    }
    let details = json!({
        "report": r,
        "j_large_p": SELF_TEST_J_LARGE,
        "j_small_p": SELF_TEST_J_SMALL,
    });
    Ok((t, details))
}

fn compare(loaded: &LoadedConfig, seed: u64) -> Result<(Table, Value), CliError> {
    let cfg = loaded.mc_config(seed)?;
    let mut starts = loaded.compare_starts();
    starts.sort_by(f64::total_cmp);
    let mut t = Table::new(vec![
        "x0",
        "n_paths",
        "lower_max_violation",
        "upper_max_violation",
        "lower_continuous_max_violation",
        "upper_continuous_max_violation",
        "non_monotone_steps",
        "holds",
    ]);
    let mut reports = Vec::new();
    for x0 in starts {
        let r = comparison_suite(&cfg.params, x0, cfg.n_paths, seed).map_err(|e| lift(loaded, e))?;
        let holds = r.lower.holds(ORDERING_TOL) && r.upper.holds(ORDERING_TOL);
        t.push(vec![
            x0.into(),
            r.n_paths.into(),
            r.lower.max_violation.into(),
            r.upper.max_violation.into(),
            r.lower_continuous.max_violation.into(),
            r.upper_continuous.max_violation.into(),
            r.non_monotone_steps.into(),
            holds.into(),
        ]);
        reports.push(r);
    }
    Ok((t, json!({ "tolerance": ORDERING_TOL, "reports": reports })))
}

fn dump(loaded: &LoadedConfig, seed: u64, model: ModelKind, n: usize) -> Result<Vec<Path>, CliError> {
    let mut cfg = loaded.mc_config(seed)?;
    cfg.model = model;
    record_paths(&cfg, n).map_err(|e| lift(loaded, e))
}

/// Compute the report of `cmd`; no files are touched.
pub fn build_report(cmd: Command, loaded: &LoadedConfig, opts: &RunOptions) -> Result<(Report, Option<Vec<Path>>), CliError> {
    let seed = opts.seed.unwrap_or(loaded.config.seed);
    let (table, details) = match cmd {
        Command::Simulate => simulate(loaded, seed, loaded.config.model)?,
        Command::Chain => simulate(loaded, seed, ModelKind::Chain)?,
        Command::Sweep => sweep(loaded, seed)?,
        Command::LinearStats => linear_stats(loaded, seed)?,
        Command::AiryCheck => airy_check()?,
        Command::Compare => compare(loaded, seed)?,
    };
    let paths = match (opts.dump_paths, cmd) {
        (None, _) => None,
        (Some(n), Command::Simulate) => Some(dump(loaded, seed, loaded.config.model, n)?),
        (Some(n), Command::Chain) => Some(dump(loaded, seed, ModelKind::Chain, n)?),
        (Some(_), other) => {
            return Err(CliError::Config(ConfigError {
                file: loaded.file.clone(),
                line: None,
                column: None,
                message: format!("--dump-paths is not available for `{}`", other.name()),
            }));
        }
    };
    let report = Report { provenance: Provenance::new(cmd.name(), &loaded.source, seed), table, details };
    Ok((report, paths))
}

/// Run `cmd` and write its outputs; returns the files written. On error
/// nothing written by this call is left behind.
pub fn execute(cmd: Command, loaded: &LoadedConfig, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let (report, paths) = build_report(cmd, loaded, opts)?;
    let out = &loaded.config.output;
    let dir = opts.out.clone().unwrap_or_else(|| out.dir.clone());
    let format = opts.format.unwrap_or(out.format);
    let stem = out.name.clone().unwrap_or_else(|| cmd.name().to_string());
    let mut set = OutputSet::new();
    set.write(&dir.join(format!("{stem}.{}", format.extension())), report.encode(format).as_bytes())?;
    if let Some(paths) = paths {
        let mut buf = Vec::new();
        write_paths(&mut buf, &paths)?;
        set.write(&dir.join(format!("{stem}.paths.bin")), &buf)?;
    }
    Ok(set.commit())
}
