use pitchfork::analysis::mc::{funnel, path_noise};
use pitchfork::analysis::stats::Moments;
use pitchfork::model::{deterministic_solve, NormalFormParams};
use pitchfork::sde::{
    integrate_coupled, integrate_ou_pair, integrate_overdamped, integrate_overdamped_with, integrate_underdamped,
    Force, NoiseStream, ProcessSpec, TimeGrid,
};

fn sup_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_noise_reduces_to_ode_at_first_order() {
    let params = NormalFormParams::new(0.05, 0.0);
    let mut errors = Vec::new();
    for dt in [4e-4, 2e-4, 1e-4] {
        let grid = TimeGrid::new(-1.0, 1.0, dt).unwrap();
        let em = integrate_overdamped(&params, 1.0, &grid, &NoiseStream::new(1)).unwrap();
        let det = deterministic_solve(&params, 1.0, &grid).unwrap();
        errors.push(sup_error(&em.q, &det.q));
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "observed order {order} from {errors:?}");
    }
}

#[test]
fn same_seed_same_path() {
    let params = NormalFormParams::new(0.05, 0.01);
    let grid = TimeGrid::new(-1.0, 1.0, 1e-3).unwrap();
    let a = integrate_overdamped(&params, 0.2, &grid, &NoiseStream::new(42)).unwrap();
    let b = integrate_overdamped(&params, 0.2, &grid, &NoiseStream::new(42)).unwrap();
    assert_eq!(a, b);
    let c = integrate_underdamped(&params, 0.2, 0.0, &grid, &NoiseStream::new(42)).unwrap();
    let d = integrate_underdamped(&params, 0.2, 0.0, &grid, &NoiseStream::new(42)).unwrap();
    assert_eq!(c, d);
    assert!(c.p.is_some());
}

#[test]
fn step_above_ceiling_is_rejected() {
    let params = NormalFormParams::new(0.01, 0.01);
    let grid = TimeGrid::new(-1.0, 1.0, 1e-3).unwrap();
    assert!(integrate_overdamped(&params, 0.0, &grid, &NoiseStream::new(1)).is_err());
    assert!(integrate_underdamped(&params, 0.0, 0.0, &grid, &NoiseStream::new(1)).is_err());
}

#[test]
fn strong_convergence_under_bridge_refinement() {
    // Endpoint differences between successive refinements driven by the
    // same Brownian path, averaged over paths.
    let params = NormalFormParams::new(0.1, 0.05);
    let base = TimeGrid::new(-1.0, 1.0, 2e-3).unwrap();
    let n_paths = 200;
    let mut diffs = [0.0f64; 3];
    for k in 0..n_paths {
        let noise = NoiseStream::new(1000 + k);
        let mut ends = Vec::new();
        let mut grid = base;
        for level in 0..4 {
            let path = integrate_overdamped(&params, 0.0, &grid, &noise.refined(level)).unwrap();
            ends.push(path.last_q());
            grid = grid.refined();
        }
        for j in 0..3 {
            diffs[j] += (ends[j] - ends[j + 1]).abs() / n_paths as f64;
        }
    }
    for j in 0..2 {
        let order = (diffs[j] / diffs[j + 1]).log2();
        assert!(order >= 0.45, "order {order} from {diffs:?}");
    }
}

#[test]
fn ou_pair_identity_and_zero_noise() {
    let params = NormalFormParams::new(0.05, 0.02);
    let grid = TimeGrid::new(-1.0, 1.0, 1e-3).unwrap();
    let noise = NoiseStream::new(5);
    let pair = integrate_ou_pair(&params, &grid, &noise).unwrap();
    let dw = noise.increments(&grid).unwrap();
    let s = params.noise_scale();
    let mass = params.epsilon.powf(params.beta);
    let p = pair.p.as_ref().unwrap();
    let mut w = 0.0;
    for i in 0..grid.len() {
        if i > 0 {
            w += dw[i - 1];
        }
        let identity = s * w - mass * p[i];
        assert!((pair.q[i] - identity).abs() <= 1e-10, "i = {i}");
    }
    let mut quiet = params;
    quiet.sigma = 0.0;
    let zero = integrate_ou_pair(&quiet, &grid, &noise).unwrap();
    assert!(zero.q.iter().chain(zero.p.as_ref().unwrap()).all(|v| *v == 0.0));
}

#[test]
fn momentum_stationary_variance() {
    // Free OU: ε^β dp = −p dt + (σ/√ε) dW has stationary variance
    // σ²/(2ε^{1+β}).
    let mut params = NormalFormParams::new(0.5, 0.1);
    params.beta = 3.0;
    let want = params.sigma * params.sigma / (2.0 * params.epsilon.powf(1.0 + params.beta));
    let grid = TimeGrid::new(-1.0, 2999.0, 0.05).unwrap();
    let mut m = Moments::default();
    for seed in 0..4 {
        let pair = integrate_ou_pair(&params, &grid, &NoiseStream::new(seed)).unwrap();
        for &p in &pair.p.unwrap()[200..] {
            m.push(p);
        }
    }
    let got = m.variance() + m.mean * m.mean;
    assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
}

#[test]
fn heavier_damping_approaches_overdamped_limit() {
    let grid = TimeGrid::new(-1.0, 1.0, 1e-4).unwrap();
    let mut dists = Vec::new();
    for beta in [2.5, 3.0, 4.0] {
        let mut params = NormalFormParams::new(0.05, 0.0);
        params.beta = beta;
        let x0 = 0.5;
        let v0 = (-x0 - x0 * x0 * x0 + params.epsilon) / params.epsilon;
        let u = integrate_underdamped(&params, x0, v0, &grid, &NoiseStream::new(1)).unwrap();
        let det = deterministic_solve(&params, x0, &grid).unwrap();
        let from = grid.index_at_or_before(-0.9);
        dists.push(sup_error(&u.q[from..], &det.q[from..]));
    }
    assert!(dists.windows(2).all(|w| w[1] < w[0]), "{dists:?}");
}

#[test]
fn second_moment_contracts_before_bifurcation() {
    use rand::{Rng, SeedableRng};
    let mut params = NormalFormParams::new(0.05, 0.02);
    params.t_start_abs = 2.0;
    let grid = TimeGrid::new(-2.0, -1.0, params.dt_max()).unwrap();
    let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(3);
    let m: Moments = (0..5000)
        .map(|k| {
            let x0 = rng.random_range(-1.0..=1.0);
            let p = integrate_overdamped(&params, x0, &grid, &path_noise(8, k)).unwrap();
            p.last_q().powi(2)
        })
        .collect();
    let bound = params.epsilon.powi(2) + params.sigma.powi(2);
    assert!(m.mean <= 1.2 * bound, "{} vs {bound}", m.mean);
}

#[test]
fn funnel_confines_second_order_start() {
    let params = NormalFormParams::new(0.05, 0.02);
    let n = 1000;
    let (mut q_ok, mut p_ok) = (0, 0);
    for k in 0..n {
        let s = funnel(&params, Force::NormalForm { bias: params.epsilon }, &path_noise(4, k)).unwrap();
        q_ok += (s.q.abs() <= 1.0) as usize;
        p_ok += (s.p.abs() <= params.epsilon.powf(-params.beta)) as usize;
    }
    assert!(q_ok as f64 >= 0.99 * n as f64 && p_ok as f64 >= 0.99 * n as f64);
}

#[test]
fn coupled_lower_ordering() {
    let params = NormalFormParams::new(0.05, 0.02);
    let grid = TimeGrid::new(-1.0, 1.0, params.dt_max()).unwrap();
    let specs = [
        ProcessSpec::Overdamped { force: Force::NormalForm { bias: params.epsilon }, x0: 0.3, start: None },
        ProcessSpec::Overdamped { force: Force::NormalForm { bias: 0.0 }, x0: 0.0, start: None },
    ];
    for seed in 0..20 {
        let paths = integrate_coupled(&params, &specs, &grid, &NoiseStream::new(seed)).unwrap();
        let viol = paths[1].q.iter().zip(&paths[0].q).map(|(a, b)| a - b).fold(f64::MIN, f64::max);
        assert!(viol <= 1e-8);
    }
}

#[test]
fn coupled_matches_single_runs() {
    let params = NormalFormParams::new(0.05, 0.02);
    let grid = TimeGrid::new(-1.0, 1.0, params.dt_max()).unwrap();
    let noise = NoiseStream::new(77);
    let force = Force::NormalForm { bias: 0.0 };
    let specs = [ProcessSpec::Overdamped { force, x0: 0.1, start: None }];
    let coupled = integrate_coupled(&params, &specs, &grid, &noise).unwrap();
    let single = integrate_overdamped_with(&params, force, 0.1, &grid, &noise).unwrap();
    assert_eq!(coupled[0].q, single.q);
    let late = [ProcessSpec::Overdamped { force, x0: 0.1, start: Some(5.0) }];
    assert!(integrate_coupled(&params, &late, &grid, &noise).is_err());
}
