use pitchfork::analysis::audit::comparison_suite;
use pitchfork::analysis::mc_types::{Outcome, Tally};
use pitchfork::analysis::stats::{wilson, Moments, Z95};
use pitchfork::model::{drift_normal_form, equilibrium_branches, potential_v, NormalFormParams};
use pitchfork::special_fn::airy_eval;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn wronskian_on_dense_grid() {
    for i in 0..1000 {
        let x = -10.0 + 20.0 * i as f64 / 999.0;
        let v = airy_eval(x).unwrap();
        assert!((v.wronskian() - 1.0 / PI).abs() <= 1e-9, "x = {x}");
    }
}

fn outcome() -> impl Strategy<Value = (Outcome, bool)> {
    (prop_oneof![Just(Outcome::Right), Just(Outcome::Left), Just(Outcome::Undecided)], any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn wronskian_anywhere(x in -10.0f64..10.0) {
        let v = airy_eval(x).unwrap();
        prop_assert!((v.wronskian() - 1.0 / PI).abs() <= 1e-9);
    }

    #[test]
    fn drift_odd_part_cancels(q in -5.0f64..5.0, t in -2.0f64..2.0, eps in 1e-4f64..0.5) {
        let p = NormalFormParams::new(eps, 0.01);
        let s = drift_normal_form(q, t, &p) + drift_normal_form(-q, t, &p);
        prop_assert!((s - 2.0).abs() <= 1e-9 * (1.0 + (t * q - q * q * q).abs() / eps));
    }

    #[test]
    fn potential_is_even(q in -5.0f64..5.0, t in -2.0f64..2.0) {
        prop_assert_eq!(potential_v(q, t), potential_v(-q, t));
    }

    #[test]
    fn branch_residuals(t in -2.0f64..2.0, eps in 1e-4f64..0.1) {
        let b = equilibrium_branches(t, eps);
        for q in [Some(b.q_plus), b.q_minus, b.q_mid].into_iter().flatten() {
            prop_assert!((t * q - q * q * q + eps).abs() <= 1e-12 * (1.0 + q.abs().powi(3)));
        }
    }

    #[test]
    fn tally_merge_is_order_free(items in proptest::collection::vec(outcome(), 0..200), split in 0usize..200) {
        let forward = items.iter().fold(Tally::default(), |t, &(o, tr)| t.merge(Tally::single(o, tr)));
        let backward = items.iter().rev().fold(Tally::default(), |t, &(o, tr)| t.merge(Tally::single(o, tr)));
        let k = split.min(items.len());
        let (a, b) = items.split_at(k);
        let fa = a.iter().fold(Tally::default(), |t, &(o, tr)| t.merge(Tally::single(o, tr)));
        let fb = b.iter().fold(Tally::default(), |t, &(o, tr)| t.merge(Tally::single(o, tr)));
        prop_assert_eq!(forward, backward);
        prop_assert_eq!(fb.merge(fa), forward);
        prop_assert_eq!(forward.n_right + forward.n_left + forward.n_undecided, forward.n_total);
    }

    #[test]
    fn moments_merge_matches_sequential(xs in proptest::collection::vec(-1e3f64..1e3, 2..100), split in 0usize..100) {
        let all: Moments = xs.iter().copied().collect();
        let k = split.min(xs.len());
        let a: Moments = xs[..k].iter().copied().collect();
        let b: Moments = xs[k..].iter().copied().collect();
        let m = b.merge(a);
        prop_assert!((m.mean - all.mean).abs() <= 1e-9 * (1.0 + all.mean.abs()));
        prop_assert!((m.variance() - all.variance()).abs() <= 1e-8 * (1.0 + all.variance()));
    }

    #[test]
    fn wilson_contains_estimate(n in 1u64..5000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as u64;
        let ci = wilson(k, n, Z95);
        prop_assert!(ci.contains(k as f64 / n as f64));
        prop_assert!(0.0 <= ci.lo && ci.hi <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn coupled_orderings_hold(seed in any::<u64>(), x0 in -1.0f64..1.0, sigma in 1e-3f64..0.05) {
        let p = NormalFormParams::new(0.05, sigma);
        let r = comparison_suite(&p, x0, 4, seed).unwrap();
        prop_assert_eq!(r.non_monotone_steps, 0);
        prop_assert!(r.lower.holds(1e-8), "{:?}", r.lower);
        prop_assert!(r.upper.holds(1e-8), "{:?}", r.upper);
    }
}
