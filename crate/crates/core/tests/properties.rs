use atfe::adaptive::{realized_schedule, run_atfe, schedule_nu_min, AtfeConfig};
use atfe::bounds::strategy_bound;
use atfe::inference::{holevo_variance_of_errors, mle, ConfidenceInterval, Interval, LogLikelihood};
use atfe::probe::{outcome_probability, MeasurementRecord, Outcome, ProbeConfig, ProbeMode};
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = (ProbeMode, u32)> {
    prop_oneof![
        Just((ProbeMode::Single, 1)),
        (1u32..12).prop_map(|n| (ProbeMode::ProductParallel, n)),
        (1u32..12).prop_map(|n| (ProbeMode::Ghz, n)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn probabilities_are_valid_and_shift_invariant(
        (m, n) in mode(), g in -1.0..1.0f64, w in -1.0..1.0f64, t in 0.01..3.0f64, d in -0.5..0.5f64,
    ) {
        let p = outcome_probability(g, t, w, m, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        let shifted = outcome_probability(g + d, t, w + d, m, n).unwrap();
        prop_assert!((p - shifted).abs() < 1e-9);
        prop_assert!((outcome_probability(g, t, g, m, n).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn intervals_are_clipped_and_shrink(center in -1.0..1.0f64, f in 1e-3..1e6f64, z in 0.1..6.0f64) {
        let ci = ConfidenceInterval::with_z(center, f, z).unwrap();
        prop_assert!(-1.0 <= ci.lo && ci.lo <= ci.hi && ci.hi <= 1.0);
        prop_assert!(ci.contains(center));
        prop_assert!(ci.interval().width() <= 2.0 * ci.half_width + 1e-15);
        let tighter = ConfidenceInterval::with_z(center, 4.0 * f, z).unwrap();
        prop_assert!(tighter.lo >= ci.lo && tighter.hi <= ci.hi);
    }

    #[test]
    fn holevo_is_nonnegative_and_period_invariant(
        errors in prop::collection::vec(-0.6..0.6f64, 1..40), k in -3i32..3,
    ) {
        let v = holevo_variance_of_errors(errors.iter().copied(), 2.0).unwrap();
        prop_assert!(v >= 0.0);
        let wrapped = holevo_variance_of_errors(errors.iter().map(|e| e + 2.0 * f64::from(k)), 2.0).unwrap();
        prop_assert!((v - wrapped).abs() <= 1e-9 * v.max(1e-6));
        let mut rev = errors.clone();
        rev.reverse();
        let r = holevo_variance_of_errors(rev, 2.0).unwrap();
        prop_assert!((v - r).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn mle_stays_in_domain_and_beats_endpoints(
        data in prop::collection::vec((any::<bool>(), -1.0..1.0f64, 0.05..1.0f64), 1..30),
        a in -1.0..0.9f64, width in 0.0..2.0f64,
    ) {
        let records: Vec<_> = data
            .iter()
            .map(|&(zero, g, t)| MeasurementRecord {
                outcome: if zero { Outcome::Zero } else { Outcome::One },
                g_tilde: g,
                t_tilde: t,
                qubit_index: 0,
            })
            .collect();
        let ll = LogLikelihood::from_records(ProbeConfig::single(), &records);
        let hi = (a + width).min(1.0);
        let est = mle(&ll, Interval::new(a, hi).unwrap()).unwrap();
        prop_assert!(a <= est.omega_hat && est.omega_hat <= hi);
        let v = ll.eval(est.omega_hat);
        let tol = 1e-9 * v.abs().max(1.0);
        prop_assert!(v >= ll.eval(a) - tol && v >= ll.eval(hi) - tol && v >= ll.eval(0.5 * (a + hi)) - tol);
    }

    #[test]
    fn minimal_counts_decrease(i in 1u32..500, c in 0.5..0.999999f64, n in 1u32..20) {
        let now = schedule_nu_min(i, c, n).unwrap();
        let next = schedule_nu_min(i + 1, c, n).unwrap();
        prop_assert!(now >= next && next >= 1);
    }

    #[test]
    fn extra_measurements_tighten_strategy_bound(
        steps in prop::collection::vec((1u64..50, 0.1..100.0f64), 1..8), extra in 1u64..20, c in 0.5..1.0f64,
    ) {
        let base = strategy_bound(&steps, c).unwrap();
        let mut more = steps.clone();
        more[0].0 += extra;
        prop_assert!(strategy_bound(&more, c).unwrap() <= base);
    }

    #[test]
    fn schedule_steps_are_consistent((m, n) in mode(), nu in 1u32..150, nu1 in 1u32..40, c in 0.9..0.9999f64) {
        let probe = ProbeConfig::new(m, n).unwrap();
        let cfg = AtfeConfig { nu_initial: nu1.min(nu), confidence_level: c, ..AtfeConfig::new(probe, nu) };
        let s = realized_schedule(&cfg).unwrap();
        prop_assert_eq!(s.len(), nu as usize);
        let t1 = cfg.t1();
        let mut time = 0.0;
        for (k, step) in s.iter().enumerate() {
            prop_assert_eq!(step.t_tilde, f64::from(step.strategy) * t1);
            time += step.t_tilde;
            prop_assert_eq!(step.cum_time, time);
            prop_assert_eq!(step.cum_qubits, (k as u64 + 1) * u64::from(n));
            if k > 0 {
                let d = step.strategy - s[k - 1].strategy;
                prop_assert!(d <= 1);
                prop_assert!(d == 0 || k as u32 >= cfg.nu_initial);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trials_are_deterministic((m, n) in mode(), seed in any::<u64>(), w in -0.99..0.99f64) {
        let probe = ProbeConfig::new(m, n.min(4)).unwrap();
        let cfg = AtfeConfig { seed, nu_initial: 5, ..AtfeConfig::new(probe, 25) };
        let (a, ta) = run_atfe(&cfg, w).unwrap();
        let (b, tb) = run_atfe(&cfg, w).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(&ta, &tb);
        for snap in &ta.snapshots {
            prop_assert!(snap.ci.lo <= snap.ci.hi);
            prop_assert!((-1.0..=1.0).contains(&snap.omega_hat));
        }
    }
}
