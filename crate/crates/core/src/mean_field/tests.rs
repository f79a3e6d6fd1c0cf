use super::*;
use proptest::prelude::*;
use rand::Rng;

fn p() -> MeanFieldParams {
    MeanFieldParams::default()
}

fn random_w(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(0.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[test]
fn transfer_breakpoints() {
    let q = MeanFieldParams {
        gamma_slope: 2.0,
        c: 1.5,
        ..p()
    };
    assert_eq!(transfer(1.5, &q), 0.5);
    assert_eq!(transfer(1.5 + 0.25, &q), 1.0);
    assert_eq!(transfer(1.5 - 0.25, &q), 0.0);
    assert_eq!(transfer(f64::NEG_INFINITY, &q), 0.0);
    assert_eq!(transfer(1e300, &q), 1.0);
}

proptest! {
    #[test]
    fn transfer_is_monotone_and_gamma_lipschitz(s1 in -10.0..10.0f64, s2 in -10.0..10.0f64, g in 0.1..5.0f64) {
        let q = MeanFieldParams { gamma_slope: g, ..p() };
        let (t1, t2) = (transfer(s1, &q), transfer(s2, &q));
        prop_assert!((0.0..=1.0).contains(&t1));
        prop_assert!((t1 - t2).abs() <= g * (s1 - s2).abs() + 1e-15);
        if s1 <= s2 {
            prop_assert!(t1 <= t2);
        }
    }
}

#[test]
fn params_validation() {
    assert!(p().validate().is_ok());
    for bad in [
        MeanFieldParams { alpha: 0.0, ..p() },
        MeanFieldParams {
            gamma_slope: -1.0,
            ..p()
        },
        MeanFieldParams { c: 0.0, ..p() },
        MeanFieldParams { mu: -0.1, ..p() },
        MeanFieldParams { dt: 2.0, ..p() },
        MeanFieldParams { stride: 0, ..p() },
        MeanFieldParams { t_end: f64::NAN, ..p() },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
    }
}

#[test]
fn silent_network_stays_silent() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = random_w(6, &mut rng);
    let q = MeanFieldParams { mu: 0.05, ..p() };
    assert!(check_weak_connectivity(&w, &q).pass);
    let traj = simulate_nonlinear(&w, &[0.0; 6], &[0.0; 6], &q).unwrap();
    assert_eq!(traj.max_abs(), 0.0);
}

#[test]
fn scalar_fixed_point() {
    // oracle: a_{k+1} = a_k + dt (-α a_k + 1/2) iterated to convergence
    let q = MeanFieldParams {
        alpha: 2.0,
        dt: 0.05,
        t_end: 20.0,
        ..p()
    };
    let mut oracle = 0.0f64;
    for _ in 0..100_000 {
        oracle += 0.001 * (-q.alpha * oracle + transfer(q.c, &q));
    }
    let w = DMatrix::zeros(1, 1);
    let traj = simulate_nonlinear(&w, &[q.c], &[0.0], &q).unwrap();
    assert!((traj.final_state()[0] - oracle).abs() < 1e-9);
    assert!((oracle - 0.25).abs() < 1e-12);
    let red = simulate_reduced(&w, &q, &[0.0], false).unwrap();
    assert!((red.final_state()[0] - 0.25).abs() < 1e-9);
}

#[test]
fn activity_bound_from_extreme_starts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..20 {
        let n = 1 + trial % 7;
        let w = random_w(n, &mut rng);
        let q = MeanFieldParams {
            alpha: rng.random_range(0.5..3.0),
            mu: rng.random_range(0.0..5.0),
            t_end: 10.0,
            ..p()
        };
        let q = MeanFieldParams { dt: 0.1 / q.alpha, ..q };
        let bound = 1.0 / q.alpha;
        let a0: Vec<f64> = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        let h: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let traj = simulate_nonlinear(&w, &h, &a0, &q).unwrap();
        assert!(traj.max_abs() <= bound + 1e-6, "trial {trial}: {}", traj.max_abs());
    }
}

#[test]
fn explosive_step_reports_nonfinite() {
    let w = DMatrix::from_element(2, 2, 1.0);
    let q = MeanFieldParams {
        mu: 1e200,
        gamma_slope: 1e200,
        t_end: 100.0,
        ..p()
    };
    let r = simulate_reduced(&w, &q, &[1.0, 1.0], true);
    assert!(matches!(r, Err(Error::NonFinite { .. })));
}

#[test]
fn dimension_mismatch_rejected() {
    let w = DMatrix::zeros(2, 2);
    assert!(simulate_nonlinear(&w, &[0.0; 3], &[0.0; 2], &p()).is_err());
    assert!(simulate_reduced(&w, &p(), &[0.0; 3], true).is_err());
}

#[test]
fn homogeneous_eigenmode_rates() {
    // a(t) = e^{(-α + γμλ) t} v exactly for an eigenvector v
    let w = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    let v = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    for (mu, expect) in [(1.0, -0.5), (3.0, 0.5)] {
        let q = MeanFieldParams {
            mu,
            t_end: 20.0,
            stride: 1,
            ..p()
        };
        let traj = simulate_reduced(&w, &q, &v, true).unwrap();
        let rate = growth_rate(&traj, &v).unwrap();
        assert!((rate - expect).abs() < 1e-6 * expect.abs(), "{rate}");
        let analytic = (expect * 20.0f64).exp() * v[0];
        assert!((traj.final_state()[0] - analytic).abs() < 1e-6 * analytic);
    }
}

#[test]
fn stationary_examples() {
    let w = DMatrix::zeros(3, 3);
    let s = stationary_state(
        &w,
        &MeanFieldParams {
            alpha: 2.0,
            dt: 0.05,
            ..p()
        },
    )
    .unwrap();
    assert!(s.values.iter().all(|v| (v - 0.25).abs() < 1e-15));

    let w = DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.25, 0.0]);
    let q = MeanFieldParams { mu: 1.0, ..p() };
    let s = stationary_state(&w, &q).unwrap();
    for v in &s.values {
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
    }
    assert!(s.residual < 1e-10);
    assert!(s.certificate.holds);

    let prop = MeanFieldParams {
        forcing_form: ForcingForm::ProportionalInput,
        c: 2.0,
        ..q
    };
    let s = stationary_state(&w, &prop).unwrap();
    assert!((s.values[0] - 2.0 / 0.75).abs() < 1e-12);
}

#[test]
fn stationary_singular_at_criticality() {
    let w = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    let q = MeanFieldParams { mu: 2.0, ..p() };
    assert!(matches!(stationary_state(&w, &q), Err(Error::Singular { mu }) if mu == 2.0));
}

#[test]
fn forced_reduced_converges_to_stationary() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let n = rng.random_range(1..=10);
        let w = random_w(n, &mut rng);
        let st = stability_threshold(&w, &p()).unwrap();
        let q = MeanFieldParams {
            mu: 0.5 * st.mu_star,
            t_end: 80.0,
            ..p()
        };
        let s = stationary_state(&w, &q).unwrap();
        let traj = simulate_reduced(&w, &q, &vec![0.0; n], false).unwrap();
        let err = traj
            .final_state()
            .iter()
            .zip(&s.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }
}

#[test]
fn weak_connectivity_examples() {
    let w = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.2, 0.1]);
    let r = check_weak_connectivity(&w, &MeanFieldParams { mu: 1.0, ..p() });
    assert!((r.lhs - 0.3).abs() < 1e-15 && r.bound == 0.5 && r.pass);
    assert!((r.slack - 0.2).abs() < 1e-15);
    assert!(check_weak_connectivity(&w, &MeanFieldParams { mu: 0.0, ..p() }).pass);
    let r2 = check_weak_connectivity(&w, &MeanFieldParams { mu: 2.0, ..p() });
    assert!((r2.lhs - 2.0 * r.lhs).abs() < 1e-15 && !r2.pass);
    let bad = check_weak_connectivity(&w, &MeanFieldParams { mu: 0.0, c: 0.2, ..p() });
    assert!(!bad.pass && bad.reason.is_some());
}

#[test]
fn weak_connectivity_on_a_grid_integrates_the_kernel() {
    use crate::kernel::GridSpec;
    let spec = GridSpec::centered(1.0, 2, 4);
    let g = KernelGrid::from_values(spec, vec![1.0; 16]).unwrap();
    let r = check_weak_connectivity_grid(&g, &MeanFieldParams { mu: 0.01, ..p() });
    let volume = 2.0 * 2.0 * std::f64::consts::TAU;
    assert!((r.lhs - 0.01 * volume).abs() < 1e-12);
}

#[test]
fn threshold_examples() {
    let w = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    let r = stability_threshold(&w, &MeanFieldParams { mu: 1.0, ..p() }).unwrap();
    assert!((r.lambda_tilde_1 - 0.5).abs() < 1e-12);
    assert!((r.mu_star - 2.0).abs() < 1e-12);
    assert!(r.stable && r.leading_rate < 0.0);
    let r3 = stability_threshold(&(w.clone() * 4.0), &MeanFieldParams { mu: 1.0, ..p() }).unwrap();
    assert!((r3.mu_star - 0.5).abs() < 1e-12);
    assert!(!r3.stable && r3.leading_rate > 0.0);
    let z = stability_threshold(&DMatrix::zeros(2, 2), &MeanFieldParams { mu: 0.0, ..p() }).unwrap();
    assert!(z.mu_star.is_infinite() && z.stable);
    assert_eq!(z.to_json()["mu_star"], "inf");
}

#[test]
fn trajectory_csv_header() {
    let w = DMatrix::zeros(3, 3);
    let q = MeanFieldParams {
        t_end: 1.0,
        stride: 5,
        ..p()
    };
    let traj = simulate_reduced(&w, &q, &[1.0, 0.0, 0.0], false).unwrap();
    let csv = traj.to_csv();
    assert_eq!(csv.lines().next().unwrap(), "time,a_0,a_1,a_2");
    assert_eq!(traj.times, vec![0.0, 0.5, 1.0]);
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn no_off_domain_samples_for_empty_stimulus() {
    let s = StimulusSet::empty(1.0, crate::se2::AngleMode::HalfCircle);
    assert!(off_domain_samples(&s, 1).is_empty());
}
