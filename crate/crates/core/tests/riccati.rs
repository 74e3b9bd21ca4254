use proptest::prelude::*;
use rankframe::dynamics::{offdiag_decay, riccati_solve, volume_growth_report, Branch, ClosedForm};
use rankframe::Error;

/// Horizon that stops 0.1 before the first pole, capped at `t_max`.
fn safe_horizon(eps: f64, tr0: f64, t_max: f64) -> f64 {
    ClosedForm::new(eps, tr0).pole.map_or(t_max, |p| (p - 0.1).min(t_max))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn numeric_solution_tracks_the_closed_form(eps in -2.0f64..2.0, tr0 in -4.0f64..4.0) {
        let horizon = safe_horizon(eps, tr0, 5.0);
        prop_assume!(horizon > 0.05);
        let sol = riccati_solve(eps, tr0, horizon, 1e-3).unwrap();
        prop_assert!(sol.max_closed_form_error < 1e-8, "{}", sol.max_closed_form_error);
        // independent check against the analytic value at the last sample
        let &(t, y) = sol.samples.last().unwrap();
        let exact = ClosedForm::new(eps, tr0).value(t);
        prop_assert!((y - exact).abs() < 1e-8 * (1.0 + exact.abs()));
    }

    #[test]
    fn decay_law_log_derivative_vanishes(eps in -2.0f64..2.0, tr0 in -4.0f64..4.0) {
        let horizon = safe_horizon(eps, tr0, 3.0);
        prop_assume!(horizon > 0.05);
        let sol = riccati_solve(eps, tr0, horizon, 2e-5).unwrap();
        let aug = offdiag_decay(&sol, 0.8, -0.3).unwrap();
        prop_assert!(aug.decay_log_residual.unwrap() < 1e-6, "{:?}", aug.decay_log_residual);
    }
}

#[test]
fn spherical_blow_up_at_half_pi() {
    let sol = riccati_solve(1.0, 0.0, 3.0, 1e-3).unwrap();
    assert_eq!(sol.branch, Branch::Tangent);
    assert!((sol.blowup_time.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
    let (lo, hi) = sol.blowup_bracket.unwrap();
    assert!(lo < std::f64::consts::FRAC_PI_2 + 1e-3 && hi > std::f64::consts::FRAC_PI_2 - 1e-3);
}

#[test]
fn hyperbolic_branches_converge_to_two() {
    for tr0 in [-1.9, 0.0, 3.0] {
        let sol = riccati_solve(-1.0, tr0, 10.0, 1e-3).unwrap();
        let &(t, y) = sol.samples.last().unwrap();
        assert!((t - 10.0).abs() < 1e-9);
        assert!((y - 2.0).abs() < 1e-6, "{tr0}: {y}");
        assert!(sol.blowup_time.is_none());
    }
    let sol = riccati_solve(-1.0, 0.0, 10.0, 1e-3).unwrap();
    assert!((sol.samples.last().unwrap().1 - 2.0 * 10f64.tanh()).abs() < 1e-9);
}

#[test]
fn hyperbolic_equilibria_are_exact() {
    for tr0 in [-2.0, 2.0] {
        let sol = riccati_solve(-1.0, tr0, 10.0, 1e-3).unwrap();
        assert_eq!(sol.branch, Branch::Constant);
        assert!(sol.samples.iter().all(|&(_, y)| y == tr0));
    }
}

#[test]
fn below_the_lower_equilibrium_blows_up() {
    let sol = riccati_solve(-1.0, -3.0, 10.0, 1e-3).unwrap();
    assert_eq!(sol.branch, Branch::Coth);
    // 2 coth(t + c) with coth c = −3/2: pole at t = atanh(2/3)
    let pole = (2.0f64 / 3.0).atanh();
    assert!((sol.blowup_time.unwrap() - pole).abs() < 1e-12);
    assert!(sol.blowup_bracket.is_some());
}

#[test]
fn flat_case_hyperbola() {
    let sol = riccati_solve(0.0, 1.0, 4.0, 1e-3).unwrap();
    assert_eq!(sol.branch, Branch::Hyperbola);
    assert!((sol.samples.last().unwrap().1 - 2.0 / 6.0).abs() < 1e-10);
    let sol = riccati_solve(0.0, -1.0, 4.0, 1e-3).unwrap();
    assert_eq!(sol.blowup_time, Some(2.0));
}

#[test]
fn decay_under_spherical_blow_up() {
    // |R₂(t)| = |R₂(0)| exp(−(3/2)∫₀ᵗ −2 tan s ds) = cos(t)⁻³
    let sol = riccati_solve(1.0, 0.0, 1.5, 1e-4).unwrap();
    let aug = offdiag_decay(&sol, 1.0, 0.0).unwrap();
    let r2 = aug.r2_samples.unwrap();
    let want = 1.5f64.cos().powi(-3);
    assert!((r2.last().unwrap() / want - 1.0).abs() < 0.01, "{} vs {want}", r2.last().unwrap());
    // tr0 ≤ 0 keeps tr A ≤ 0, so |R₂| never drops below its start
    assert!(r2.iter().all(|&r| r >= 1.0));
    match offdiag_decay(&riccati_solve(1.0, 0.0, 3.0, 1e-3).unwrap(), 1.0, 1.0) {
        Err(Error::HorizonTruncated { partial, .. }) => assert!(partial.r2_samples.is_some()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn decay_under_hyperbolic_convergence() {
    let sol = riccati_solve(-1.0, 0.0, 2.0, 1e-3).unwrap();
    let aug = offdiag_decay(&sol, 1.0, 2.0).unwrap();
    let want = 2f64.cosh().powi(-3);
    let r2 = *aug.r2_samples.unwrap().last().unwrap();
    assert!((r2 / want - 1.0).abs() < 0.01, "{r2} vs {want}");
    let r3 = *aug.r3_samples.unwrap().last().unwrap();
    assert!((r3 / (2.0 * want) - 1.0).abs() < 0.01);
}

#[test]
fn volume_growth_slopes() {
    let tr0s = [-1.9, -1.0, 0.0, 1.0, 2.0];
    let rep = volume_growth_report(-1.0, &tr0s, 30.0, 1e-3, (20.0, 30.0), 1.0).unwrap();
    for s in &rep.series {
        assert!((s.slope.unwrap() - 2.0).abs() < 1e-3, "{}: {:?}", s.tr0, s.slope);
        assert!(!s.flagged);
    }
    // tr0 = 2: log-volume 2t exactly; tr0 = 0: 2 ln cosh t
    let at = |tr0: f64, t: f64| {
        rep.rows
            .iter()
            .find(|r| r.tr0 == tr0 && (r.t - t).abs() < 1e-9)
            .map(|r| r.log_volume)
            .unwrap()
    };
    assert!((at(2.0, 10.0) - 20.0).abs() < 1e-9);
    assert!((at(0.0, 10.0) - 2.0 * 10f64.cosh().ln()).abs() < 1e-3);
    let flagged = volume_growth_report(1.0, &[0.0], 1.0, 1e-3, (0.0, 1.0), 0.5).unwrap();
    assert!(flagged.series[0].flagged);
}
