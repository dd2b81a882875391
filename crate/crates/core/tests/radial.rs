use syl_core::radial::{
    fit_holder_exponent, fit_power_coefficient, inversion_report, solve_annulus, AnnulusProblem, Side,
    SolverOptions,
};

fn solve(a: f64, b: f64, n: usize, k: usize) -> syl_core::radial::RadialSolution {
    let p = AnnulusProblem::new(a, b, n, k).unwrap();
    solve_annulus(&p, &SolverOptions::default()).unwrap()
}

#[test]
fn junction_at_geometric_mean() {
    for &(n, k, w0) in &[(4, 2, 1.273543441027524), (3, 3, 2.00721483953919), (5, 3, 1.39692866682082)] {
        let sol = solve(1.0, 4.0, n, k);
        let j = sol.junction.unwrap();
        assert!((j.r_star - 2.0).abs() < 1e-8, "n={n} k={k}: r_*={}", j.r_star);
        assert!((j.w0 - w0).abs() < 1e-7, "n={n} k={k}: w0={}", j.w0);
        assert!(sol.invariants_hold(), "{:?}", sol.check_invariants());
    }
}

#[test]
fn k1_is_smooth_and_has_no_junction() {
    let sol = solve(1.0, 3.0, 4, 1);
    assert!(sol.junction.is_none());
    assert!(sol.invariants_hold(), "{:?}", sol.check_invariants());
    assert!(fit_holder_exponent(&sol, Side::Outer).is_err());
}

#[test]
fn holder_exponent_is_one_over_k() {
    for k in 2..=4 {
        let sol = solve(1.0, 4.0, 5, k);
        for side in [Side::Inner, Side::Outer] {
            let fit = fit_holder_exponent(&sol, side).unwrap();
            assert!((fit.gamma - 1.0 / k as f64).abs() < 0.02, "k={k} {side:?}: {}", fit.gamma);
        }
    }
}

#[test]
fn inversion_symmetry() {
    let sol = solve(1.0, 4.0, 4, 2);
    let rep = inversion_report(&sol).unwrap();
    assert!(rep.max_residual < 1e-8, "{rep:?}");
    assert!((rep.transported_hit - 1.0).abs() < 1e-8, "{rep:?}");
    assert!(rep.max_mismatch < 1e-7, "{rep:?}");
    assert!(rep.compared_points > 100);
}

#[test]
fn three_halves_coefficient_k2() {
    let sol = solve(1.0, 4.0, 4, 2);
    let j = sol.junction.unwrap();
    let expected = -(2.0 / (3.0 * j.w0)) * (2.0 * j.r_star / 3.0).sqrt();
    let got = fit_power_coefficient(&sol, Side::Outer, 1.5, (1e-8, 1e-5)).unwrap();
    assert!((got / expected - 1.0).abs() < 0.01, "{got} vs {expected}");
}

#[test]
fn eps0_refinement_converges() {
    let p = AnnulusProblem::new(1.0, 4.0, 4, 2).unwrap();
    let w0 = |eps0: f64| {
        let opts = SolverOptions { eps0: Some(eps0), ..SolverOptions::default() };
        solve_annulus(&p, &opts).unwrap().junction.unwrap().w0
    };
    let (coarse, mid, fine) = (w0(1e-3), w0(1e-4), w0(1e-5));
    assert!((mid - fine).abs() < (coarse - mid).abs().max(1e-12));
    assert!((mid - fine).abs() < 1e-9);
}

#[test]
fn dilation_invariance() {
    let base = solve(1.0, 4.0, 5, 3).junction.unwrap();
    let scaled = solve(3.0, 12.0, 5, 3).junction.unwrap();
    assert!((scaled.r_star / base.r_star - 3.0).abs() < 1e-8);
    assert!((scaled.w0 / base.w0 - 3.0).abs() < 1e-7);
}

#[test]
fn thin_and_thick_annuli() {
    for (a, b) in [(1.0, 1.2), (1.0, 50.0)] {
        for k in [1, 2, 3] {
            let sol = solve(a, b, 4, k);
            assert!(sol.invariants_hold(), "a={a} b={b} k={k}: {:?}", sol.check_invariants());
            if let Some(j) = sol.junction {
                assert!((j.r_star / (a * b).sqrt() - 1.0).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn all_k_up_to_n() {
    for n in 3..=6 {
        for k in 1..=n {
            let sol = solve(1.0, 4.0, n, k);
            assert!(sol.invariants_hold(), "n={n} k={k}: {:?}", sol.check_invariants());
        }
    }
}

#[test]
fn rejects_bad_options() {
    let p = AnnulusProblem::new(1.0, 4.0, 4, 2).unwrap();
    let opts = SolverOptions { ode_tol: -1.0, ..SolverOptions::default() };
    assert_eq!(solve_annulus(&p, &opts).unwrap_err().exit_code(), 2);
    let opts = SolverOptions { eps0: Some(1.0), ..SolverOptions::default() };
    assert_eq!(solve_annulus(&p, &opts).unwrap_err().exit_code(), 2);
}
