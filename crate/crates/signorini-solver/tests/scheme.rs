use conformal_transform::ConformalFrame;
use exact_solutions::{eval_h2m, eval_hermite, eval_profile32, hermite_basis, Profile32};
use gaussian_calculus::{inner_mu, l2mu_norm, make_grid, GaussianMeasure, HalfSpaceGrid, WeightedField};
use proptest::prelude::*;
use signorini_solver::{
    balanced_profile, cross_validate, BalancedFamily, drift, field_complementarity, residual_complementarity,
    solve_trajectory, Penalty, Scheme, Solver, SolverConfig, SolverError,
};
use weiss_diagnostics::{project_e32, Monitor, ProfileFamily};

fn cfg(kappa: f64, tau_max: f64, dtau: f64, scheme: Scheme) -> SolverConfig {
    SolverConfig::new(ConformalFrame::new(kappa, tau_max, dtau).unwrap(), scheme)
}

fn profile(g: &HalfSpaceGrid) -> WeightedField {
    eval_profile32(&Profile32::with_reference_constant(1.0, &[1.0]).unwrap(), g).unwrap()
}

/// Localized Hermite combination plus the constant that makes its trace
/// nonnegative.
fn admissible(g: &HalfSpaceGrid, coeffs: &[f64]) -> WeightedField {
    let mut q = WeightedField::zeros(g);
    for (alpha, c) in hermite_basis(2, 0..=3).iter().zip(coeffs) {
        let p = eval_hermite(alpha, g).unwrap();
        let local = WeightedField::from_fn(g, |y| {
            p.interpolate(y).unwrap() * (-(y[0] * y[0] + y[1] * y[1]) / 2.0).exp()
        });
        q = q.add_scaled(*c, &local).unwrap();
    }
    let low = q.boundary_trace().into_iter().fold(0.0, f64::min);
    q.add_scaled(-low, &WeightedField::from_fn(g, |_| 1.0)).unwrap()
}

#[test]
fn regular_profile_is_nearly_stationary_and_improves_under_refinement() {
    let mut prev = f64::INFINITY;
    for (h, dtau) in [(0.2, 0.04), (0.1, 0.02)] {
        let g = make_grid(2, 5.0, h).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let t = solve_trajectory(&profile(&g), &cfg(1.5, 2.0, dtau, Scheme::Projected), &Monitor::Plain).unwrap();
        let d = drift(&t.snapshots, &m).unwrap().last().unwrap().1;
        assert!(d <= 5.0 * (h.powf(1.5) + dtau), "h = {h}: {d}");
        assert!(d < prev);
        prev = d;
    }
}

#[test]
fn positive_singular_profile_is_stationary() {
    let g = make_grid(2, 5.0, 0.1).unwrap();
    let m = GaussianMeasure::conformal(&g);
    let (h2, _) = eval_h2m(1, &g).unwrap();
    let t = solve_trajectory(&h2, &cfg(2.0, 1.0, 0.02, Scheme::Projected), &Monitor::Plain).unwrap();
    let d = drift(&t.snapshots, &m).unwrap().last().unwrap().1;
    assert!(d < 1e-2, "{d}");
}

#[test]
fn inactive_constraint_reproduces_eigen_decay() {
    // p_(0,4) has the positive trace 12 c_alpha and decays like e^{-tau} at
    // kappa = 2.
    let g = make_grid(2, 6.0, 0.1).unwrap();
    let m = GaussianMeasure::conformal(&g);
    let p = eval_hermite(&[0, 4], &g).unwrap();
    let dtau = 0.01;
    let t = solve_trajectory(&p, &cfg(2.0, 0.5, dtau, Scheme::Projected), &Monitor::Plain).unwrap();
    let norms: Vec<f64> = t.snapshots.iter().map(|s| l2mu_norm(&s.field, &m).unwrap()).collect();
    for w in norms.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio - (-dtau).exp()).abs() < 5.0 * dtau * dtau + 1e-3 * dtau, "{ratio}");
    }
    assert!(t.min_trace >= 0.0);
}

#[test]
fn zero_horizon_gives_one_snapshot() {
    let g = make_grid(2, 3.0, 0.25).unwrap();
    let t = solve_trajectory(&profile(&g), &cfg(1.5, 0.0, 0.1, Scheme::Projected), &Monitor::Plain).unwrap();
    assert_eq!(t.snapshots.len(), 1);
    assert_eq!(t.trace.len(), 1);
}

#[test]
fn schemes_coincide_without_contact() {
    let g = make_grid(2, 5.0, 0.2).unwrap();
    let u = WeightedField::from_fn(&g, |y| 2.0 + 0.3 * y[0] + 0.1 * y[1] * y[1]);
    let cv = cross_validate(
        &u,
        &cfg(1.5, 1.0, 0.02, Scheme::Penalized { epsilon: 0.01 }),
        &cfg(1.5, 1.0, 0.02, Scheme::Projected),
    )
    .unwrap();
    assert!(cv.max_discrepancy <= 1e-8, "{}", cv.max_discrepancy);
}

#[test]
fn penalized_scheme_approaches_projection() {
    let g = make_grid(2, 5.0, 0.2).unwrap();
    let u = admissible(&g, &[0.2, 0.8, -0.5, 0.4, 0.6, -0.3, 0.2, 0.5]).add_scaled(-0.3, &WeightedField::from_fn(&g, |_| 1.0)).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3] {
        let cv = cross_validate(
            &u,
            &cfg(1.5, 1.0, 0.02, Scheme::Penalized { epsilon: eps }),
            &cfg(1.5, 1.0, 0.02, Scheme::Projected),
        )
        .unwrap();
        assert!(cv.max_discrepancy < prev, "eps = {eps}");
        prev = cv.max_discrepancy;
    }
}

#[test]
fn projected_trace_is_nonnegative_and_complementary() {
    let g = make_grid(2, 5.0, 0.2).unwrap();
    let u = admissible(&g, &[0.1, 1.0, -0.7, 0.3, 0.9, -0.6, 0.2, 0.4]);
    let solver = Solver::new(&g, cfg(1.5, 0.4, 0.02, Scheme::Projected)).unwrap();
    let mut s = solver.initial_state(&u).unwrap();
    for _ in 0..20 {
        s = solver.step(&s).unwrap();
        let c = residual_complementarity(&s.field, &s.normal_derivative).unwrap();
        assert_eq!(c.negativity, 0.0);
        assert!(c.positive_flux < 1e-6, "{c:?}");
        assert!(c.product < 1e-6, "{c:?}");
    }
}

#[test]
fn penalized_trace_violation_is_of_order_epsilon() {
    let g = make_grid(2, 5.0, 0.2).unwrap();
    let u = admissible(&g, &[0.1, 1.0, -0.7, 0.3, 0.9, -0.6, 0.2, 0.4]).add_scaled(-0.5, &WeightedField::from_fn(&g, |_| 1.0)).unwrap();
    for eps in [1e-1, 1e-2] {
        let t = solve_trajectory(&u, &cfg(1.5, 0.5, 0.02, Scheme::Penalized { epsilon: eps }), &Monitor::Plain).unwrap();
        assert!(t.min_trace >= -0.6, "{}", t.min_trace);
        let last = &t.snapshots.last().unwrap().field;
        let low = last.boundary_trace().into_iter().fold(0.0, f64::min);
        assert!(low >= -2.0 * eps, "eps = {eps}: {low}");
    }
}

#[test]
fn complementarity_examples() {
    let g = make_grid(2, 4.0, 0.25).unwrap();
    let pos = WeightedField::from_fn(&g, |y| 1.0 + y[0] * y[0]);
    let c = field_complementarity(&pos).unwrap();
    assert_eq!((c.negativity, c.positive_flux), (0.0, 0.0));
    assert!(c.product < 1e-12);
    let lin = WeightedField::from_fn(&g, |y| -y[0]);
    let c = field_complementarity(&lin).unwrap();
    assert!((c.negativity - 4.0).abs() < 1e-12);
    let he = profile(&make_grid(2, 4.0, 0.05).unwrap());
    let c = field_complementarity(&he).unwrap();
    assert_eq!(c.negativity, 0.0);
    assert!(c.positive_flux < 1e-12);
}

#[test]
fn step_size_beyond_stability_is_rejected() {
    let g = make_grid(2, 3.0, 0.25).unwrap();
    let r = Solver::new(&g, cfg(2.0, 1.0, 1.0, Scheme::Projected));
    assert!(matches!(r, Err(SolverError::InvalidConfig(_))));
    let r = Solver::new(&g, cfg(2.0, 1.0, 0.1, Scheme::Penalized { epsilon: -1.0 }));
    assert!(matches!(r, Err(SolverError::InvalidConfig(_))));
}

#[test]
fn balanced_profile_on_a_coarse_grid() {
    let g = make_grid(2, 5.0, 0.2).unwrap();
    let c = exact_solutions::goldens::profile_constant(2).unwrap();
    let bp = balanced_profile(&g, &[1.0], c, 5).unwrap();
    assert_eq!(bp.profile_index, 1);
    assert!((bp.kappa - 1.5).abs() < 1e-2, "{}", bp.kappa);
    assert!(bp.min_contact_force >= 0.0);
    assert!(bp.correlation > 0.999);
    let m = GaussianMeasure::conformal(&g);
    let t = solve_trajectory(&bp.field, &cfg(bp.kappa, 1.0, 0.02, Scheme::Projected), &Monitor::Plain).unwrap();
    assert!(drift(&t.snapshots, &m).unwrap().last().unwrap().1 < 1e-9);
    let family = BalancedFamily::new(&bp, c).unwrap();
    let flipped = family.profile(std::f64::consts::PI).unwrap().scaled(2.0);
    let dec = project_e32(&flipped, &family, &m).unwrap();
    assert!((dec.angle - std::f64::consts::PI).abs() < 1e-12);
    assert!((dec.lambda - 2.0).abs() < 1e-12);
    assert!(inner_mu(&dec.remainder, &dec.remainder, &m).unwrap() < 1e-20);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn penalty_profile_is_monotone(eps in 1e-3f64..0.5, s in -2.0f64..2.0) {
        let p = Penalty::new(eps).unwrap();
        prop_assert!(p.beta_prime(s) >= 0.0);
        if s >= 0.0 {
            prop_assert_eq!(p.beta(s), 0.0);
        }
        if s <= -2.0 * eps * eps {
            prop_assert!((p.beta(s) - (eps + s / eps)).abs() < 1e-12 * (1.0 + s.abs() / eps));
        }
        prop_assert!(p.beta(s - 1e-3) <= p.beta(s));
    }

    /// Energy identities that the projected scheme satisfies step by step.
    #[test]
    fn discrete_energy_identities(
        coeffs in proptest::collection::vec(-1.0f64..1.0, 8),
        kappa in prop_oneof![Just(1.5f64), Just(2.0)],
    ) {
        let g = make_grid(2, 4.0, 0.25).unwrap();
        let u = admissible(&g, &coeffs);
        let dtau = 0.05;
        let t = solve_trajectory(&u, &cfg(kappa, 1.0, dtau, Scheme::Projected), &Monitor::Plain).unwrap();
        let rows = t.trace.rows();
        let scale = rows.iter().map(|r| r.weiss.abs() + r.norm_sq).fold(1.0, f64::max);
        let mut cum = 0.0;
        for k in 1..rows.len() {
            cum += rows[k].dissipation * dtau;
            let excess = rows[k].weiss - rows[0].weiss + 2.0 * cum;
            prop_assert!(excess <= 0.5 * kappa * dtau * cum + 1e-9 * scale);
            if k + 1 < rows.len() {
                let second = rows[k + 1].norm_sq - 2.0 * rows[k].norm_sq + rows[k - 1].norm_sq;
                prop_assert!(second >= -1e-9 * scale);
            }
        }
    }
}
