use conformal_transform::from_selfsimilar;
use exact_solutions::{eval_h2m, eval_hermite, eval_profile32, hermite_basis, Profile32};
use gaussian_calculus::{inner_mu, make_grid, GaussianMeasure, HalfSpaceGrid, WeightedField};
use proptest::prelude::*;
use weiss_diagnostics::{
    epiperimetric_check, evolution_residuals_2m, fit_logarithmic, lambda_2m, log_bracket, log_f,
    log_f_prime, project_e2m, project_e32, weiss_energy, weiss_original, weiss_split_32,
    Differencing, E2mBasis, EpiVariant, Monitor, SampledProfiles, Snapshot,
};

fn grid2() -> HalfSpaceGrid {
    make_grid(2, 6.0, 0.05).unwrap()
}

fn profile(g: &HalfSpaceGrid, angle: f64) -> WeightedField {
    let e = Profile32::direction_from_angle(g.dim(), angle);
    eval_profile32(&Profile32::with_reference_constant(1.0, &e).unwrap(), g).unwrap()
}

#[test]
fn regular_profile_has_small_energy_and_converges() {
    let mut prev = f64::INFINITY;
    for h in [0.1, 0.05, 0.025] {
        let g = make_grid(2, 6.0, h).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let w = weiss_energy(&profile(&g, 0.0), 1.5, &m).unwrap().abs();
        assert!(w < prev);
        prev = w;
    }
    assert!(prev < 1e-2, "{prev}");
}

#[test]
fn hermite_energies_follow_the_degree() {
    let g = grid2();
    let m = GaussianMeasure::conformal(&g);
    for mm in 1..=2usize {
        let kappa = 2.0 * mm as f64;
        for alpha in hermite_basis(2, 2 * mm..=2 * mm) {
            let p = eval_hermite(&alpha, &g).unwrap();
            assert!(weiss_energy(&p, kappa, &m).unwrap().abs() < 1e-3);
        }
        for alpha in hermite_basis(2, 2 * mm + 2..=2 * mm + 2) {
            let p = eval_hermite(&alpha, &g).unwrap();
            let w = weiss_energy(&p, kappa, &m).unwrap();
            assert!((w - 1.0).abs() < 1e-3, "{alpha:?}: {w}");
        }
    }
}

#[test]
fn original_coordinates_agree_with_selfsimilar_energy() {
    let g = grid2();
    let m = GaussianMeasure::conformal(&g);
    let gx = make_grid(2, 11.0, 0.1).unwrap();
    // A stationary profile and a generic smooth field, both at tau = 0.
    let fields = [
        profile(&g, 0.0),
        WeightedField::from_fn(&g, |y| 1.0 + y[0] * y[1] + 0.3 * y[1] * y[1]),
    ];
    for (i, f) in fields.iter().enumerate() {
        let conformal = weiss_energy(f, 1.5, &m).unwrap();
        let slice = from_selfsimilar(f, 1.5, &gx).unwrap();
        let original = weiss_original(&slice, 1.5).unwrap();
        assert!(
            (original - conformal).abs() < 1e-6,
            "{i}: {original} vs {conformal}"
        );
    }
    let probe = from_selfsimilar(&profile(&g, 0.0), 1.5, &gx).unwrap();
    assert!(weiss_original(&probe, 2.0).unwrap() < 0.0);
}

#[test]
fn projection_onto_the_regular_cone() {
    let g = grid2();
    let m = GaussianMeasure::conformal(&g);
    let fam = SampledProfiles::reference(&g).unwrap();
    let h = profile(&g, 0.0);

    let d = project_e32(&h.scaled(2.0), &fam, &m).unwrap();
    assert!((d.lambda - 2.0).abs() < 1e-3);
    assert_eq!(d.angle, 0.0);
    assert!(inner_mu(&d.remainder, &d.remainder, &m).unwrap() < 1e-12);

    let d = project_e32(&h.scaled(-1.0), &fam, &m).unwrap();
    // -h_{e1} still correlates positively with h_{-e1} where both are
    // positive; the only cone element with zero correlation is 0.
    let neg = profile(&g, std::f64::consts::PI);
    let corr = inner_mu(&h.scaled(-1.0), &neg, &m).unwrap();
    assert!((d.lambda - corr.max(0.0) / inner_mu(&neg, &neg, &m).unwrap()).abs() < 1e-12);

    let p20 = eval_hermite(&[2, 0], &g).unwrap();
    let u = h.add_scaled(0.1, &p20).unwrap();
    let d = project_e32(&u, &fam, &m).unwrap();
    let expected = inner_mu(&u, &h, &m).unwrap() / inner_mu(&h, &h, &m).unwrap();
    // Brute force over lambda on a 1e-3 grid.
    let brute = (0..3000)
        .map(|k| k as f64 * 1e-3)
        .min_by(|a, b| {
            let ra = inner_mu(
                &u.add_scaled(-a, &h).unwrap(),
                &u.add_scaled(-a, &h).unwrap(),
                &m,
            );
            let rb = inner_mu(
                &u.add_scaled(-b, &h).unwrap(),
                &u.add_scaled(-b, &h).unwrap(),
                &m,
            );
            ra.unwrap().total_cmp(&rb.unwrap())
        })
        .unwrap();
    assert!((d.lambda - expected).abs() < 1e-10);
    assert!((d.lambda - brute).abs() < 1e-2);
    assert_eq!(d.angle, 0.0);
    assert!(d.orth1.abs() < 1e-10);
}

#[test]
fn projection_finds_the_direction_in_three_dimensions() {
    let g = make_grid(3, 4.0, 0.2).unwrap();
    let m = GaussianMeasure::conformal(&g);
    let fam = SampledProfiles::reference(&g).unwrap();
    let u = profile(&g, 1.0).scaled(2.0);
    let d = project_e32(&u, &fam, &m).unwrap();
    assert!((d.angle - 1.0).abs() < 1e-5, "{}", d.angle);
    assert!((d.lambda - 2.0).abs() < 1e-3);
    assert!(d.orth1.abs() < 1e-8);
    assert!(d.orth22.unwrap().abs() < 1e-4);
}

#[test]
fn weiss_split_of_profiles_and_nonnegative_data() {
    let g = grid2();
    let m = GaussianMeasure::conformal(&g);
    let fam = SampledProfiles::reference(&g).unwrap();
    let c = fam_constant(&g);
    let h = profile(&g, 0.0);
    let d = project_e32(&h, &fam, &m).unwrap();
    let s = weiss_split_32(&h, &d, c, &m).unwrap();
    assert!(s.w_u.abs() < 1e-2 && s.w_v.abs() < 1e-6 && s.boundary_term.abs() < 1e-2);

    let u = h
        .add_scaled(0.3, &WeightedField::from_fn(&g, |y| 1.0 + y[0] * y[0]))
        .unwrap();
    let d = project_e32(&u, &fam, &m).unwrap();
    let s = weiss_split_32(&u, &d, c, &m).unwrap();
    assert!(s.trace_nonnegative);
    assert!(s.w_v <= s.w_u + 1e-2);
    assert!(s.residual.abs() < 2e-2, "{:?}", s);
}

fn fam_constant(g: &HalfSpaceGrid) -> f64 {
    exact_solutions::goldens::profile_constant(g.dim()).unwrap()
}

#[test]
fn projection_onto_hermite_spaces() {
    let g = grid2();
    let m = GaussianMeasure::conformal(&g);
    for mm in 1..=2usize {
        let basis = E2mBasis::new(&g, mm).unwrap();
        let f = basis.fields();
        let u = f[0].scaled(3.0).add_scaled(1.0, &f[1]).unwrap();
        let d = project_e2m(&u, &basis, &m).unwrap();
        assert!((d.coeffs[0] - 3.0).abs() < 1e-3 && (d.coeffs[1] - 1.0).abs() < 1e-3);
        assert!(d.coeffs[2..].iter().all(|c| c.abs() < 1e-3));
        assert!(inner_mu(&d.remainder, &d.remainder, &m).unwrap().sqrt() < 1e-3);

        let above = eval_hermite(&[2 * mm + 2, 0], &g).unwrap();
        let d = project_e2m(&above, &basis, &m).unwrap();
        assert!(d.coeffs.iter().all(|c| c.abs() < 1e-3));

        let (h2m, _) = eval_h2m(mm, &g).unwrap();
        assert!((lambda_2m(&h2m, &basis, &m).unwrap() - 1.0).abs() < 1e-12);
        let d = project_e2m(&h2m, &basis, &m).unwrap();
        let mut rebuilt = WeightedField::zeros(&g);
        for (c, p) in d.coeffs.iter().zip(f) {
            rebuilt = rebuilt.add_scaled(*c, p).unwrap();
        }
        let err = rebuilt.add_scaled(-1.0, &h2m).unwrap();
        assert!(inner_mu(&err, &err, &m).unwrap().sqrt() < 1e-3);
        assert!(d.orth2 < 1e-3);
    }
}

#[test]
fn eigen_trajectory_residuals_are_second_order() {
    let g = grid2();
    let m = GaussianMeasure::conformal(&g);
    let basis = E2mBasis::new(&g, 1).unwrap();
    let p = eval_hermite(&[2, 2], &g).unwrap();
    let mut worst = Vec::new();
    for dtau in [0.04, 0.02] {
        let snaps: Vec<Snapshot> = (0..=(1.0 / dtau) as usize)
            .map(|k| {
                let tau = k as f64 * dtau;
                Snapshot {
                    field: p.scaled((-tau).exp()).with_time(tau),
                    normal_derivative: vec![0.0; g.boundary_len()],
                }
            })
            .collect();
        let r = evolution_residuals_2m(&snaps, &basis, &m, Differencing::Centered).unwrap();
        assert!(r.max_weiss_equal() < 1e-3);
        assert!(r.max_lambda() < 1e-10);
        worst.push(r.max_weiss2m());
    }
    // Quadrature error of W(v) plus the O(dtau^2) difference quotient.
    assert!(worst[1] < worst[0]);
    assert!(worst[1] < 2e-3, "{worst:?}");

    // Stationary element of E_2^+: lambda_alpha constant.
    let q = eval_hermite(&[0, 2], &g)
        .unwrap()
        .add_scaled(2.0, &eval_hermite(&[2, 0], &g).unwrap())
        .unwrap();
    let snaps: Vec<Snapshot> = (0..5)
        .map(|k| Snapshot {
            field: q.clone().with_time(0.1 * k as f64),
            normal_derivative: vec![0.0; g.boundary_len()],
        })
        .collect();
    let r = evolution_residuals_2m(&snaps, &basis, &m, Differencing::Backward).unwrap();
    assert!(r.max_lambda() < 1e-12);
    assert!(r.min_lambda_2m_increment().abs() < 1e-12);
}

#[test]
fn too_short_for_centered_differences() {
    let g = make_grid(2, 3.0, 0.25).unwrap();
    let m = GaussianMeasure::conformal(&g);
    let basis = E2mBasis::new(&g, 1).unwrap();
    let s = Snapshot {
        field: WeightedField::zeros(&g),
        normal_derivative: vec![0.0; g.boundary_len()],
    };
    let err = evolution_residuals_2m(
        &[s.clone(), s.with_tau(0.1)],
        &basis,
        &m,
        Differencing::Centered,
    );
    assert!(err.is_err());
}

trait WithTau {
    fn with_tau(self, tau: f64) -> Self;
}

impl WithTau for Snapshot {
    fn with_tau(mut self, tau: f64) -> Self {
        self.field.set_time(tau);
        self
    }
}

#[test]
fn negative_eigenmode_trace_matches_closed_form() {
    // The constant p_0 satisfies L_2 p_0 = p_0, so u = e^{tau} p_0 has
    // W_2(u) = -e^{2 tau} |p_0|^2.
    let g = grid2();
    let m = GaussianMeasure::conformal(&g);
    let p0 = eval_hermite(&[0, 0], &g).unwrap();
    let norm = inner_mu(&p0, &p0, &m).unwrap();
    let monitor = Monitor::Plain;
    let mut trace = monitor.new_trace(2.0);
    for k in 0..=30 {
        let tau = 0.1 * k as f64;
        let u = p0.scaled(tau.exp()).with_time(tau);
        let row = monitor.row(&u, 2.0, &m, 0.0, None).unwrap();
        let exact = -(2.0 * tau).exp() * norm;
        assert!((row.weiss - exact).abs() < 1e-10 * exact.abs());
        trace.push(row).unwrap();
    }
    let r = epiperimetric_check(&trace, EpiVariant::NegativeGrowth, 0.0).unwrap();
    assert!((r.min_c0.unwrap() - (2f64.exp() - 1.0)).abs() < 1e-9);
    assert!((r.fit.unwrap().gamma.unwrap() + 2.0).abs() < 1e-9);
}

#[test]
fn logarithmic_bound_on_the_synthetic_trace() {
    let tau: Vec<f64> = (0..=200).map(|k| 0.5 * k as f64).collect();
    let w: Vec<f64> = tau
        .iter()
        .map(|t| 1.0 / ((10.0 + t) * (10.0 + t).ln().powi(2)))
        .collect();
    let fit = fit_logarithmic(&tau, &w, (0.0, 100.0)).unwrap();
    assert_eq!(fit.bound_fraction, Some(1.0));
    let c0 = fit.c0.unwrap();
    assert!(c0 > 0.2 && c0 < 1.5, "{c0}");
    assert!(fit.r_squared > 0.99);
}

#[test]
fn f_calculus() {
    let s0 = 1e-2;
    for s in [5e-3, 1e-4, 1e-6, 1e-9] {
        let d = 1e-5 * s;
        let fd = (log_f(s + d, s0).unwrap() - log_f(s - d, s0).unwrap()) / (2.0 * d);
        let exact = log_f_prime(s);
        assert!(
            (fd - exact).abs() < 1e-6 * exact,
            "s = {s}: {fd} vs {exact}"
        );
        let (lower, middle) = log_bracket(s, s0).unwrap();
        assert!(
            lower <= middle && middle <= 0.0,
            "s = {s}: {lower} {middle}"
        );
    }
    assert!(log_f(0.5, 0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_gap_below_2m(
        mm in 1usize..=2,
        raw in proptest::collection::vec(-1.0f64..1.0, 12),
        even_only in any::<bool>(),
    ) {
        let g = make_grid(2, 6.0, 0.05).unwrap();
        let m = GaussianMeasure::conformal(&g);
        let kappa = 2.0 * mm as f64;
        let mut q = WeightedField::zeros(&g);
        for (alpha, c) in hermite_basis(2, 0..=2 * mm - 1).iter().zip(&raw) {
            let deg: usize = alpha.iter().sum();
            if even_only && deg % 2 == 1 {
                continue;
            }
            q = q.add_scaled(*c, &eval_hermite(alpha, &g).unwrap()).unwrap();
        }
        let w = weiss_energy(&q, kappa, &m).unwrap();
        let nsq = inner_mu(&q, &q, &m).unwrap();
        // Odd degrees 2m-1 sit only half a unit below the threshold.
        prop_assert!(w <= -0.5 * nsq + 1e-3 * nsq.max(1.0));
        if even_only {
            prop_assert!(w <= -nsq + 1e-3 * nsq.max(1.0));
        }
    }
}
