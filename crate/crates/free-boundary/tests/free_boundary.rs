use conformal_transform::{FnSolution, OriginalSolution};
use exact_solutions::{goldens, H2m, Profile32};
use free_boundary::{
    blowup, classify_kappa, compute_h, dyadic_radii, extract_contact, frequency_gap_experiment,
    holder_maps, reconstruct_graph, Axis, BlowupParams, BlowupSetup, BoundaryTimeField, Center,
    Classification, FbError, FreeBoundarySample, GapConfig, GraphWindow, HCurve, HQuadrature,
    log_grid,
};
use gaussian_calculus::make_grid;
use proptest::prelude::*;
use weiss_diagnostics::SampledProfiles;

/// The time-independent extension `(-t)^{3/4} h_e(x / (2 sqrt(-t)))`.
fn regular(direction: Vec<f64>) -> impl OriginalSolution + Sync {
    let p = Profile32::with_reference_constant(1.0, &direction).unwrap();
    let n = direction.len() + 1;
    FnSolution::new(n, move |x: &[f64], t: f64| {
        let s = (-t).sqrt();
        let y: Vec<f64> = x.iter().map(|v| v / (2.0 * s)).collect();
        s.powf(1.5) * p.value(&y)
    })
}

fn singular() -> impl OriginalSolution + Sync {
    let h = H2m::reference(1, 2).unwrap();
    FnSolution::new(2, move |x: &[f64], t: f64| {
        let s = (-t).sqrt();
        let y: Vec<f64> = x.iter().map(|v| v / (2.0 * s)).collect();
        s * s * h.value(&y)
    })
}

/// `Re(x_1 + i|x_2|)^p` in polar form; harmonic and time independent.
fn polar(p: f64, x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1].abs());
    let r = a.hypot(b);
    if r == 0.0 || b.atan2(a) == std::f64::consts::PI {
        return 0.0;
    }
    r.powf(p) * (p * b.atan2(a)).cos()
}

fn boundary_1d<U: OriginalSolution + ?Sized>(u: &U) -> BoundaryTimeField {
    BoundaryTimeField::sample(u, vec![Axis::span(-1.0, 1.0, 41).unwrap()], vec![-1.0, -0.5, -0.25])
        .unwrap()
}

#[test]
fn regular_contact_set_is_a_half_line() {
    let u = regular(vec![1.0]);
    let c = extract_contact(&boundary_1d(&u), 1e-12).unwrap();
    let h = 0.05;
    for (i, flag) in c.contact.iter().enumerate() {
        let (x, _) = c.field.point(i);
        assert_eq!(*flag, x[0] <= 1e-12, "x = {}", x[0]);
    }
    let gamma = c.free_boundary_points();
    assert_eq!(gamma.len(), 6);
    assert!(gamma.iter().all(|(x, _)| x[0].abs() <= h + 1e-12));
}

#[test]
fn positive_data_has_no_contact() {
    let u = FnSolution::new(2, |x: &[f64], t: f64| 1.0 + x[0] * x[0] - t);
    let c = extract_contact(&boundary_1d(&u), 1e-12).unwrap();
    assert_eq!(c.contact_count(), 0);
    assert!(c.free_boundary_points().is_empty());
}

#[test]
fn zero_half_ball_boundary_follows_its_edge() {
    let u = FnSolution::new(3, |x: &[f64], _t: f64| (x[0] * x[0] + x[1] * x[1] - 0.25).max(0.0));
    let axes = vec![Axis::span(-1.0, 1.0, 41).unwrap(), Axis::span(-1.0, 1.0, 41).unwrap()];
    let f = BoundaryTimeField::sample(&u, axes, vec![-1.0]).unwrap();
    let c = extract_contact(&f, 1e-12).unwrap();
    for (x, _) in c.free_boundary_points() {
        let r = x[0].hypot(x[1]);
        assert!((r - 0.5).abs() <= 0.05 * 2f64.sqrt() + 1e-12, "r = {r}");
    }
}

fn quad2() -> HQuadrature {
    HQuadrature::new(2, 5.0, 0.05).unwrap()
}

#[test]
fn homogeneous_curves_have_slope_two_kappa() {
    let radii = dyadic_radii(1e-3, 1.0).unwrap();
    let q = quad2();
    let c = compute_h(&regular(vec![1.0]), &Center::origin(2), &radii, &q).unwrap();
    assert!((c.slope - 3.0).abs() < 0.05, "{}", c.slope);
    for (r, v) in c.radii.iter().zip(&c.values) {
        assert!((v / c.values[0] - r.powi(3)).abs() <= 1e-2 * r.powi(3));
    }
    assert_eq!(classify_kappa(c.kappa_fit, 0.2), Classification::Regular);
    let c = compute_h(&singular(), &Center::origin(2), &radii, &q).unwrap();
    assert!((c.slope - 4.0).abs() < 0.04, "{}", c.slope);
    assert_eq!(classify_kappa(c.kappa_fit, 0.2), Classification::Singular { m: 1 });
}

#[test]
fn doubling_the_data_quadruples_the_curve() {
    let radii = dyadic_radii(1e-2, 1.0).unwrap();
    let q = HQuadrature::new(2, 4.0, 0.1).unwrap();
    let u = regular(vec![1.0]);
    let v = FnSolution::new(2, |x: &[f64], t: f64| 2.0 * u.eval(x, t).unwrap());
    let a = compute_h(&u, &Center::origin(2), &radii, &q).unwrap();
    let b = compute_h(&v, &Center::origin(2), &radii, &q).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((y - 4.0 * x).abs() <= 1e-12 * y);
    }
    assert!((a.slope - b.slope).abs() < 1e-12);
}

#[test]
fn radius_beyond_the_data_is_an_error() {
    let u = FnSolution::new(2, |x: &[f64], t: f64| if t >= -1.0 { x[0] } else { f64::NAN });
    let limited = LimitedTime(u);
    let r = compute_h(&limited, &Center::origin(2), &[2.0, 0.5], &quad2());
    assert!(matches!(r, Err(FbError::RadiusOutOfRange { r }) if r == 2.0));
}

struct LimitedTime<U>(U);

impl<U: OriginalSolution> OriginalSolution for LimitedTime<U> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval(&self, x: &[f64], t: f64) -> Option<f64> {
        (t >= -1.0).then(|| self.0.eval(x, t)).flatten()
    }
}

fn setup(family: &SampledProfiles) -> BlowupSetup<'_> {
    BlowupSetup {
        kappa: 1.5,
        family,
        probe: 0.05,
        threshold: 1e-12,
        tol: 1e-3,
    }
}

#[test]
fn exact_data_blows_up_to_itself() {
    let g = make_grid(2, 5.0, 0.1).unwrap();
    let family = SampledProfiles::reference(&g).unwrap();
    let u = regular(vec![-1.0]);
    let r = blowup(&u, &Center::origin(2), &[1.0, 0.5, 0.25, 0.125], &setup(&family)).unwrap();
    assert!(r.stabilized);
    for e in &r.entries {
        assert!((e.c - r.limit.c).abs() < 1e-12);
        assert!((e.angle - std::f64::consts::PI).abs() < 1e-12);
        assert!(e.distance < 1e-10);
    }
    assert!((r.limit.c - 1.0).abs() < 1e-2);
}

#[test]
fn perturbed_data_stabilize_with_a_positive_rate() {
    let g = make_grid(2, 5.0, 0.1).unwrap();
    let family = SampledProfiles::reference(&g).unwrap();
    let base = regular(vec![1.0]);
    let c = goldens::profile_constant(2).unwrap();
    let u = FnSolution::new(2, move |x: &[f64], t: f64| {
        base.eval(x, t).unwrap() + 0.3 * c * polar(3.5, x)
    });
    let lambdas: Vec<f64> = (0..7).map(|k| 0.5f64.powi(k)).collect();
    let r = blowup(&u, &Center::origin(2), &lambdas, &setup(&family)).unwrap();
    assert!(r.stabilized, "{}", r.final_change);
    let rate = r.rate_exponent.unwrap();
    assert!(rate > 1.0, "{rate}");
    assert!(r.entries.windows(2).all(|w| w[1].distance < w[0].distance));
}

#[test]
fn blowup_off_the_free_boundary_is_rejected() {
    let g = make_grid(2, 4.0, 0.2).unwrap();
    let family = SampledProfiles::reference(&g).unwrap();
    let u = regular(vec![1.0]);
    for x0 in [0.5, -0.5] {
        let center = Center { x: vec![x0, 0.0], t: 0.0 };
        let r = blowup(&u, &center, &[1.0, 0.5], &setup(&family));
        assert!(matches!(r, Err(FbError::OffFreeBoundary { .. })));
    }
}

fn slab_3d<U: OriginalSolution + ?Sized>(u: &U) -> BoundaryTimeField {
    let axes = vec![Axis::span(-1.0, 1.0, 41).unwrap(), Axis::span(-1.0, 1.0, 41).unwrap()];
    BoundaryTimeField::sample(u, axes, vec![-1.0, -0.75, -0.5]).unwrap()
}

const WINDOW: GraphWindow = GraphWindow {
    x1: [-0.5, 0.5],
    t: [-1.0, -0.5],
};

#[test]
fn straight_free_boundary_is_a_flat_graph() {
    let c = extract_contact(&slab_3d(&regular(vec![0.0, 1.0])), 1e-12).unwrap();
    let r = reconstruct_graph(&c, WINDOW).unwrap();
    assert!(r.samples.iter().all(|s| s.g.abs() < 1e-12 && s.dg.abs() < 1e-10));
    assert_eq!(r.theta_hat, 1.0);
}

#[test]
fn tilted_free_boundary_recovers_the_angle() {
    let h = 0.05;
    for phi in [0.2f64, -0.4, 0.6] {
        let e = vec![-phi.sin(), phi.cos()];
        let c = extract_contact(&slab_3d(&regular(e)), 1e-12).unwrap();
        let r = reconstruct_graph(&c, WINDOW).unwrap();
        let angle = r.mean_slope.atan();
        // One cell of arc on the window's half-width.
        assert!((angle - phi).abs() <= h / 0.5, "phi = {phi}: {angle}");
        assert!((angle - phi).abs() < 1e-6, "phi = {phi}: {angle}");
    }
}

#[test]
fn double_crossings_are_reported() {
    let u = FnSolution::new(3, |x: &[f64], _t: f64| (x[1] * x[1] - 0.09).max(0.0));
    let c = extract_contact(&slab_3d(&u), 1e-12).unwrap();
    let r = reconstruct_graph(&c, WINDOW);
    assert!(matches!(r, Err(FbError::NonGraphical(cols)) if cols.len() == 21 * 3));
}

fn sample_at(center: Center, c: f64, direction: Vec<f64>) -> FreeBoundarySample {
    FreeBoundarySample {
        center,
        curve: HCurve::from_values(vec![0.1, 1.0], vec![1e-3, 1.0]).unwrap(),
        classification: Classification::Regular,
        blowup: Some(BlowupParams { c, direction }),
    }
}

#[test]
fn blowups_along_a_straight_free_boundary_are_constant() {
    let g = make_grid(3, 3.0, 0.2).unwrap();
    let family = SampledProfiles::reference(&g).unwrap();
    let u = regular(vec![1.0, 0.0]);
    let mut samples = Vec::new();
    for (x2, t) in [(0.0, 0.0), (0.3, -0.1), (-0.2, -0.05)] {
        let center = Center { x: vec![0.0, x2, 0.0], t };
        let r = blowup(&u, &center, &[0.5, 0.25], &setup(&family)).unwrap();
        samples.push(sample_at(center, r.limit.c, r.limit.direction));
    }
    let rows = holder_maps(&samples, &[0.5, 1.0]).unwrap();
    for r in rows {
        assert!(r.c_quotient < 1e-6 && r.e_quotient < 1e-6, "{r:?}");
    }
    assert!(matches!(
        holder_maps(&samples[..1], &[0.5]),
        Err(FbError::TooFewSamples { needed: 2, got: 1 })
    ));
}

#[test]
fn eigen_trajectories_follow_the_closed_form() {
    let g = make_grid(2, 6.0, 0.1).unwrap();
    let cfg = GapConfig {
        m: 1,
        epsilons: vec![0.3, 0.5],
        dtau: 0.01,
        tau_max: 1.0,
        c0: 0.2,
        scan: log_grid(1e-12, 1e-3, 19),
    };
    let t = frequency_gap_experiment(&g, &cfg).unwrap();
    assert_eq!(t.rows.len(), 4);
    for r in &t.rows {
        assert!(r.max_rel_error < 1e-2, "{r:?}");
    }
    assert_eq!(t.rows.iter().filter(|r| r.exact_eigenvector).count(), 1);
    assert_eq!(t.excluded_up_to, cfg.scan.last().copied());
    assert!(frequency_gap_experiment(&g, &GapConfig { epsilons: vec![1.5], ..cfg }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn classification_ignores_scale(alpha in 0.01f64..100.0) {
        let radii = dyadic_radii(1e-2, 1.0).unwrap();
        let q = HQuadrature::new(2, 4.0, 0.2).unwrap();
        let u = regular(vec![1.0]);
        let v = FnSolution::new(2, |x: &[f64], t: f64| alpha * u.eval(x, t).unwrap());
        let a = compute_h(&u, &Center::origin(2), &radii, &q).unwrap();
        let b = compute_h(&v, &Center::origin(2), &radii, &q).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        prop_assert_eq!(classify_kappa(a.kappa_fit, 0.2), classify_kappa(b.kappa_fit, 0.2));
    }

    #[test]
    fn curves_commute_with_translations(x0 in -1.0f64..1.0, t0 in -1.0f64..0.0) {
        let radii = [0.5, 0.25];
        let q = HQuadrature::new(2, 4.0, 0.2).unwrap();
        let u = singular();
        let moved = FnSolution::new(2, |x: &[f64], t: f64| u.eval(&[x[0] - x0, x[1]], t - t0).unwrap_or(0.0));
        let a = compute_h(&u, &Center::origin(2), &radii, &q).unwrap();
        let b = compute_h(&moved, &Center { x: vec![x0, 0.0], t: t0 }, &radii, &q).unwrap();
        for (p, r) in a.values.iter().zip(&b.values) {
            prop_assert!((p - r).abs() <= 1e-12 * p.abs());
        }
    }
}
