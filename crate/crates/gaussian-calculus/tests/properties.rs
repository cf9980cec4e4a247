use gaussian_calculus::{
    dirichlet_form, gradient_fd, inner_mu, laplacian_fd, make_grid, GaussianMeasure,
    WeightedField,
};
use proptest::prelude::*;

fn small_grid() -> gaussian_calculus::HalfSpaceGrid {
    make_grid(2, 2.0, 0.25).unwrap()
}

proptest! {
    #[test]
    fn inner_product_is_symmetric_and_positive(
        a in prop::collection::vec(-1.0f64..1.0, 17 * 9),
        b in prop::collection::vec(-1.0f64..1.0, 17 * 9),
    ) {
        let g = small_grid();
        let m = GaussianMeasure::conformal(&g);
        let fa = WeightedField::new(g.clone(), a, 0.0).unwrap();
        let fb = WeightedField::new(g.clone(), b, 0.0).unwrap();
        let ab = inner_mu(&fa, &fb, &m).unwrap();
        let ba = inner_mu(&fb, &fa, &m).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-14 * (1.0 + ab.abs()));
        let aa = inner_mu(&fa, &fa, &m).unwrap();
        let nonzero = fa.values().iter().any(|v| *v != 0.0);
        prop_assert!(aa >= 0.0);
        if nonzero {
            prop_assert!(aa > 0.0);
        }
        prop_assert!(dirichlet_form(&fa, &fa, &m).unwrap() >= 0.0);
    }

    #[test]
    fn stencils_are_exact_on_quadratics(
        c in prop::collection::vec(-2.0f64..2.0, 6),
    ) {
        let g = small_grid();
        let q = |y: &[f64]| c[0] + c[1] * y[0] + c[2] * y[1]
            + c[3] * y[0] * y[0] + c[4] * y[0] * y[1] + c[5] * y[1] * y[1];
        let f = WeightedField::from_fn(&g, q);
        let grad = gradient_fd(&f).unwrap();
        let lap = laplacian_fd(&f).unwrap();
        for i in 0..g.len() {
            let y = g.coord(i);
            let gx = c[1] + 2.0 * c[3] * y[0] + c[4] * y[1];
            let gy = c[2] + c[4] * y[0] + 2.0 * c[5] * y[1];
            prop_assert!((grad[0].values()[i] - gx).abs() < 1e-9);
            prop_assert!((grad[1].values()[i] - gy).abs() < 1e-9);
            prop_assert!((lap.values()[i] - 2.0 * (c[3] + c[5])).abs() < 1e-8);
        }
    }
}

#[test]
fn tail_error_shrinks_with_radius() {
    // At fixed spacing the truncation error of the Gaussian mass decays like
    // e^{-R^2}.
    let exact = std::f64::consts::FRAC_PI_2;
    let mut errs = Vec::new();
    for r in [1.0, 2.0, 3.0] {
        let g = make_grid(2, r, 0.02).unwrap();
        let m = GaussianMeasure::conformal(&g);
        errs.push((m.total_mass() - exact).abs());
    }
    assert!(errs[0] > 10.0 * errs[1]);
    assert!(errs[1] > 10.0 * errs[2]);
}
