use ou_spectrum::{
    assemble, correlation, refinement_study, residual_check_3d, solve_lowest, verify_eigenspace,
    SpectrumError, Symmetry,
};

const RZ: f64 = 2.2;

#[test]
fn pencil_is_symmetric_with_positive_mass() {
    let p = assemble(RZ, 12, Symmetry::Reduced).unwrap();
    let a = p.stiffness().to_dense();
    assert!((&a - a.transpose()).amax() == 0.0);
    assert!(p.mass().iter().all(|m| *m > 0.0));
    // Dirichlet rows: no unknown sits on z_1 = 0.
    assert!(p.points().iter().all(|(z1, _)| *z1 > 0.0));
}

#[test]
fn two_lowest_eigenvalues_and_gap() {
    let t = refinement_study(RZ, &[20, 40, 80], 3).unwrap();
    let [l1, l2, l3] = [t.extrapolated[0], t.extrapolated[1], t.extrapolated[2]];
    assert!((l1 - 0.5).abs() <= 0.005 * 0.5, "{l1}");
    assert!((l2 - 1.5).abs() <= 0.005 * 1.5, "{l2}");
    assert!(((l2 - l1) - 1.0).abs() <= 0.01);
    assert!(l3 > 1.45);
    for row in &t.rows {
        assert!(row.values.windows(2).all(|w| w[1] >= w[0]));
        assert!(!row.values.iter().any(|v| *v > 0.55 && *v < 1.45));
    }
    // Errors shrink at least at second order.
    for p in &t.observed_order.unwrap()[..2] {
        assert!(*p > 1.8, "{p}");
    }
}

#[test]
fn eigenvectors_match_the_pullbacks() {
    let p = assemble(RZ, 40, Symmetry::Reduced).unwrap();
    let s = solve_lowest(&p, 3).unwrap();
    let r = verify_eigenspace(&p, &s, 0.05).unwrap();
    assert!(r.ground_correlation >= 0.999);
    assert!(r.second_correlation >= 0.999);
    assert!(r.captured >= 0.998);
    assert!(r.orthogonality <= 1e-8);
    assert!(r.residuals.iter().all(|v| *v < 1e-8));
    assert!(r.expansion_b < 0.0);
}

#[test]
fn reflection_reduction_is_consistent() {
    let full = solve_lowest(&assemble(RZ, 16, Symmetry::Full).unwrap(), 3).unwrap();
    let red = solve_lowest(&assemble(RZ, 16, Symmetry::Reduced).unwrap(), 3).unwrap();
    for (a, b) in full.values.iter().zip(&red.values) {
        assert!((a - b).abs() < 1e-9 * b, "{a} vs {b}");
    }
    let p = assemble(RZ, 16, Symmetry::Full).unwrap();
    let field = p.to_field(&full.vectors[0]).unwrap();
    assert_eq!(field.grid().dim(), 2);
    let ground = p.sample(|a, _| a);
    assert!(correlation(&p, &full.vectors[0], &ground).abs() > 0.999);
}

#[test]
fn clustered_eigenvalues_are_rejected() {
    let p = assemble(RZ, 16, Symmetry::Reduced).unwrap();
    let s = solve_lowest(&p, 3).unwrap();
    assert!(matches!(verify_eigenspace(&p, &s, 2.0), Err(SpectrumError::Degenerate(..))));
    assert!(assemble(RZ, 2, Symmetry::Reduced).is_err());
    assert!(refinement_study(RZ, &[10, 30], 2).is_err());
}

#[test]
fn three_dimensional_members_solve_the_strong_equation() {
    let coarse = residual_check_3d(0.05, 1.0, 0.2);
    let fine = residual_check_3d(0.025, 1.0, 0.2);
    assert!(fine.profile < 1e-3 && fine.tilted < 1e-2, "{fine:?}");
    assert!(coarse.profile / fine.profile > 3.5);
    assert!(coarse.tilted / fine.tilted > 3.5);
}
