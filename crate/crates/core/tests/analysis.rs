use proptest::prelude::*;
use radial_spectra::analysis::{
    check_log_sobolev, check_mode_decay, check_no_interior_extremum, check_poincare, check_uniform_integrability,
    fit_tail, growing_solution, random_family, scaled_tail_ratio, vanish_at_boundary, DecayClass, DecayThresholds,
    GaussianPolynomial, PoincareVariant,
};
use radial_spectra::measure::tail_ratio;
use radial_spectra::solver::solve_modes;
use radial_spectra::{
    assemble, build_grid, build_mode_problem, solve_eigen, Error, OperatorKind, RadialGrid, WeightedFunction,
};

fn grid() -> RadialGrid {
    build_grid(12.0, 1200).unwrap()
}

fn radial(f: impl Fn(f64) -> f64) -> WeightedFunction {
    WeightedFunction::from_fn(&grid(), 0, f).unwrap()
}

#[test]
fn log_sobolev_holds_on_random_family() {
    let mut worst = f64::INFINITY;
    for m in 3..=5 {
        for (i, g) in random_family(u64::from(m), 50).iter().enumerate() {
            let rep = check_log_sobolev(&g.sample(&grid()).unwrap(), m).unwrap();
            assert!(rep.passed, "m={m} #{i} {}: {rep:?}", g.describe());
            if rep.rhs > 0.0 {
                worst = worst.min(rep.margin / rep.rhs);
            }
        }
    }
    assert!(worst > 0.0);
}

#[test]
fn log_sobolev_examples() {
    for f in [|r: f64| 1.0 + 0.1 * r, |r: f64| r] {
        let rep = check_log_sobolev(&radial(f), 3).unwrap();
        assert!(rep.passed && rep.margin > 0.0);
        assert_eq!(rep.constant_used, 4.0 / 3.0);
    }
    let rep = check_log_sobolev(&radial(|_| 0.7), 4).unwrap();
    assert!(rep.lhs.abs() < 1e-10 && rep.margin.abs() < 1e-10 && rep.passed);
}

#[test]
fn log_sobolev_rejects_angular_modes() {
    let f = WeightedFunction::from_fn(&grid(), 1, |r| r).unwrap();
    assert!(matches!(check_log_sobolev(&f, 3), Err(Error::InvalidArgument(_))));
}

#[test]
fn literal_poincare_fails_for_near_constants() {
    // (1 - r²/r_max²) is nearly constant where dV_g lives; its energy is
    // tiny compared with its mass.
    let u = radial(|r| 1.0 - r * r / 144.0);
    let rep = check_poincare(&u, 4, PoincareVariant::Literal).unwrap();
    assert!(!rep.passed);
    assert!(rep.lhs > 100.0 * rep.rhs);
    let rep = check_poincare(&u, 4, PoincareVariant::MeanCentered).unwrap();
    assert!(rep.passed);
}

#[test]
fn literal_poincare_on_concentrated_function() {
    let rep = check_poincare(&radial(|r| (-2.0 * r * r).exp()), 3, PoincareVariant::Literal).unwrap();
    assert!(rep.passed);
}

#[test]
fn quasi_ground_state_is_not_admissible_for_literal_check() {
    // The cell values of the Dirichlet ground state do not reach zero at the
    // outer face to 1e-8 relative.
    let p = build_mode_problem(OperatorKind::Quasi, 3, 0, grid(), None).unwrap();
    let ground = solve_eigen(&assemble(&p), 1).unwrap().eigenfunctions.remove(0);
    assert!(matches!(
        check_poincare(&ground, 3, PoincareVariant::Literal),
        Err(Error::PreconditionViolation(_))
    ));
}

#[test]
fn uniform_integrability_of_constant_one() {
    let rep = check_uniform_integrability(&[radial(|_| 1.0)], 3, &[1.0, 0.1, 0.01, 1e-4]).unwrap();
    assert_eq!(rep.family_size, 1);
    assert_eq!(rep.sup_square, 1.0);
    for l in &rep.levels {
        // for u = 1 the tail integral is the tail measure itself
        assert!((l.epsilon - l.tail_measure).abs() <= 1e-12 * (1.0 + l.tail_measure));
        assert!(l.tail_measure <= l.delta);
    }
    assert!(rep.epsilon_monotone);
}

#[test]
fn uniform_integrability_of_drifted_modes() {
    let family: Vec<_> = solve_modes(OperatorKind::Drifted, 3, [0], &grid(), None, 5)
        .unwrap()
        .remove(0)
        .eigenfunctions;
    let thresholds = [1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-6];
    let rep = check_uniform_integrability(&family, 3, &thresholds).unwrap();
    assert_eq!(rep.family_size, 5);
    assert!(rep.sup_entropy.is_finite());
    assert!(rep.epsilon_monotone);
    let last = rep.levels.last().unwrap();
    assert!(last.epsilon < rep.levels[0].epsilon);
    assert!(last.epsilon <= rep.sup_square * last.delta);
}

#[test]
fn uniform_integrability_needs_members() {
    assert!(matches!(
        check_uniform_integrability(&[], 3, &[0.1]),
        Err(Error::PreconditionViolation(_))
    ));
}

#[test]
fn fit_recovers_growing_solution() {
    let g = grid();
    let lo = 8.0;
    let centers: Vec<f64> = g.centers().iter().copied().filter(|r| *r >= lo).collect();
    let gs = growing_solution(3, lo, &centers);
    let mut values = vec![0.0; g.n_cells() - centers.len()];
    values.extend(gs.iter().map(|x| 2.0 + 3.0 * x));
    let f = WeightedFunction::new(g, values, 0).unwrap();
    let fit = fit_tail(&f, 3, (lo, 12.0)).unwrap();
    assert!((fit.c1 / 3.0 - 1.0).abs() < 1e-10);
    assert!(fit.residual <= 1e-10);
}

#[test]
fn quasi_ground_state_is_flat_in_the_tail() {
    let p = build_mode_problem(OperatorKind::Quasi, 3, 0, grid(), None).unwrap();
    let ground = solve_eigen(&assemble(&p), 1).unwrap().eigenfunctions.remove(0);
    let fit = fit_tail(&ground, 3, (8.0, 12.0)).unwrap();
    assert!(fit.residual <= 0.05);
}

#[test]
fn fit_degenerates_when_growth_is_invisible() {
    // For huge m, G rises by a negligible amount across the window.
    let f = radial(|_| 1.0);
    assert!(matches!(
        fit_tail(&f, 600, (8.0, 12.0)),
        Err(Error::DegenerateWindow(_))
    ));
}

#[test]
fn drifted_polynomial_mode_grows() {
    let modes: Vec<_> = solve_modes(OperatorKind::Drifted, 3, 1..=2, &grid(), None, 1)
        .unwrap()
        .into_iter()
        .map(|s| s.eigenfunctions[0].clone())
        .collect();
    let rep = check_mode_decay(&modes, &[1.0, 4.0, 8.0, 11.0], DecayThresholds::default()).unwrap();
    assert!(rep.iter().all(|d| d.class == DecayClass::Grows));
}

#[test]
fn decaying_modes_vanish() {
    let zero = WeightedFunction::from_fn(&grid(), 1, |_| 0.0).unwrap();
    let rep = check_mode_decay(&[zero], &[1.0, 5.0], DecayThresholds::default()).unwrap();
    assert_eq!(rep[0].class, DecayClass::Vanishes);

    let g = build_grid(16.0, 1600).unwrap();
    let f = WeightedFunction::from_fn(&g, 2, |r| (-r).exp()).unwrap();
    let rep = check_mode_decay(&[f], &[1.0, 5.0, 15.0], DecayThresholds::default()).unwrap();
    assert_eq!(rep[0].class, DecayClass::Vanishes);
}

#[test]
fn mode_decay_needs_angular_mode() {
    assert!(matches!(
        check_mode_decay(&[radial(|_| 1.0)], &[1.0, 2.0], DecayThresholds::default()),
        Err(Error::PreconditionViolation(_))
    ));
}

#[test]
fn monotone_functions_have_no_extremum() {
    let g = grid();
    let f = WeightedFunction::from_fn(&g, 0, |r| (-r).exp()).unwrap();
    let rep = check_no_interior_extremum(&f, &vec![1.0; g.n_cells()]).unwrap();
    assert!(rep.violations.is_empty());
    assert_eq!(rep.inspected, g.n_cells());
}

#[test]
fn drifted_ground_state_respects_maximum_principle() {
    let p = build_mode_problem(OperatorKind::Drifted, 3, 1, grid(), None).unwrap();
    let s = solve_eigen(&assemble(&p), 1).unwrap();
    let lambda = s.eigenvalues[0];
    let potential: Vec<f64> = p.grid.centers().iter().map(|&r| p.potential(lambda, r)).collect();
    let rep = check_no_interior_extremum(&s.eigenfunctions[0], &potential).unwrap();
    assert!(rep.inspected > 0);
    assert!(rep.violations.is_empty());
}

#[test]
fn extremum_scan_checks_lengths() {
    let f = radial(f64::sin);
    assert!(matches!(
        check_no_interior_extremum(&f, &[1.0; 3]),
        Err(Error::IncompatibleOperands(_))
    ));
}

#[test]
fn scaled_tail_ratio_is_cubic_scaling() {
    for m in 3..=6 {
        for r in [10.0, 15.0, 20.0] {
            assert_eq!(scaled_tail_ratio(r, m).unwrap(), r.powi(3) * tail_ratio(r, m).unwrap());
        }
    }
}

fn gaussian_poly() -> impl Strategy<Value = GaussianPolynomial> {
    (0.5f64..1.5, -1.0f64..1.0, -0.5f64..0.5, 0.05f64..1.0).prop_map(|(c0, c1, c2, a)| GaussianPolynomial {
        c0,
        c1,
        c2,
        a,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_centered_poincare_holds(g in gaussian_poly(), m in 3u32..6) {
        let rep = check_poincare(&g.sample(&grid()).unwrap(), m, PoincareVariant::MeanCentered).unwrap();
        prop_assert!(rep.passed, "{}: {:?}", g.describe(), rep);
    }

    #[test]
    fn log_sobolev_is_scale_invariant(g in gaussian_poly(), s in 0.1f64..10.0) {
        let u = g.sample(&grid()).unwrap();
        let su = u.with_values(u.values().iter().map(|x| s * x).collect()).unwrap();
        let a = check_log_sobolev(&u, 3).unwrap();
        let b = check_log_sobolev(&su, 3).unwrap();
        prop_assert!((a.lhs - b.lhs).abs() <= 1e-9 * (1.0 + a.lhs.abs()));
        prop_assert!((a.rhs - b.rhs).abs() <= 1e-9 * (1.0 + a.rhs.abs()));
    }

    #[test]
    fn fit_recovers_affine_combination(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
        let g = grid();
        let lo = 6.0;
        let rs: Vec<f64> = g.centers().iter().map(|r| r.max(lo)).collect();
        let gs = growing_solution(4, lo, &rs);
        let f = WeightedFunction::new(g, gs.iter().map(|x| c0 + c1 * x).collect(), 0).unwrap();
        let fit = fit_tail(&f, 4, (lo, 12.0)).unwrap();
        let scale = c0.abs() + c1.abs() * gs.last().unwrap();
        prop_assert!((fit.c0 - c0).abs() <= 1e-8 * scale);
        prop_assert!((fit.c1 - c1).abs() * gs.last().unwrap() <= 1e-8 * scale);
    }

    #[test]
    fn boundary_cutoff_vanishes_at_outer_face(g in gaussian_poly()) {
        let u = vanish_at_boundary(&g.sample(&grid()).unwrap()).unwrap();
        prop_assert!(check_poincare(&u, 3, PoincareVariant::Literal).is_ok());
    }
}
