use proptest::prelude::*;
use radial_spectra::modes::{assemble_full_spectrum, sphere_multiplicity, DEFAULT_MERGE_TOL};
use radial_spectra::solver::{
    count_below, r_max_sensitivity, refine_and_estimate_order, solve_modes, ConvergenceQuantity,
};
use radial_spectra::{assemble, build_grid, build_mode_problem, solve_eigen, BoundaryCondition, OperatorKind};

const LADDER: [usize; 4] = [300, 600, 1200, 2400];

fn default_grid() -> radial_spectra::RadialGrid {
    build_grid(12.0, 2400).unwrap()
}

fn eigenvalues(op: OperatorKind, m: u32, k: u32, count: usize) -> Vec<f64> {
    let p = build_mode_problem(op, m, k, default_grid(), None).unwrap();
    solve_eigen(&assemble(&p), count).unwrap().eigenvalues
}

#[test]
fn drifted_examples() {
    let v = eigenvalues(OperatorKind::Drifted, 3, 0, 4);
    for (n, l) in v.iter().enumerate() {
        assert!((l - n as f64).abs() < 1e-3, "{v:?}");
    }
    assert!((eigenvalues(OperatorKind::Drifted, 3, 1, 1)[0] - 0.5).abs() < 1e-3);
    assert!((eigenvalues(OperatorKind::Drifted, 4, 2, 1)[0] - 1.0).abs() < 1e-3);
}

#[test]
fn residuals_recorded_and_small() {
    for op in [OperatorKind::Drifted, OperatorKind::Quasi] {
        for k in [0, 1, 4] {
            let p = build_mode_problem(op, 3, k, default_grid(), None).unwrap();
            let s = solve_eigen(&assemble(&p), 5).unwrap();
            assert_eq!(s.residuals.len(), 5);
            assert!(
                s.residuals.iter().all(|r| *r <= 1e-8),
                "{op:?} k={k}: {:?}",
                s.residuals
            );
        }
    }
}

#[test]
fn eigenvalues_nonnegative_and_monotone_in_k() {
    for op in [OperatorKind::Drifted, OperatorKind::Quasi] {
        for m in [3, 4] {
            let solved = solve_modes(op, m, 0..=6, &build_grid(12.0, 1200).unwrap(), None, 3).unwrap();
            for s in &solved {
                assert!(s.eigenvalues.iter().all(|l| *l >= -1e-10));
            }
            for w in solved.windows(2) {
                for n in 0..3 {
                    assert!(w[1].eigenvalues[n] >= w[0].eigenvalues[n] - 1e-10, "{op:?} m={m} n={n}");
                }
            }
        }
    }
}

#[test]
fn eigenfunctions_are_mass_orthonormal_with_fixed_sign() {
    let p = build_mode_problem(OperatorKind::Quasi, 3, 1, default_grid(), None).unwrap();
    let op = assemble(&p);
    let s = solve_eigen(&op, 4).unwrap();
    for (i, f) in s.eigenfunctions.iter().enumerate() {
        assert!(f.values()[0] >= 0.0);
        for (j, g) in s.eigenfunctions.iter().enumerate() {
            let ip: f64 = f
                .values()
                .iter()
                .zip(g.values())
                .zip(&op.mass)
                .map(|((a, b), m)| a * b * m)
                .sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((ip - expected).abs() < 1e-9, "({i},{j}): {ip}");
        }
    }
}

#[test]
fn drifted_multiplicities_are_multi_index_counts() {
    let grid = default_grid();
    let solved = solve_modes(OperatorKind::Drifted, 3, 0..=6, &grid, None, 4).unwrap();
    let per_mode: Vec<(u32, Vec<f64>)> = solved.iter().map(|s| (s.problem.k, s.eigenvalues.clone())).collect();
    let levels = assemble_full_spectrum(3, &per_mode, DEFAULT_MERGE_TOL).unwrap();
    for n in 0..=6u64 {
        let level = &levels[n as usize];
        assert!((level.eigenvalue - n as f64 / 2.0).abs() < 1e-3);
        assert_eq!(level.multiplicity, (n + 1) * (n + 2) / 2, "λ = {}", n as f64 / 2.0);
    }
}

#[test]
fn truncated_mode_list_undercounts() {
    // Without k = 3 the level 3/2 only collects k = 1, n = 1.
    let per_mode: Vec<(u32, Vec<f64>)> = (0..=2)
        .map(|k| (k, (0..4).map(|n| (k + 2 * n) as f64 / 2.0).collect()))
        .collect();
    let levels = assemble_full_spectrum(3, &per_mode, DEFAULT_MERGE_TOL).unwrap();
    let mults: Vec<u64> = levels.iter().take(4).map(|l| l.multiplicity).collect();
    assert_eq!(mults, vec![1, 3, 6, 3]);
    assert_eq!(sphere_multiplicity(3, 3), 7);
}

#[test]
fn quasi_levels_are_isolated() {
    let solved = solve_modes(OperatorKind::Quasi, 3, 0..=8, &default_grid(), None, 4).unwrap();
    let per_mode: Vec<(u32, Vec<f64>)> = solved.iter().map(|s| (s.problem.k, s.eigenvalues.clone())).collect();
    let levels = assemble_full_spectrum(3, &per_mode, DEFAULT_MERGE_TOL).unwrap();
    for w in levels.windows(2) {
        let gap = w[1].eigenvalue - w[0].eigenvalue;
        assert!(
            gap > 10.0 * DEFAULT_MERGE_TOL * (1.0 + w[1].eigenvalue),
            "{} vs {}",
            w[0].eigenvalue,
            w[1].eigenvalue
        );
    }
}

#[test]
fn quasi_counts_stabilize_under_refinement() {
    let count = |n: usize| -> usize {
        (0..=8)
            .map(|k| {
                let p = build_mode_problem(OperatorKind::Quasi, 3, k, build_grid(12.0, n).unwrap(), None).unwrap();
                count_below(&assemble(&p), 10.0).unwrap()
            })
            .sum()
    };
    let c = count(600);
    assert_eq!(c, count(1200));
    assert_eq!(c, count(2400));
}

#[test]
fn quasi_dirichlet_constant_mode_is_nearly_free() {
    // Constants cost only the flux e^{-r_max²/4} through the outer face, so
    // the lowest k = 0 eigenvalue sits far below 2(m-2)/m's reciprocal.
    for m in [3, 4] {
        let l = eigenvalues(OperatorKind::Quasi, m, 0, 1)[0];
        assert!(l.abs() < 1e-9, "m={m}: {l}");
    }
    let p = build_mode_problem(OperatorKind::Quasi, 3, 0, default_grid(), None).unwrap();
    let sens = r_max_sensitivity(&p, &[4.0, 6.0, 8.0, 10.0], 1).unwrap();
    for w in sens.windows(2) {
        assert!(w[1].1[0] < 0.05 * w[0].1[0]);
    }
}

#[test]
fn quasi_excited_levels_clear_the_gap() {
    assert!(eigenvalues(OperatorKind::Quasi, 3, 0, 2)[1] > 1.45);
    for k in 1..=8 {
        assert!(eigenvalues(OperatorKind::Quasi, 3, k, 1)[0] > 1.45);
        assert!(eigenvalues(OperatorKind::Quasi, 4, k, 1)[0] > 0.95);
    }
}

#[test]
fn second_order_for_modes_with_potential() {
    for (k, j, exact) in [(1, 1, 1.5), (2, 1, 2.0), (3, 0, 1.5)] {
        let p = build_mode_problem(OperatorKind::Drifted, 3, k, default_grid(), None).unwrap();
        let r = refine_and_estimate_order(&p, ConvergenceQuantity::Eigenvalue(j), &LADDER).unwrap();
        let order = r.order.unwrap();
        assert!((1.8..=2.2).contains(&order), "k={k}: {order}");
        assert!((r.limit.unwrap() - exact).abs() < 1e-4);
    }
}

#[test]
fn radial_ground_excitation_superconverges() {
    // Without the r^{-2} term the k = 0 scheme is fourth order.
    let p = build_mode_problem(OperatorKind::Drifted, 3, 0, default_grid(), None).unwrap();
    let r = refine_and_estimate_order(&p, ConvergenceQuantity::Eigenvalue(1), &LADDER).unwrap();
    assert!(r.order.unwrap() > 3.5);
    assert!((r.limit.unwrap() - 1.0).abs() < 1e-4);
}

#[test]
fn quasi_self_convergence() {
    let p = build_mode_problem(OperatorKind::Quasi, 3, 0, default_grid(), None).unwrap();
    let r = refine_and_estimate_order(&p, ConvergenceQuantity::Eigenvalue(1), &LADDER).unwrap();
    assert!((1.8..=2.2).contains(&r.order.unwrap()));
    let diffs: Vec<f64> = r.levels.windows(2).map(|w| (w[1].value - w[0].value).abs()).collect();
    assert!(diffs.windows(2).all(|d| d[1] < d[0]));
}

#[test]
fn exact_zero_mode_has_undefined_order() {
    let p = build_mode_problem(OperatorKind::Drifted, 3, 0, default_grid(), None).unwrap();
    let r = refine_and_estimate_order(&p, ConvergenceQuantity::Eigenvalue(0), &LADDER).unwrap();
    assert!(r.order_undefined && r.order.is_none());
}

#[test]
fn short_ladder_rejected() {
    let p = build_mode_problem(OperatorKind::Drifted, 3, 0, default_grid(), None).unwrap();
    assert!(refine_and_estimate_order(&p, ConvergenceQuantity::Eigenvalue(0), &[300, 600]).is_err());
}

#[test]
fn natural_and_dirichlet_agree_for_drifted_low_modes() {
    let p = build_mode_problem(
        OperatorKind::Drifted,
        3,
        1,
        default_grid(),
        Some(BoundaryCondition::Dirichlet),
    )
    .unwrap();
    let d = solve_eigen(&assemble(&p), 3).unwrap().eigenvalues;
    let n = eigenvalues(OperatorKind::Drifted, 3, 1, 3);
    for (a, b) in d.iter().zip(&n) {
        assert!((a - b).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stiffness_is_self_adjoint(
        x in prop::collection::vec(-1.0f64..1.0, 40),
        y in prop::collection::vec(-1.0f64..1.0, 40),
        k in 0u32..5,
        m in 3u32..6,
        quasi in any::<bool>(),
    ) {
        let op = if quasi { OperatorKind::Quasi } else { OperatorKind::Drifted };
        let p = build_mode_problem(op, m, k, build_grid(8.0, 40).unwrap(), None).unwrap();
        let d = assemble(&p);
        let kx = d.apply_stiffness(&x);
        let ky = d.apply_stiffness(&y);
        let a: f64 = kx.iter().zip(&y).map(|(u, v)| u * v).sum();
        let b: f64 = x.iter().zip(&ky).map(|(u, v)| u * v).sum();
        let scale: f64 = d.diag.iter().map(|v| v.abs()).sum();
        prop_assert!((a - b).abs() <= 1e-13 * scale);
    }

    #[test]
    fn sturm_count_matches_solved_spectrum(k in 0u32..4, threshold in 0.1f64..6.0) {
        let p = build_mode_problem(OperatorKind::Drifted, 3, k, build_grid(12.0, 300).unwrap(), None).unwrap();
        let d = assemble(&p);
        let c = count_below(&d, threshold).unwrap();
        let s = solve_eigen(&d, c + 1).unwrap();
        prop_assert!(s.eigenvalues[..c].iter().all(|l| *l < threshold));
        prop_assert!(s.eigenvalues[c] >= threshold);
    }
}
