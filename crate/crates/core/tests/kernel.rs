use backstep2d::{
    boundary_identity_residuals, build_kernel_table, eval_kernel, kernel_pde_residual,
    solve_kernel_goursat, table_difference, Error, KernelTable,
};
use proptest::prelude::*;

#[test]
fn diagonal_value_is_minus_half_lambda_y() {
    let k = eval_kernel(1.0, 0.8, 0.8).unwrap();
    assert!((k + 0.4).abs() <= 1e-15, "{k}");
}

#[test]
fn zero_lambda_kernel_is_zero() {
    assert_eq!(eval_kernel(0.0, 0.7, 0.3).unwrap(), 0.0);
}

#[test]
fn frozen_point_oracles() {
    // independently computed from the Bessel closed form:
    // K(y,xi) = -lambda*xi*I1(s)/s, s = sqrt(lambda(y^2-xi^2)), J1 branch for
    // negative argument
    let k = eval_kernel(1.0, 1.0, 0.5).unwrap();
    assert!((k - (-0.2741814739287134)).abs() <= 1e-12, "{k}");
    let k = eval_kernel(-4.0, 1.0, 0.5).unwrap();
    assert!((k - 0.6690524775952447).abs() <= 1e-12, "{k}");
}

#[test]
fn domain_errors() {
    for (y, xi) in [(0.5, 0.6), (1.2, 0.5), (0.5, -0.1), (f64::NAN, 0.2)] {
        assert!(matches!(
            eval_kernel(1.0, y, xi),
            Err(Error::OutsideTriangle { .. })
        ));
    }
}

#[test]
fn sign_continuity_across_lambda_zero() {
    for eps in [1e-6, -1e-6] {
        let k = eval_kernel(eps, 0.7, 0.4).unwrap();
        assert!(k.abs() <= 1e-6, "{k}");
    }
}

#[test]
fn boundary_identities_over_lambda_sweep() {
    for lambda in [-5.0, -1.0, 0.0, 1.0, 10.0, 30.0] {
        let t = build_kernel_table(lambda, 101).unwrap();
        let (diag, edge) = boundary_identity_residuals(&t);
        assert!(diag <= 1e-12, "lambda={lambda}: diag {diag}");
        assert!(edge <= 1e-12, "lambda={lambda}: edge {edge}");
    }
}

#[test]
fn zero_lambda_table_is_exactly_zero() {
    let t = build_kernel_table(0.0, 50).unwrap();
    for j in 0..50 {
        for k in 0..=j {
            assert_eq!(t.get(j, k), 0.0);
        }
    }
}

#[test]
fn table_too_small() {
    assert!(matches!(
        build_kernel_table(1.0, 1),
        Err(Error::GridTooCoarse { .. })
    ));
    assert!(matches!(
        solve_kernel_goursat(1.0, 16),
        Err(Error::GridTooCoarse { .. })
    ));
}

#[test]
fn series_term_at_cap_is_negligible() {
    // |z| <= 200 for the configured |lambda| cap; at the 60-term cap the
    // factorial-squared denominator has crushed the term far below the sum
    for z in [200.0f64, -200.0] {
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for m in 1..60 {
            let m = m as f64;
            term *= z / (4.0 * m * (m + 1.0));
            sum += term;
        }
        assert!(term.abs() < 1e-30 * sum.abs(), "z={z}: {term} vs {sum}");
    }
}

#[test]
fn goursat_zero_lambda_is_exactly_zero() {
    let t = solve_kernel_goursat(0.0, 33).unwrap();
    for j in 0..33 {
        for k in 0..=j {
            assert_eq!(t.get(j, k), 0.0);
        }
    }
}

#[test]
fn goursat_matches_closed_form() {
    let goursat = solve_kernel_goursat(1.0, 101).unwrap();
    let closed = eval_kernel(1.0, 1.0, 0.5).unwrap();
    assert!((goursat.get(100, 50) - closed).abs() <= 1e-3);

    let table = build_kernel_table(-4.0, 101).unwrap();
    let goursat = solve_kernel_goursat(-4.0, 101).unwrap();
    let diff = table_difference(&table, &goursat).unwrap();
    assert!(diff <= 5e-6, "{diff}");
}

#[test]
fn table_difference_requires_same_size() {
    let a = build_kernel_table(1.0, 33).unwrap();
    let b = build_kernel_table(1.0, 34).unwrap();
    assert!(matches!(
        table_difference(&a, &b),
        Err(Error::KernelMismatch(_))
    ));
}

#[test]
fn pde_residual_zero_for_zero_lambda() {
    let t = build_kernel_table(0.0, 33).unwrap();
    assert_eq!(kernel_pde_residual(&t), 0.0);
}

// each probe catches its own kind of corruption: an interior sign flip blows
// up the PDE residual, a diagonal flip blows up the boundary identities
#[test]
fn pde_residual_flags_corrupted_interior_entry() {
    let clean = build_kernel_table(10.0, 101).unwrap();
    let clean_res = kernel_pde_residual(&clean);
    let mut values = clean.values().to_vec();
    values[60 * 61 / 2 + 30] *= -1.0;
    let corrupted = KernelTable::from_raw(10.0, 101, values).unwrap();
    let bad_res = kernel_pde_residual(&corrupted);
    assert!(
        bad_res >= 10.0 * clean_res,
        "clean {clean_res}, corrupted {bad_res}"
    );
}

#[test]
fn boundary_identities_flag_corrupted_diagonal() {
    let clean = build_kernel_table(10.0, 101).unwrap();
    let mut values = clean.values().to_vec();
    for j in 0..101 {
        values[j * (j + 1) / 2 + j] *= -1.0;
    }
    let corrupted = KernelTable::from_raw(10.0, 101, values).unwrap();
    let (diag, edge) = boundary_identity_residuals(&corrupted);
    assert!(diag > 1.0, "diagonal residual {diag}");
    assert!(edge <= 1e-12, "edge identity untouched, got {edge}");
}

#[test]
fn from_raw_validates_length() {
    assert!(KernelTable::from_raw(1.0, 10, vec![0.0; 54]).is_err());
    assert!(KernelTable::from_raw(1.0, 10, vec![0.0; 55]).is_ok());
}

proptest! {
    // continuous dependence on lambda near zero at arbitrary triangle points
    #[test]
    fn small_lambda_small_kernel(y in 0.0f64..=1.0, frac in 0.0f64..=1.0) {
        let xi = y * frac;
        let k = eval_kernel(1e-6, y, xi).unwrap();
        prop_assert!(k.abs() <= 1e-6);
    }

    #[test]
    fn diagonal_identity_everywhere(lambda in -30.0f64..30.0, y in 0.0f64..=1.0) {
        let k = eval_kernel(lambda, y, y).unwrap();
        prop_assert!((k + lambda * y / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn edge_identity_everywhere(lambda in -30.0f64..30.0, y in 0.0f64..=1.0) {
        let k = eval_kernel(lambda, y, 0.0).unwrap();
        prop_assert!(k == 0.0);
    }
}
