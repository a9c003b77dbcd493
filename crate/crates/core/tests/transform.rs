use backstep2d::{
    build_grid, build_kernel_table, closed_loop_target_residuals, forward_transform,
    initial_condition, inverse_transform, l2_norm, piano_default, run, stable_dt,
    target_residual, BoundaryGraph, Error, Field, InitialCondition, NodeClass, SimConfig,
    Snapshot,
};
use proptest::prelude::*;

fn random_field(grid: &backstep2d::Grid, seed: u64) -> Field {
    initial_condition(&InitialCondition::RandomSeeded { seed }, grid)
}

#[test]
fn lambda_zero_transform_is_bitwise_identity() {
    let grid = build_grid(&piano_default(), 41).unwrap();
    let kt = build_kernel_table(0.0, 41).unwrap();
    let v = random_field(&grid, 11);
    let w = forward_transform(&v, &grid, &kt).unwrap();
    assert_eq!(w, v);
    let back = inverse_transform(&w, &grid, &kt).unwrap();
    assert_eq!(back, v);
}

#[test]
fn zero_field_round_trips_to_zero() {
    let grid = build_grid(&piano_default(), 33).unwrap();
    let kt = build_kernel_table(30.0, 33).unwrap();
    let z = Field::zeros(&grid);
    let w = forward_transform(&z, &grid, &kt).unwrap();
    assert!(w.values().iter().all(|&x| x == 0.0));
    let v = inverse_transform(&z, &grid, &kt).unwrap();
    assert!(v.values().iter().all(|&x| x == 0.0));
}

#[test]
fn round_trip_recovers_twenty_seeded_fields() {
    let grid = build_grid(&piano_default(), 81).unwrap();
    let kt = build_kernel_table(30.0, 81).unwrap();
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = 0.0f64;
    for seed in 0..20 {
        let v = random_field(&grid, seed);
        let w = forward_transform(&v, &grid, &kt).unwrap();
        let back = inverse_transform(&w, &grid, &kt).unwrap();
        let err = back
            .values()
            .iter()
            .zip(v.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(
            err <= 1e-10 * v.max_abs(),
            "seed {seed}: round-trip error {err:.3e} exceeds 1e-10 * {:.3e}",
            v.max_abs()
        );
        let ratio = l2_norm(&w, &grid) / l2_norm(&v, &grid);
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
    }
    // the transform and its inverse are bounded maps, so the w and v norms
    // stay within fixed constants of each other
    assert!(ratio_min > 0.0 && ratio_max.is_finite());
    println!("norm equivalence over 20 fields: c = {ratio_min:.4}, C = {ratio_max:.4}");
}

#[test]
fn closed_loop_w_vanishes_at_controlled_nodes() {
    let n = 41;
    let lambda = 20.0;
    let grid = build_grid(&piano_default(), n).unwrap();
    let cfg = SimConfig {
        lambda,
        n,
        dt: stable_dt(lambda, grid.h()),
        t_final: 0.05,
        control_enabled: true,
        initial_condition: InitialCondition::Bump,
        snapshot_every: 50,
    };
    let out = run(&piano_default(), &cfg).unwrap();
    let kt = build_kernel_table(lambda, n).unwrap();
    assert!(out.snapshots.len() > 3);
    for snap in &out.snapshots[1..] {
        let w = forward_transform(&snap.field, &grid, &kt).unwrap();
        let vmax = snap.field.max_abs();
        assert!(vmax > 0.0);
        let mut wall = 0.0f64;
        for i in 0..n {
            for j in 0..=grid.j_top(i) {
                if grid.class(i, j) == NodeClass::Controlled {
                    wall = wall.max(w.get(i, j).abs());
                }
            }
        }
        assert!(
            wall <= 0.05 * vmax,
            "t = {}: |w| = {wall:.3e} at controlled nodes vs vmax = {vmax:.3e}",
            snap.t
        );
    }
}

fn windowed_residuals(lambda: f64, n: usize, control: bool) -> backstep2d::TargetResiduals {
    let grid = build_grid(&piano_default(), n).unwrap();
    let dt = stable_dt(lambda, grid.h());
    let stride = (5e-4 / dt).round().max(1.0) as usize;
    let cfg = SimConfig {
        lambda,
        n,
        dt,
        t_final: (stride as f64 * 30.0) * dt * 1.001,
        control_enabled: control,
        initial_condition: InitialCondition::Bump,
        snapshot_every: stride,
    };
    let out = run(&piano_default(), &cfg).unwrap();
    let kt = build_kernel_table(lambda, n).unwrap();
    target_residual(&out.snapshots[1..21], &grid, &kt).unwrap()
}

// without feedback the transformed state has no reason to satisfy the target
// boundary condition, and refining the grid does not repair it
#[test]
fn open_loop_boundary_residual_is_large_and_does_not_refine() {
    let open_coarse = windowed_residuals(20.0, 21, false);
    let open_fine = windowed_residuals(20.0, 41, false);
    let closed_fine = windowed_residuals(20.0, 41, true);
    assert!(
        closed_fine.boundary <= open_fine.boundary / 10.0,
        "closed {:.3e} vs open {:.3e}",
        closed_fine.boundary,
        open_fine.boundary
    );
    let ratio = open_coarse.boundary / open_fine.boundary;
    assert!(
        ratio < 2.0,
        "open-loop boundary residual pretended to converge: ratio {ratio:.3}"
    );
}

#[test]
fn lambda_zero_closed_loop_boundary_residual_is_exactly_zero() {
    let res = closed_loop_target_residuals(&piano_default(), 0.0, 21).unwrap();
    assert_eq!(res.boundary, 0.0);
    assert!(res.interior.is_finite());
}

#[test]
fn inverse_detects_singular_diagonal() {
    // 1 - 0.5 h K(y_j, y_j) = 1 + lambda h y_j / 4 crosses zero at the top
    // row of a unit-height column when lambda h = -4
    let graph = BoundaryGraph::constant(1.0).unwrap();
    let grid = build_grid(&graph, 41).unwrap();
    let kt = build_kernel_table(-160.0, 41).unwrap();
    let w = Field::zeros(&grid);
    match inverse_transform(&w, &grid, &kt) {
        Err(Error::SingularDiagonal { row, value }) => {
            assert_eq!(row, 40);
            assert!(value.abs() < 1e-8);
        }
        other => panic!("expected SingularDiagonal, got {other:?}"),
    }
}

#[test]
fn residual_rejects_bad_snapshot_sets() {
    let grid = build_grid(&piano_default(), 21).unwrap();
    let kt = build_kernel_table(1.0, 21).unwrap();
    let z = || Field::zeros(&grid);
    let snap = |t: f64| Snapshot { t, field: z() };

    match target_residual(&[snap(0.0), snap(0.1)], &grid, &kt) {
        Err(Error::TooFewSnapshots { got: 2, min: 3 }) => {}
        other => panic!("expected TooFewSnapshots, got {other:?}"),
    }
    match target_residual(&[snap(0.0), snap(0.1), snap(0.3)], &grid, &kt) {
        Err(Error::UnevenSnapshots) => {}
        other => panic!("expected UnevenSnapshots, got {other:?}"),
    }
    match target_residual(&[snap(0.0), snap(0.0), snap(0.0)], &grid, &kt) {
        Err(Error::UnevenSnapshots) => {}
        other => panic!("expected UnevenSnapshots, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_trip_and_linearity(seed1 in 0u64..1000, seed2 in 0u64..1000,
                                a in -3.0f64..3.0, lambda in -50.0f64..50.0) {
        let n = 21;
        let grid = build_grid(&piano_default(), n).unwrap();
        let kt = build_kernel_table(lambda, n).unwrap();
        let v1 = random_field(&grid, seed1);
        let v2 = random_field(&grid, seed2);

        let w1 = forward_transform(&v1, &grid, &kt).unwrap();
        let back = inverse_transform(&w1, &grid, &kt).unwrap();
        let err = back.values().iter().zip(v1.values())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(err <= 1e-9 * (1.0 + v1.max_abs()));

        let combo = Field::from_fn(&grid, |i, j| a * v1.get(i, j) + v2.get(i, j));
        let w_combo = forward_transform(&combo, &grid, &kt).unwrap();
        let w2 = forward_transform(&v2, &grid, &kt).unwrap();
        let lin_err = (0..n * n).fold(0.0f64, |m, idx| {
            let expect = a * w1.values()[idx] + w2.values()[idx];
            m.max((w_combo.values()[idx] - expect).abs())
        });
        prop_assert!(lin_err <= 1e-11 * (1.0 + kt.values().iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }
}
