//! Backstepping boundary control of the 2D reaction-diffusion equation
//! v_t = v_xx + v_yy + λv on hypograph domains Ω = {0 ≤ y ≤ φ(x)}, with the
//! piano-shaped domain as the flagship instance.
//!
//! The library evaluates the closed-form backstepping kernel on the triangle
//! 𝒯 = {0 ≤ ξ ≤ y ≤ 1}, synthesizes the boundary feedback
//! U = ∫₀^{φ(x)} K(φ(x), ξ) v(x, ξ, t) dξ on the graph boundary, simulates
//! the open and closed loop with an explicit 5-point scheme, and verifies
//! closed-loop exponential L² decay: the transformation
//! w = v − ∫₀ʸ K(y, ξ) v(x, ξ) dξ maps the plant onto the heat equation with
//! zero Dirichlet data, whose decay rate is the principal eigenvalue of Ω.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod simulator;
pub mod transform;

pub use diagnostics::{
    fit_decay_rate, l2_norm, principal_eigenvalue, DecayFit, EigenEstimate, NormSeries,
};
pub use error::{Error, Result};
pub use geometry::{
    build_grid, eval_phi, piano_default, BoundaryGraph, Grid, NodeClass, Segment, Triangle,
};
pub use kernel::{
    boundary_identity_residuals, build_kernel_table, eval_kernel, kernel_pde_residual,
    solve_kernel_goursat, table_difference, KernelTable,
};
pub use simulator::{
    control_trace, dt_max, initial_condition, run, stable_dt, step, Field, InitialCondition,
    RunOutcome, RunOutput, RunSummary, SimConfig, Snapshot, LAMBDA_CAP,
};
pub use transform::{
    closed_loop_target_residuals, forward_transform, inverse_transform, target_residual,
    TargetResiduals,
};
