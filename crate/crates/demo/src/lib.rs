//! Wasm bindings for the browser demo: an interactive closed-loop simulation
//! on the piano domain, the kernel surface, and the domain's principal
//! eigenvalue. Plain Rust underneath, so everything here also runs natively
//! for testing.

use backstep2d::{
    build_grid, build_kernel_table, initial_condition, l2_norm, piano_default,
    principal_eigenvalue, stable_dt, step, Field, Grid, InitialCondition, KernelTable, NodeClass,
    SimConfig,
};
use wasm_bindgen::prelude::*;

/// An interactive simulation the page steps a few dozen steps per frame.
#[wasm_bindgen]
pub struct DemoSim {
    grid: Grid,
    cfg: SimConfig,
    kt: KernelTable,
    state: Field,
    t: f64,
    steps: u32,
    diverged: bool,
}

#[wasm_bindgen]
impl DemoSim {
    /// Closed- or open-loop piano scenario with the bump start and the
    /// CFL-safe time step.
    #[wasm_bindgen(constructor)]
    pub fn new(lambda: f64, n: u32, control: bool) -> Result<DemoSim, String> {
        let n = n as usize;
        let grid = build_grid(&piano_default(), n).map_err(|e| e.to_string())?;
        let cfg = SimConfig {
            lambda,
            n,
            dt: stable_dt(lambda, grid.h()),
            t_final: 1.0,
            control_enabled: control,
            initial_condition: InitialCondition::Bump,
            snapshot_every: 1,
        };
        cfg.validate(grid.h()).map_err(|e| e.to_string())?;
        let kt = build_kernel_table(lambda, n).map_err(|e| e.to_string())?;
        let state = initial_condition(&cfg.initial_condition, &grid);
        Ok(DemoSim {
            grid,
            cfg,
            kt,
            state,
            t: 0.0,
            steps: 0,
            diverged: false,
        })
    }

    /// Advances `count` steps and returns the L² norm (NaN once diverged).
    pub fn step_many(&mut self, count: u32) -> f64 {
        for _ in 0..count {
            if self.diverged {
                return f64::NAN;
            }
            match step(&self.state, &self.grid, &self.cfg, &self.kt) {
                Ok(next) => {
                    self.state = next;
                    self.t += self.cfg.dt;
                    self.steps += 1;
                }
                Err(_) => {
                    self.diverged = true;
                    return f64::NAN;
                }
            }
        }
        self.norm()
    }

    pub fn norm(&self) -> f64 {
        if self.diverged {
            f64::NAN
        } else {
            l2_norm(&self.state, &self.grid)
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps_taken(&self) -> u32 {
        self.steps
    }

    pub fn diverged(&self) -> bool {
        self.diverged
    }

    pub fn n(&self) -> u32 {
        self.grid.n() as u32
    }

    pub fn dt(&self) -> f64 {
        self.cfg.dt
    }

    /// Node values in column-major layout (index i·n + j).
    pub fn field(&self) -> Vec<f64> {
        self.state.values().to_vec()
    }

    pub fn max_abs(&self) -> f64 {
        self.state.max_abs()
    }

    /// Node classes for masking: 0 interior, 1 Dirichlet wall, 2 controlled
    /// graph boundary, 3 exterior.
    pub fn classes(&self) -> Vec<u8> {
        let n = self.grid.n();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(match self.grid.class(i, j) {
                    NodeClass::Interior => 0,
                    NodeClass::DirichletZero => 1,
                    NodeClass::Controlled => 2,
                    NodeClass::Exterior => 3,
                });
            }
        }
        out
    }

    /// Back to the bump start without rebuilding the kernel table.
    pub fn reset(&mut self) {
        self.state = initial_condition(&self.cfg.initial_condition, &self.grid);
        self.t = 0.0;
        self.steps = 0;
        self.diverged = false;
    }
}

/// The kernel K(y_j, ξ_k) as a dense n×n matrix (zeros above the diagonal),
/// row-major in j, for surface plotting.
#[wasm_bindgen]
pub fn kernel_surface(lambda: f64, n: u32) -> Result<Vec<f64>, String> {
    let n = n as usize;
    let kt = build_kernel_table(lambda, n).map_err(|e| e.to_string())?;
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for (k, value) in kt.row(j).iter().enumerate() {
            out[j * n + k] = *value;
        }
    }
    Ok(out)
}

/// Principal Dirichlet eigenvalue of the piano domain at resolution n; the
/// open loop flips unstable when λ exceeds it.
#[wasm_bindgen]
pub fn piano_eigenvalue(n: u32) -> Result<f64, String> {
    let grid = build_grid(&piano_default(), n as usize).map_err(|e| e.to_string())?;
    let estimate = principal_eigenvalue(&grid).map_err(|e| e.to_string())?;
    Ok(estimate.value)
}
