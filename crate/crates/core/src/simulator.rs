//! Forward-Euler time marching of v_t = v_xx + v_yy + λv on the masked grid,
//! with homogeneous Dirichlet data on the side/floor boundary and the
//! backstepping feedback U = ∫₀^{φ(x)} K(φ(x), ξ) v(x, ξ, t) dξ on the graph
//! boundary. One quadrature path serves every controlled node, so the flat
//! tail (U₁) and the profiled part (U₂) are the same formula.

use crate::diagnostics::{fit_decay_rate, l2_norm, DecayFit, NormSeries};
use crate::error::{Error, Result};
use crate::geometry::{build_grid, BoundaryGraph, Grid, NodeClass};
use crate::kernel::{build_kernel_table, KernelTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar state on grid nodes; exterior nodes are inert zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    n: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            n: grid.n(),
            values: vec![0.0; grid.n() * grid.n()],
        }
    }

    /// Builds a field from a node function, forcing exterior nodes to 0.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let n = grid.n();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if grid.class(i, j) != NodeClass::Exterior {
                    values[i * n + j] = f(i, j);
                }
            }
        }
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Initial state generators; all vanish on ∂Ω.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Smooth compactly-supported bump centered at the interior centroid.
    Bump,
    /// sin(πx)·sin(πy/φ_min) truncated to the interior.
    ProductSine,
    /// Reproducible pseudo-random interior values in [−1, 1].
    RandomSeeded { seed: u64 },
}

impl InitialCondition {
    /// Maps a config name plus seed to a generator.
    pub fn from_name(name: &str, seed: u64) -> Result<Self> {
        match name {
            "bump" => Ok(Self::Bump),
            "product_sine" => Ok(Self::ProductSine),
            "random_seeded" => Ok(Self::RandomSeeded { seed }),
            other => Err(Error::UnknownInitialCondition(other.into())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bump => "bump",
            Self::ProductSine => "product_sine",
            Self::RandomSeeded { .. } => "random_seeded",
        }
    }
}

/// Builds the initial state for a grid.
pub fn initial_condition(kind: &InitialCondition, grid: &Grid) -> Field {
    let n = grid.n();
    let h = grid.h();
    match kind {
        InitialCondition::Bump => {
            let mut cx = 0.0;
            let mut cy = 0.0;
            let mut count = 0usize;
            for i in 0..n {
                for j in 0..n {
                    if grid.class(i, j) == NodeClass::Interior {
                        cx += grid.x(i);
                        cy += grid.y(j);
                        count += 1;
                    }
                }
            }
            let (cx, cy) = (cx / count as f64, cy / count as f64);
            let mut r0 = f64::INFINITY;
            for i in 0..n {
                for j in 0..n {
                    if grid.class(i, j) != NodeClass::Interior {
                        let d = ((grid.x(i) - cx).powi(2) + (grid.y(j) - cy).powi(2)).sqrt();
                        r0 = r0.min(d);
                    }
                }
            }
            let r0 = 0.9 * r0;
            Field::from_fn(grid, |i, j| {
                if grid.class(i, j) != NodeClass::Interior {
                    return 0.0;
                }
                let rho2 = ((grid.x(i) - cx).powi(2) + (grid.y(j) - cy).powi(2)) / (r0 * r0);
                if rho2 < 1.0 {
                    (1.0 - 1.0 / (1.0 - rho2)).exp()
                } else {
                    0.0
                }
            })
        }
        InitialCondition::ProductSine => {
            let phi_min = (0..n).map(|i| grid.j_top(i)).min().unwrap() as f64 * h;
            Field::from_fn(grid, |i, j| {
                if grid.class(i, j) != NodeClass::Interior {
                    return 0.0;
                }
                (std::f64::consts::PI * grid.x(i)).sin()
                    * (std::f64::consts::PI * grid.y(j) / phi_min).sin()
            })
        }
        InitialCondition::RandomSeeded { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Field::from_fn(grid, |i, j| {
                if grid.class(i, j) == NodeClass::Interior {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
        }
    }
}

/// Simulation parameters. `dt` must respect the explicit-scheme bound
/// h²/(4 + |λ|h²); violations are rejected, never clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub lambda: f64,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub control_enabled: bool,
    pub initial_condition: InitialCondition,
    pub snapshot_every: usize,
}

pub const LAMBDA_CAP: f64 = 200.0;

/// Largest stable forward-Euler step for the 5-point scheme with reaction λ.
pub fn dt_max(lambda: f64, h: f64) -> f64 {
    h * h / (4.0 + lambda.abs() * h * h)
}

/// dt_max with a 10% safety margin; the default step when none is configured.
pub fn stable_dt(lambda: f64, h: f64) -> f64 {
    0.9 * dt_max(lambda, h)
}

impl SimConfig {
    pub fn validate(&self, h: f64) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda.abs() > LAMBDA_CAP {
            return Err(Error::LambdaTooLarge(self.lambda.abs()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_final = {} must be positive",
                self.t_final
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidConfig("snapshot_every must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        let bound = dt_max(self.lambda, h);
        if self.dt > bound {
            return Err(Error::CflViolation {
                dt: self.dt,
                dt_max: bound,
            });
        }
        Ok(())
    }
}

/// Composite trapezoid of K(y_row, ξ_k)·v(x_i, ξ_k) over k = 0..=row.
/// Zero-width integrals (row 0) are 0.
pub(crate) fn kernel_row_quadrature(v: &Field, kt: &KernelTable, i: usize, row: usize) -> f64 {
    if row == 0 {
        return 0.0;
    }
    let krow = kt.row(row);
    let col = &v.values[i * v.n..i * v.n + row + 1];
    let mut acc = 0.5 * krow[0] * col[0] + 0.5 * krow[row] * col[row];
    for k in 1..row {
        acc += krow[k] * col[k];
    }
    kt.h() * acc
}

/// The boundary feedback for one column: quadrature against the kernel row at
/// the column's snapped top. Columns with j_top = n−1 realize U₁, the rest U₂.
pub fn control_trace(v: &Field, grid: &Grid, kt: &KernelTable, column: usize) -> f64 {
    kernel_row_quadrature(v, kt, column, grid.j_top(column))
}

fn check_compatible(grid: &Grid, cfg: &SimConfig, kt: &KernelTable) -> Result<()> {
    if kt.n() != grid.n() {
        return Err(Error::KernelMismatch(format!(
            "table n = {}, grid n = {}",
            kt.n(),
            grid.n()
        )));
    }
    if kt.lambda() != cfg.lambda {
        return Err(Error::KernelMismatch(format!(
            "table lambda = {}, config lambda = {}",
            kt.lambda(),
            cfg.lambda
        )));
    }
    Ok(())
}

/// One forward-Euler update of `src` into `dst`: interior stencil first, then
/// Dirichlet zeros, then all controlled nodes set simultaneously from the
/// updated state (or to 0 when control is off).
pub(crate) fn advance_into(
    src: &Field,
    dst: &mut Field,
    grid: &Grid,
    cfg: &SimConfig,
    kt: &KernelTable,
    traces: &mut Vec<(usize, usize)>,
) {
    let n = grid.n();
    let h2 = grid.h() * grid.h();
    let dt = cfg.dt;
    let lambda = cfg.lambda;
    traces.clear();
    for i in 0..n {
        let jt = grid.j_top(i);
        for j in 0..=jt {
            let idx = i * n + j;
            match grid.class(i, j) {
                NodeClass::Interior => {
                    let c = src.values[idx];
                    let lap = (src.values[idx - n]
                        + src.values[idx + n]
                        + src.values[idx - 1]
                        + src.values[idx + 1]
                        - 4.0 * c)
                        / h2;
                    dst.values[idx] = c + dt * (lap + lambda * c);
                }
                NodeClass::DirichletZero => dst.values[idx] = 0.0,
                NodeClass::Controlled => {
                    // keep the previous-step value visible to the quadrature
                    // pass below; all traces read one consistent state
                    dst.values[idx] = src.values[idx];
                    traces.push((i, j));
                }
                NodeClass::Exterior => unreachable!("exterior above j_top only"),
            }
        }
    }
    if cfg.control_enabled {
        let values: Vec<f64> = traces
            .iter()
            .map(|&(i, j)| kernel_row_quadrature(dst, kt, i, j))
            .collect();
        for (&(i, j), value) in traces.iter().zip(values) {
            dst.values[i * n + j] = value;
        }
    } else {
        for &(i, j) in traces.iter() {
            dst.values[i * n + j] = 0.0;
        }
    }
}

/// One time step; see `advance_into`. Divergence is reported, not panicked.
pub fn step(v: &Field, grid: &Grid, cfg: &SimConfig, kt: &KernelTable) -> Result<Field> {
    cfg.validate(grid.h())?;
    check_compatible(grid, cfg, kt)?;
    let mut next = Field::zeros(grid);
    let mut traces = Vec::new();
    advance_into(v, &mut next, grid, cfg, kt, &mut traces);
    if next.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { step: 0 });
    }
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Completed,
    /// The state stopped being finite at this step; the trajectory holds
    /// everything before it. Expected for unstable open-loop scenarios.
    Diverged { step: usize },
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub initial_norm: f64,
    pub final_norm: f64,
    pub steps_taken: usize,
    pub decay: Option<DecayFit>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub grid: Grid,
    pub kernel: KernelTable,
    pub norms: NormSeries,
    pub snapshots: Vec<Snapshot>,
    pub outcome: RunOutcome,
    pub summary: RunSummary,
}

/// Runs ⌈t_final/dt⌉ steps, recording the L² norm every step and field
/// snapshots at the configured cadence (plus t = 0 and the last step).
pub fn run(graph: &BoundaryGraph, cfg: &SimConfig) -> Result<RunOutput> {
    let grid = build_grid(graph, cfg.n)?;
    cfg.validate(grid.h())?;
    let kt = build_kernel_table(cfg.lambda, cfg.n)?;
    let steps = (cfg.t_final / cfg.dt).ceil() as usize;

    let mut cur = initial_condition(&cfg.initial_condition, &grid);
    let mut next = Field::zeros(&grid);
    let mut traces = Vec::new();

    let mut norms = NormSeries::new();
    norms.push(0.0, l2_norm(&cur, &grid));
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        field: cur.clone(),
    }];
    let mut outcome = RunOutcome::Completed;
    let mut steps_taken = 0usize;

    for s in 1..=steps {
        advance_into(&cur, &mut next, &grid, cfg, &kt, &mut traces);
        std::mem::swap(&mut cur, &mut next);
        let norm = l2_norm(&cur, &grid);
        if !norm.is_finite() {
            outcome = RunOutcome::Diverged { step: s };
            break;
        }
        let t = s as f64 * cfg.dt;
        norms.push(t, norm);
        steps_taken = s;
        if s % cfg.snapshot_every == 0 || s == steps {
            snapshots.push(Snapshot {
                t,
                field: cur.clone(),
            });
        }
    }

    let summary = RunSummary {
        initial_norm: norms.norms()[0],
        final_norm: *norms.norms().last().expect("nonempty"),
        steps_taken,
        decay: fit_decay_rate(&norms, 0.5).ok(),
    };
    Ok(RunOutput {
        grid,
        kernel: kt,
        norms,
        snapshots,
        outcome,
        summary,
    })
}
