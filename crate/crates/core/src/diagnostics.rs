//! Quantitative verdicts: masked L² norms, exponential-rate fits, and the
//! principal Dirichlet eigenvalue λ̂₁ of the discrete Laplacian on Ω, which
//! sets both the open-loop instability threshold and the closed-loop decay
//! rate.

use crate::error::{Error, Result};
use crate::geometry::{Grid, NodeClass};
use crate::simulator::Field;

/// Time series of norms with strictly increasing times.
#[derive(Debug, Clone, Default)]
pub struct NormSeries {
    times: Vec<f64>,
    norms: Vec<f64>,
}

impl NormSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample; times must strictly increase.
    pub fn push(&mut self, t: f64, norm: f64) {
        if let Some(last) = self.times.last() {
            assert!(t > *last, "times must strictly increase");
        }
        debug_assert!(norm >= 0.0 || norm.is_nan());
        self.times.push(t);
        self.norms.push(norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }
}

/// Masked L² norm: √(Σ h² ω v²) with product trapezoid weights (1 interior,
/// 1/2 on edges, 1/4 at corners of the masked region).
pub fn l2_norm(v: &Field, grid: &Grid) -> f64 {
    let n = grid.n();
    let h = grid.h();
    let mut sum = 0.0;
    for i in 0..n {
        let wx = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let jt = grid.j_top(i);
        for j in 0..=jt {
            let wy = if j == 0 || j == jt { 0.5 } else { 1.0 };
            let value = v.get(i, j);
            sum += wx * wy * value * value;
        }
    }
    (h * h * sum).sqrt()
}

/// Result of an exponential fit to a norm series tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Negated slope of ln‖·‖ vs t; positive means decay.
    pub rate: f64,
    pub r_squared: f64,
    /// True when samples at or below the 1e-30 underflow floor were dropped.
    pub floor_hit: bool,
}

/// Least-squares exponential rate over the trailing `window` fraction of the
/// series (0 < window ≤ 1, default choice 0.5); needs ≥ 10 usable samples.
pub fn fit_decay_rate(series: &NormSeries, window: f64) -> Result<DecayFit> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "window fraction {window} outside (0, 1]"
        )));
    }
    let len = series.len();
    let take = ((window * len as f64).ceil() as usize).clamp(1, len);
    let start = len - take;
    let mut ts = Vec::with_capacity(take);
    let mut ys = Vec::with_capacity(take);
    let mut floor_hit = false;
    for m in start..len {
        let norm = series.norms()[m];
        if norm <= 1e-30 {
            floor_hit = true;
            continue;
        }
        ts.push(series.times()[m]);
        ys.push(norm.ln());
    }
    if ts.len() < 10 {
        return Err(Error::WindowTooSmall {
            got: ts.len(),
            min: 10,
        });
    }
    let count = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / count;
    let y_mean = ys.iter().sum::<f64>() / count;
    let mut stt = 0.0;
    let mut sty = 0.0;
    let mut syy = 0.0;
    for (t, y) in ts.iter().zip(&ys) {
        stt += (t - t_mean) * (t - t_mean);
        sty += (t - t_mean) * (y - y_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    let slope = sty / stt;
    let ss_res = syy - slope * sty;
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        floor_hit,
    })
}

/// Principal-eigenvalue estimate and the outer iterations it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEstimate {
    pub value: f64,
    pub iterations: usize,
}

/// Dirichlet Laplacian restricted to interior nodes, in compressed indexing.
struct InteriorOperator {
    h2: f64,
    neighbors: Vec<[usize; 4]>,
}

const NO_NEIGHBOR: usize = usize::MAX;

impl InteriorOperator {
    fn build(grid: &Grid) -> Self {
        let n = grid.n();
        let mut compressed = vec![NO_NEIGHBOR; n * n];
        let mut nodes = Vec::new();
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                if grid.class(i, j) == NodeClass::Interior {
                    compressed[i * n + j] = nodes.len();
                    nodes.push((i, j));
                }
            }
        }
        let neighbors = nodes
            .iter()
            .map(|&(i, j)| {
                [
                    compressed[(i - 1) * n + j],
                    compressed[(i + 1) * n + j],
                    compressed[i * n + j - 1],
                    compressed[i * n + j + 1],
                ]
            })
            .collect();
        Self {
            h2: grid.h() * grid.h(),
            neighbors,
        }
    }

    fn len(&self) -> usize {
        self.neighbors.len()
    }

    /// out = (−Δ_h) x with zero Dirichlet data outside the interior set.
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (idx, nb) in self.neighbors.iter().enumerate() {
            let mut acc = 4.0 * x[idx];
            for &t in nb {
                if t != NO_NEIGHBOR {
                    acc -= x[t];
                }
            }
            out[idx] = acc / self.h2;
        }
    }

    /// Conjugate gradient for A y = b to relative residual 1e-10.
    fn solve(&self, b: &[f64], y: &mut [f64], scratch: &mut CgScratch) {
        let m = self.len();
        y.iter_mut().for_each(|v| *v = 0.0);
        scratch.r.copy_from_slice(b);
        scratch.p.copy_from_slice(b);
        let b_norm2: f64 = b.iter().map(|v| v * v).sum();
        let tol2 = 1e-20 * b_norm2;
        let mut rr: f64 = b_norm2;
        for _ in 0..m {
            if rr <= tol2 {
                break;
            }
            self.apply(&scratch.p, &mut scratch.ap);
            let p_ap: f64 = scratch.p.iter().zip(&scratch.ap).map(|(a, b)| a * b).sum();
            let alpha = rr / p_ap;
            for (y, p) in y.iter_mut().zip(&scratch.p) {
                *y += alpha * p;
            }
            for (r, ap) in scratch.r.iter_mut().zip(&scratch.ap) {
                *r -= alpha * ap;
            }
            let rr_next: f64 = scratch.r.iter().map(|v| v * v).sum();
            let beta = rr_next / rr;
            for (p, r) in scratch.p.iter_mut().zip(&scratch.r) {
                *p = r + beta * *p;
            }
            rr = rr_next;
        }
    }
}

struct CgScratch {
    r: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
}

/// Smallest eigenvalue of −Δ_h on the interior node set, by inverse power
/// iteration with conjugate-gradient inner solves; stops when the Rayleigh
/// quotient changes by < 1e-8 relative.
pub fn principal_eigenvalue(grid: &Grid) -> Result<EigenEstimate> {
    let op = InteriorOperator::build(grid);
    let m = op.len();
    if m == 0 {
        return Err(Error::InvalidConfig("grid has no interior nodes".into()));
    }
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let mut y = vec![0.0; m];
    let mut ay = vec![0.0; m];
    let mut scratch = CgScratch {
        r: vec![0.0; m],
        p: vec![0.0; m],
        ap: vec![0.0; m],
    };
    let mut previous = f64::INFINITY;
    for outer in 1..=10_000 {
        op.solve(&x, &mut y, &mut scratch);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter_mut().for_each(|v| *v /= norm);
        op.apply(&y, &mut ay);
        let rayleigh: f64 = y.iter().zip(&ay).map(|(a, b)| a * b).sum();
        if (rayleigh - previous).abs() < 1e-8 * rayleigh.abs() {
            return Ok(EigenEstimate {
                value: rayleigh,
                iterations: outer,
            });
        }
        previous = rayleigh;
        std::mem::swap(&mut x, &mut y);
    }
    Err(Error::NoConvergence {
        iterations: 10_000,
        residual: f64::NAN,
    })
}
