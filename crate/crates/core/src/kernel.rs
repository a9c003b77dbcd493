//! Backstepping kernel K(y, ξ) on the triangle 𝒯: closed-form series
//! evaluator, precomputed table, and two independent checks (a Goursat
//! successive-approximation solver and a PDE-residual probe).
//!
//! K solves K_yy − K_ξξ − λK = 0 with K(y, y) = −λy/2 and K(y, 0) = 0; its
//! closed form is −λξ·I₁(√(λ(y²−ξ²)))/√(λ(y²−ξ²)), evaluated here as an
//! entire series in z = λ(y²−ξ²) so that the diagonal (z = 0) and λ < 0
//! (oscillatory branch) need no special cases.

use crate::error::{Error, Result};

const SERIES_MAX_TERMS: usize = 60;

/// Σ_{m≥0} (z/4)^m / (m!(m+1)!), truncated when the next term drops below
/// 1e-15·(1 + |partial sum|). Equals 2·I₁(√z)/√z for z > 0 and 2·J₁(√−z)/√−z
/// for z < 0.
fn bessel_ratio_series(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..SERIES_MAX_TERMS {
        let m = m as f64;
        term *= z / (4.0 * m * (m + 1.0));
        sum += term;
        if term.abs() < 1e-15 * (1.0 + sum.abs()) {
            break;
        }
    }
    sum
}

#[inline]
fn kernel_value(lambda: f64, y: f64, xi: f64) -> f64 {
    let z = lambda * (y * y - xi * xi);
    -(lambda * xi / 2.0) * bessel_ratio_series(z)
}

/// Evaluates the kernel at a point of 𝒯.
pub fn eval_kernel(lambda: f64, y: f64, xi: f64) -> Result<f64> {
    if !(xi >= 0.0 && xi <= y && y <= 1.0) {
        return Err(Error::OutsideTriangle { y, xi });
    }
    Ok(kernel_value(lambda, y, xi))
}

/// Lower-triangular samples K_jk = K(y_j, ξ_k), k ≤ j, on the 1D y-grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    lambda: f64,
    n: usize,
    values: Vec<f64>,
}

impl KernelTable {
    fn from_values(lambda: f64, n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n * (n + 1) / 2);
        Self { lambda, n, values }
    }

    /// Wraps externally produced samples (row-major lower triangle,
    /// n(n+1)/2 entries).
    pub fn from_raw(lambda: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooCoarse { n, min: 2 });
        }
        if values.len() != n * (n + 1) / 2 {
            return Err(Error::KernelMismatch(format!(
                "expected {} entries for n = {n}, got {}",
                n * (n + 1) / 2,
                values.len()
            )));
        }
        Ok(Self { lambda, n, values })
    }

    /// Row-major lower-triangle samples, k ≤ j.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        debug_assert!(k <= j && j < self.n);
        self.values[j * (j + 1) / 2 + k]
    }

    /// Row j as a slice over k = 0..=j.
    #[inline]
    pub fn row(&self, j: usize) -> &[f64] {
        let base = j * (j + 1) / 2;
        &self.values[base..base + j + 1]
    }
}

/// Fills the table via the closed-form series on y_j = j/(n−1).
pub fn build_kernel_table(lambda: f64, n: usize) -> Result<KernelTable> {
    if n < 2 {
        return Err(Error::GridTooCoarse { n, min: 2 });
    }
    let h = 1.0 / (n - 1) as f64;
    let mut values = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        let y = j as f64 * h;
        for k in 0..=j {
            let xi = k as f64 * h;
            values.push(kernel_value(lambda, y, xi));
        }
    }
    Ok(KernelTable::from_values(lambda, n, values))
}

/// Solves the kernel equations numerically, without the closed form.
///
/// In characteristic variables s = y + ξ, τ = y − ξ the Goursat problem
/// becomes G_sτ = (λ/4)G with G(s, 0) = −λs/4 and G(τ, τ) = 0, equivalent to
/// the integral equation G = −(λ/4)(s − τ) + (λ/4)∬_{[τ,s]×[0,τ]} G. Picard
/// iteration with composite-trapezoid quadrature converges geometrically and
/// is second-order accurate in h. The lattice carries both parities of
/// (j + k, j − k) so the quadrature rectangles align with lattice points;
/// even-parity points map back to the (y, ξ) grid.
pub fn solve_kernel_goursat(lambda: f64, n: usize) -> Result<KernelTable> {
    if n < 17 {
        return Err(Error::GridTooCoarse { n, min: 17 });
    }
    let h = 1.0 / (n - 1) as f64;
    let rows = 2 * (n - 1) + 1; // p = j + k
    let cols = n; // q = j − k
    let p_max = rows - 1;
    let lat = |p: usize, q: usize| p * cols + q;
    let valid = |p: usize, q: usize| q <= p && p + q <= p_max;

    let mut base = vec![0.0f64; rows * cols];
    for p in 0..rows {
        for q in 0..cols.min(p + 1) {
            if valid(p, q) {
                base[lat(p, q)] = -(lambda * h / 4.0) * (p - q) as f64;
            }
        }
    }

    let mut g = base.clone();
    let mut g_next = vec![0.0f64; rows * cols];
    let mut rowsum = vec![0.0f64; rows * cols];
    let mut colsum = vec![0.0f64; rows * cols];
    let scale = lambda * h * h / 4.0;
    let mut change = f64::INFINITY;

    for _ in 0..200 {
        // rowsum[p][q]: trapezoid of G(p, ·) over q' ∈ [0, q], unit weights
        for p in 0..rows {
            let g_row = &g[lat(p, 0)..lat(p, 0) + cols];
            let out = &mut rowsum[lat(p, 0)..lat(p, 0) + cols];
            let mut acc = 0.0;
            for q in 0..cols {
                acc += g_row[q];
                out[q] = acc - 0.5 * g_row[0] - 0.5 * g_row[q];
            }
        }
        // colsum[p][q] = Σ_{p' ≤ p} rowsum[p'][q]
        colsum[..cols].copy_from_slice(&rowsum[..cols]);
        for p in 1..rows {
            for q in 0..cols {
                colsum[lat(p, q)] = colsum[lat(p - 1, q)] + rowsum[lat(p, q)];
            }
        }
        change = 0.0;
        let mut magnitude = 0.0f64;
        for p in 0..rows {
            for q in 0..cols.min(p + 1) {
                if !valid(p, q) {
                    continue;
                }
                let below = if q >= 1 { colsum[lat(q - 1, q)] } else { 0.0 };
                let integral = colsum[lat(p, q)]
                    - below
                    - 0.5 * rowsum[lat(q, q)]
                    - 0.5 * rowsum[lat(p, q)];
                let v = base[lat(p, q)] + scale * integral;
                change = change.max((v - g[lat(p, q)]).abs());
                magnitude = magnitude.max(v.abs());
                g_next[lat(p, q)] = v;
            }
        }
        std::mem::swap(&mut g, &mut g_next);
        if change <= 1e-12 * (1.0 + magnitude) {
            let mut values = Vec::with_capacity(n * (n + 1) / 2);
            for j in 0..n {
                for k in 0..=j {
                    values.push(g[lat(j + k, j - k)]);
                }
            }
            return Ok(KernelTable::from_values(lambda, n, values));
        }
    }
    Err(Error::NoConvergence {
        iterations: 200,
        residual: change,
    })
}

/// Max over strictly interior triangle nodes of |D²_y K − D²_ξ K − λK| with
/// centered second differences; second-order small for a table of the smooth
/// exact kernel.
pub fn kernel_pde_residual(t: &KernelTable) -> f64 {
    let n = t.n;
    assert!(n >= 9, "residual probe needs n >= 9");
    let h = t.h();
    let inv_h2 = 1.0 / (h * h);
    let mut worst = 0.0f64;
    for j in 2..n - 1 {
        for k in 1..=j.saturating_sub(2) {
            let d_yy = (t.get(j + 1, k) - 2.0 * t.get(j, k) + t.get(j - 1, k)) * inv_h2;
            let d_xx = (t.get(j, k + 1) - 2.0 * t.get(j, k) + t.get(j, k - 1)) * inv_h2;
            worst = worst.max((d_yy - d_xx - t.lambda * t.get(j, k)).abs());
        }
    }
    worst
}

/// Max absolute entry-wise difference between two tables of the same size.
pub fn table_difference(a: &KernelTable, b: &KernelTable) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::KernelMismatch(format!(
            "table sizes differ: {} vs {}",
            a.n, b.n
        )));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Residuals of the two boundary identities K_jj = −λ y_j / 2 and K_j0 = 0.
pub fn boundary_identity_residuals(t: &KernelTable) -> (f64, f64) {
    let h = t.h();
    let mut diag = 0.0f64;
    let mut edge = 0.0f64;
    for j in 0..t.n {
        let y = j as f64 * h;
        diag = diag.max((t.get(j, j) + t.lambda * y / 2.0).abs());
        edge = edge.max(t.get(j, 0).abs());
    }
    (diag, edge)
}
