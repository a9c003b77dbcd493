//! Hypograph domains Ω = {(x, y): 0 ≤ x ≤ 1, 0 ≤ y ≤ φ(x)} and their grid masks.
//!
//! The upper boundary is the graph of a piecewise-affine function φ; the grid
//! snaps it to node rows so the stepper stays a pure 5-point stencil.

use crate::error::{Error, Result};

/// One piece of the boundary profile over `[x_start, x_end]`, affine from
/// `y_start` to `y_end`. `x_start` is the previous piece's `x_end` (0 for the
/// first piece).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x_end: f64,
    pub y_start: f64,
    pub y_end: f64,
}

/// The controlled boundary profile φ: [0,1] → (0,1], piecewise affine and
/// continuous except for jump-down corners between pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGraph {
    segments: Vec<Segment>,
}

impl BoundaryGraph {
    /// Validates and builds a profile from ordered pieces.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidBoundary("no segments".into()));
        }
        let mut x_prev = 0.0;
        for (idx, s) in segments.iter().enumerate() {
            if !s.x_end.is_finite() || s.x_end <= x_prev {
                return Err(Error::InvalidBoundary(format!(
                    "segment {idx}: x_end = {} does not increase past {}",
                    s.x_end, x_prev
                )));
            }
            for v in [s.y_start, s.y_end] {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::InvalidBoundary(format!(
                        "segment {idx}: value {v} outside (0, 1]"
                    )));
                }
            }
            x_prev = s.x_end;
        }
        if (x_prev - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidBoundary(format!(
                "last segment ends at {x_prev}, expected 1"
            )));
        }
        for (idx, pair) in segments.windows(2).enumerate() {
            if pair[1].y_start > pair[0].y_end + 1e-12 {
                return Err(Error::InvalidBoundary(format!(
                    "upward jump between segments {idx} and {} (only jump-down corners allowed)",
                    idx + 1
                )));
            }
        }
        Ok(Self { segments })
    }

    /// A constant-height profile φ ≡ `height` (e.g. 1.0 for the unit square).
    pub fn constant(height: f64) -> Result<Self> {
        Self::new(vec![Segment {
            x_end: 1.0,
            y_start: height,
            y_end: height,
        }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Minimum of φ over [0, 1]; exact since φ is piecewise affine.
    pub fn min_height(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| [s.y_start, s.y_end])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Flagship domain: flat tail of height 1 on [0, 0.4], affine descent to 0.5
/// on [0.4, 0.7], flat body of height 0.5 on [0.7, 1].
pub fn piano_default() -> BoundaryGraph {
    BoundaryGraph::new(vec![
        Segment {
            x_end: 0.4,
            y_start: 1.0,
            y_end: 1.0,
        },
        Segment {
            x_end: 0.7,
            y_start: 1.0,
            y_end: 0.5,
        },
        Segment {
            x_end: 1.0,
            y_start: 0.5,
            y_end: 0.5,
        },
    ])
    .expect("piano profile is valid")
}

/// Evaluates φ(x). At a jump the left limit is returned, so x belongs to the
/// earliest piece whose interval contains it.
pub fn eval_phi(g: &BoundaryGraph, x: f64) -> Result<f64> {
    // NaN fails contains and is rejected too
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::XOutOfRange(x));
    }
    let mut x_start = 0.0;
    for s in &g.segments {
        if x <= s.x_end {
            let t = (x - x_start) / (s.x_end - x_start);
            return Ok(s.y_start + t * (s.y_end - s.y_start));
        }
        x_start = s.x_end;
    }
    // x == 1 within rounding of the last x_end
    let last = g.segments.last().expect("nonempty");
    Ok(last.y_end)
}

/// Per-node classification of the n×n grid over the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Strictly inside Ω with a full 5-point stencil.
    Interior,
    /// Homogeneous Dirichlet part of ∂Ω: side walls and floor.
    DirichletZero,
    /// Snapped graph boundary, including staircase wall nodes; actuated.
    Controlled,
    /// Outside Ω; values are inert zeros.
    Exterior,
}

/// Uniform grid with spacing h = 1/(n−1) and a mask classifying every node.
#[derive(Debug, Clone)]
pub struct Grid {
    n: usize,
    h: f64,
    mask: Vec<NodeClass>,
    phi_row: Vec<usize>,
}

impl Grid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Row index of the snapped boundary node in column i.
    pub fn j_top(&self, i: usize) -> usize {
        self.phi_row[i]
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    #[inline]
    pub fn class(&self, i: usize, j: usize) -> NodeClass {
        self.mask[i * self.n + j]
    }

    pub fn mask(&self) -> &[NodeClass] {
        &self.mask
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// Node count per class, ordered (interior, dirichlet, controlled, exterior).
    pub fn class_counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for m in &self.mask {
            match m {
                NodeClass::Interior => c.0 += 1,
                NodeClass::DirichletZero => c.1 += 1,
                NodeClass::Controlled => c.2 += 1,
                NodeClass::Exterior => c.3 += 1,
            }
        }
        c
    }
}

/// Snaps φ to grid rows (round half up) and classifies every node.
///
/// Column tops (i, j_top(i)) are Controlled, as are staircase wall nodes
/// exposed where j_top jumps between neighboring columns; side walls and the
/// floor are DirichletZero; everything under the graph with a full stencil is
/// Interior. Grids are intended for n ≥ 9; smaller n is accepted as long as
/// the domain stays at least two cells thick everywhere.
pub fn build_grid(g: &BoundaryGraph, n: usize) -> Result<Grid> {
    if n < 3 {
        return Err(Error::GridTooCoarse { n, min: 3 });
    }
    let h = 1.0 / (n - 1) as f64;
    let mut phi_row = Vec::with_capacity(n);
    for i in 0..n {
        let x = (i as f64 * h).min(1.0);
        let phi = eval_phi(g, x)?;
        let j_top = (phi / h + 0.5).floor() as usize;
        if j_top <= 1 {
            return Err(Error::DomainTooThin { column: i, j_top });
        }
        debug_assert!(j_top < n);
        phi_row.push(j_top.min(n - 1));
    }
    let mut mask = vec![NodeClass::Exterior; n * n];
    for i in 0..n {
        let jt = phi_row[i];
        for j in 0..=jt {
            let class = if j == jt {
                NodeClass::Controlled
            } else if i == 0 || i == n - 1 || j == 0 {
                NodeClass::DirichletZero
            } else if j > phi_row[i - 1] || j > phi_row[i + 1] {
                // staircase wall node: part of the snapped graph boundary
                NodeClass::Controlled
            } else {
                NodeClass::Interior
            };
            mask[i * n + j] = class;
        }
    }
    Ok(Grid {
        n,
        h,
        mask,
        phi_row,
    })
}

/// The kernel triangle 𝒯 = {(y, ξ): 0 ≤ ξ ≤ y ≤ 1} realized as index pairs
/// j ≥ k on the 1D y-grid; x-independent by construction.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub n: usize,
}

impl Triangle {
    /// All (j, k) pairs with k ≤ j, row-major.
    pub fn pairs(self) -> impl Iterator<Item = (usize, usize)> {
        (0..self.n).flat_map(|j| (0..=j).map(move |k| (j, k)))
    }
}
