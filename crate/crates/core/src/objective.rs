//! Smoothed negative-L1 haplotype cost on the sphere.
//!
//! For a read matrix `M` with observation set `Ω` and rows `m_i = P_Ω(M)_i`,
//!
//! ```text
//! f(x)       = -Σ_i sqrt((m_i·x)^2 + ε)
//! Grad f(x)  = -Σ_i m_i (m_i·x) / s_i,            s_i = sqrt((m_i·x)^2 + ε)
//! H_E(x)     = -Σ_i ε m_i m_i^T / s_i^3
//! grad f(x)  = (I - x x^T) Grad f(x)
//! Hess f(x)ξ = (I - x x^T) H_E(x) ξ - (x·Grad f(x)) ξ
//! ```
//!
//! Minimizing `f` over the sphere is the smoothed form of maximizing
//! `|P_Ω(M) x|_1`; as `ε -> 0` the two objectives coincide.

use crate::error::{check_len, param, Error, Result};
use crate::rtr::Objective;
use crate::sphere::{project_tangent, TangentVector, UnitVector};

/// Observed SNP read matrix.
///
/// Observed entries are `±1`; unobserved positions read as `None` and
/// contribute zero to every product (the sampling operator `P_Ω`). Rows are
/// additionally indexed in compressed form for the objective's inner loops.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Option<i8>>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl ReadMatrix {
    /// Builds a matrix from row-major cells; every observed cell must be `±1`.
    pub fn new(rows: usize, cols: usize, cells: Vec<Option<i8>>) -> Result<Self> {
        if rows < 1 {
            return Err(param("m", "read matrix needs at least one row"));
        }
        if cols < 2 {
            return Err(param("n", "read matrix needs at least two columns"));
        }
        check_len(rows * cols, cells.len())?;
        if let Some(bad) = cells.iter().flatten().find(|v| v.abs() != 1) {
            return Err(param("entries", format!("observed entry {bad} is not +1 or -1")));
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in cells.chunks(cols) {
            for (j, c) in row.iter().enumerate() {
                if let Some(v) = c {
                    col_idx.push(j);
                    vals.push(f64::from(*v));
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            rows,
            cols,
            cells,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Builds a matrix from dense `±1` entries and an observation mask.
    pub fn from_masked(rows: usize, cols: usize, entries: &[i8], mask: &[bool]) -> Result<Self> {
        check_len(rows * cols, entries.len())?;
        check_len(rows * cols, mask.len())?;
        let cells = entries
            .iter()
            .zip(mask)
            .map(|(&v, &seen)| seen.then_some(v))
            .collect();
        Self::new(rows, cols, cells)
    }

    pub fn from_rows(rows: &[Vec<Option<i8>>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        for r in rows {
            check_len(cols, r.len())?;
        }
        Self::new(rows.len(), cols, rows.iter().flatten().copied().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<i8> {
        self.cells[i * self.cols + j]
    }

    pub fn cells(&self) -> &[Option<i8>] {
        &self.cells
    }

    /// `|Ω|`.
    pub fn observed_count(&self) -> usize {
        self.vals.len()
    }

    /// Observed `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// Number of observations in row `i` (`|Ω_i|`, also `|m_i|_2^2`).
    pub fn row_count(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Observations per column.
    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.cols];
        for &j in &self.col_idx {
            counts[j] += 1;
        }
        counts
    }

    /// Columns with no observation at all; such sites are unrecoverable.
    pub fn unobserved_columns(&self) -> usize {
        self.column_counts().iter().filter(|&&c| c == 0).count()
    }

    fn check_point(&self, x: &UnitVector) -> Result<()> {
        check_len(self.cols, x.dim())
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        self.row(i).map(|(j, v)| v * x[j]).sum()
    }
}

/// Smoothing constant `ε > 0` of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothing(f64);

impl Smoothing {
    pub const DEFAULT: Smoothing = Smoothing(1e-6);

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Self(eps))
        } else {
            Err(param("epsilon", format!("must be positive and finite, got {eps}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Smoothing {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// `m_i · x` summed over the observed columns of row `i`.
pub fn masked_row_dot(reads: &ReadMatrix, i: usize, x: &UnitVector) -> Result<f64> {
    if i >= reads.rows {
        return Err(Error::Index {
            index: i,
            len: reads.rows,
        });
    }
    reads.check_point(x)?;
    Ok(reads.row_dot(i, x.coords()))
}

pub fn cost(reads: &ReadMatrix, eps: Smoothing, x: &UnitVector) -> Result<f64> {
    reads.check_point(x)?;
    let e = eps.get();
    Ok(-(0..reads.rows)
        .map(|i| {
            let u = reads.row_dot(i, x.coords());
            (u * u + e).sqrt()
        })
        .sum::<f64>())
}

/// `f(x) - f(y)` summed row by row as
/// `(u_y - u_x)(u_y + u_x) / (s_x + s_y)` with `u_y - u_x = m_i·(y - x)`,
/// so decreases far below the magnitude of `f` keep their relative accuracy.
pub fn cost_difference(reads: &ReadMatrix, eps: Smoothing, x: &UnitVector, y: &UnitVector) -> Result<f64> {
    reads.check_point(x)?;
    reads.check_point(y)?;
    let e = eps.get();
    let d: Vec<f64> = y.coords().iter().zip(x.coords()).map(|(a, b)| a - b).collect();
    Ok((0..reads.rows)
        .map(|i| {
            let ux = reads.row_dot(i, x.coords());
            let uy = reads.row_dot(i, y.coords());
            let du = reads.row_dot(i, &d);
            du * (ux + uy) / ((ux * ux + e).sqrt() + (uy * uy + e).sqrt())
        })
        .sum())
}

pub fn euclidean_grad(reads: &ReadMatrix, eps: Smoothing, x: &UnitVector) -> Result<Vec<f64>> {
    reads.check_point(x)?;
    let e = eps.get();
    let mut g = vec![0.0; reads.cols];
    for i in 0..reads.rows {
        let u = reads.row_dot(i, x.coords());
        let w = u / (u * u + e).sqrt();
        for (j, v) in reads.row(i) {
            g[j] -= w * v;
        }
    }
    Ok(g)
}

pub fn riemannian_grad(reads: &ReadMatrix, eps: Smoothing, x: &UnitVector) -> Result<TangentVector> {
    let g = euclidean_grad(reads, eps, x)?;
    project_tangent(x, &g)
}

/// Riemannian Hessian applied to `xi`, matrix-free.
pub fn hess_vec(
    reads: &ReadMatrix,
    eps: Smoothing,
    x: &UnitVector,
    xi: &TangentVector,
) -> Result<TangentVector> {
    reads.check_point(x)?;
    check_len(x.dim(), xi.base().dim())?;
    if xi.base() != x {
        return Err(Error::Contract("Hessian direction is not based at the evaluation point"));
    }
    let e = eps.get();
    let xc = x.coords();
    let mut hv = vec![0.0; reads.cols];
    // x·Grad f(x) = -Σ_i u_i^2 / s_i
    let mut x_dot_grad = 0.0;
    for i in 0..reads.rows {
        let u = reads.row_dot(i, xc);
        let s2 = u * u + e;
        let s = s2.sqrt();
        x_dot_grad -= u * u / s;
        let w = e * reads.row_dot(i, xi.dir()) / (s2 * s);
        if w != 0.0 {
            for (j, v) in reads.row(i) {
                hv[j] -= w * v;
            }
        }
    }
    let projected = project_tangent(x, &hv)?;
    projected.plus_scaled(-x_dot_grad, xi)
}

/// The smoothed cost bound to a read matrix, as consumed by the solver.
#[derive(Debug, Clone, Copy)]
pub struct SmoothedL1<'a> {
    pub reads: &'a ReadMatrix,
    pub eps: Smoothing,
}

impl<'a> SmoothedL1<'a> {
    pub fn new(reads: &'a ReadMatrix, eps: Smoothing) -> Self {
        Self { reads, eps }
    }
}

impl Objective for SmoothedL1<'_> {
    fn cost(&self, x: &UnitVector) -> Result<f64> {
        cost(self.reads, self.eps, x)
    }

    fn gradient(&self, x: &UnitVector) -> Result<TangentVector> {
        riemannian_grad(self.reads, self.eps, x)
    }

    fn hess_vec(&self, x: &UnitVector, xi: &TangentVector) -> Result<TangentVector> {
        hess_vec(self.reads, self.eps, x, xi)
    }

    fn cost_decrease(&self, x: &UnitVector, y: &UnitVector) -> Result<f64> {
        cost_difference(self.reads, self.eps, x, y)
    }
}

/// Lipschitz and curvature bounds of the smoothed cost on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticConstants {
    /// Lipschitz constant of the Riemannian gradient: `n Σ_i |m_i^T m_i|_F / sqrt(ε)`.
    pub beta: f64,
    /// Hessian bound: `(n^2 / ε) (Σ_i |m_i|_2^2)^2`.
    pub beta_h: f64,
    /// Radial Lipschitz coefficient of `f ∘ R`: `Σ_i (|m_i|_2^3 + |m_i|_2^2)`.
    pub beta_rl: f64,
}

pub fn diagnostic_constants(reads: &ReadMatrix, eps: Smoothing) -> DiagnosticConstants {
    let n = reads.cols as f64;
    let e = eps.get();
    // Entries are ±1, so |m_i|_2^2 = |Ω_i| and |m_i^T m_i|_F = |m_i|_2^2.
    let sq: Vec<f64> = (0..reads.rows).map(|i| reads.row_count(i) as f64).collect();
    let sum_sq: f64 = sq.iter().sum();
    DiagnosticConstants {
        beta: n * sum_sq / e.sqrt(),
        beta_h: n * n / e * sum_sq * sum_sq,
        beta_rl: sq.iter().map(|s| s.powf(1.5) + s).sum(),
    }
}
