//! Uniform staggered mass grid on `[0, 1]`.
//!
//! Cell-centered: `c`, `Q`, pressure and stresses. Node-centered: `u`.
//! Node `0` sits on the vacuum boundary and owns the half control volume
//! `[0, dx/2]`; the last node carries the Dirichlet condition `u = 0`.

use thiserror::Error;

pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least {MIN_CELLS} cells, got {0}")]
    TooFewCells(usize),
    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassGrid {
    n_cells: usize,
    dx: f64,
    centers: Vec<f64>,
    nodes: Vec<f64>,
}

impl MassGrid {
    pub fn new(n_cells: usize) -> Result<Self, GridError> {
        if n_cells < MIN_CELLS {
            return Err(GridError::TooFewCells(n_cells));
        }
        let dx = 1.0 / n_cells as f64;
        let centers = (0..n_cells).map(|j| (j as f64 + 0.5) * dx).collect();
        let nodes = (0..=n_cells).map(|j| j as f64 * dx).collect();
        Ok(Self {
            n_cells,
            dx,
            centers,
            nodes,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `x_{j+1/2}`
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// `x_j`, both endpoints included.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Control-volume length of node `i`: `dx/2` at both ends, `dx` inside.
    /// These weights sum to one.
    #[inline]
    pub fn node_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_cells {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// `(u_{j+1} - u_j) / dx` for every cell.
    pub fn cell_gradient(&self, u: &[f64]) -> Result<Vec<f64>, GridError> {
        self.check(u, self.n_nodes(), "node field")?;
        let mut out = vec![0.0; self.n_cells];
        self.cell_gradient_into(u, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn cell_gradient_into(&self, u: &[f64], out: &mut [f64]) {
        let inv = 1.0 / self.dx;
        for (o, w) in out.iter_mut().zip(u.windows(2)) {
            *o = (w[1] - w[0]) * inv;
        }
    }

    /// Divergence of a cell field at nodes `0..n_cells-1`.
    ///
    /// Interior node `i`: `(s_{i+1/2} - s_{i-1/2}) / dx`. Node `0` uses the
    /// boundary value over its half control volume:
    /// `(s_{1/2} - left) / (dx/2)`.
    pub fn node_divergence(&self, sigma: &[f64], left: f64) -> Result<Vec<f64>, GridError> {
        self.check(sigma, self.n_cells, "cell field")?;
        let mut out = Vec::with_capacity(self.n_cells);
        out.push((sigma[0] - left) / self.node_weight(0));
        for w in sigma.windows(2) {
            out.push((w[1] - w[0]) / self.dx);
        }
        Ok(out)
    }

    fn check(&self, v: &[f64], expected: usize, what: &'static str) -> Result<(), GridError> {
        if v.len() != expected {
            return Err(GridError::LengthMismatch {
                what,
                expected,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Cell averages of a node field.
    pub fn node_to_cell(&self, u: &[f64]) -> Result<Vec<f64>, GridError> {
        self.check(u, self.n_nodes(), "node field")?;
        Ok(u.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
    }
}
