use crate::grid::MassGrid;

/// Evolved fields on the staggered mass grid at one time instant.
///
/// `c` and `q` live at cell centers, `u` at nodes. `c` never changes after
/// construction and the last velocity entry is held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedState {
    pub t: f64,
    pub c: Vec<f64>,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
}

impl TransformedState {
    /// `cQ` per cell.
    pub fn cq(&self) -> Vec<f64> {
        self.c.iter().zip(&self.q).map(|(c, q)| c * q).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.q.iter().all(|v| v.is_finite())
            && self.u.iter().all(|v| v.is_finite())
    }

    pub fn fits(&self, grid: &MassGrid) -> bool {
        self.c.len() == grid.n_cells()
            && self.q.len() == grid.n_cells()
            && self.u.len() == grid.n_nodes()
    }
}
