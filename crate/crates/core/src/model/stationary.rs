use super::{ModelError, ModelParams};
use crate::grid::MassGrid;
use crate::pow::Power;

/// Hydrostatic profile `(cQ_inf)(x) = (g x / A)^(1/gamma)`, the solution of
/// `A (cQ_inf)^gamma_x = g` with `cQ_inf(0) = 0`.
pub fn stationary_cq(x: f64, p: &ModelParams) -> Result<f64, ModelError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ModelError::OutsideDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((p.gravity * x / p.pressure_coeff).powf(1.0 / p.gamma))
}

/// The stationary state sampled on a grid, plus the power-law weights used by
/// the weighted diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryProfile {
    /// `cQ_inf` at cell centers.
    pub cq_inf: Vec<f64>,
    /// `(cQ_inf)^theta` at cell centers.
    pub cq_inf_theta: Vec<f64>,
    /// `A (cQ_inf)^gamma` at cell centers (equal to `g x` up to rounding).
    pub pressure_inf: Vec<f64>,
    /// `x^(1 - 3/gamma)` at cell centers.
    pub weight_l2: Vec<f64>,
    /// `x^(((2+alpha) gamma - theta - 1)/gamma)` at nodes. Entry `0` is unused.
    pub weight_grad: Vec<f64>,
    /// `x^(((3+alpha) gamma - 2 theta - 1)/gamma)` at nodes. Entry `0` is unused.
    pub weight_grad_time: Vec<f64>,
}

impl StationaryProfile {
    pub fn new(grid: &MassGrid, p: &ModelParams) -> Self {
        let cq_inf: Vec<f64> = grid
            .centers()
            .iter()
            .map(|&x| stationary_cq(x, p).expect("cell centers lie in (0,1)"))
            .collect();
        let theta = Power::new(p.theta);
        let gamma = Power::new(p.gamma);
        let cq_inf_theta = cq_inf.iter().map(|&v| theta.eval(v)).collect();
        let pressure_inf = cq_inf
            .iter()
            .map(|&v| p.pressure_coeff * gamma.eval(v))
            .collect();
        let l2 = Power::new(1.0 - 3.0 / p.gamma);
        let weight_l2 = grid.centers().iter().map(|&x| l2.eval(x)).collect();
        let node_weight = |e: f64| -> Vec<f64> {
            let pw = Power::new(e);
            grid.nodes()
                .iter()
                .map(|&x| if x == 0.0 { 0.0 } else { pw.eval(x) })
                .collect()
        };
        let weight_grad = node_weight(((2.0 + p.alpha) * p.gamma - p.theta - 1.0) / p.gamma);
        let weight_grad_time =
            node_weight(((3.0 + p.alpha) * p.gamma - 2.0 * p.theta - 1.0) / p.gamma);
        Self {
            cq_inf,
            cq_inf_theta,
            pressure_inf,
            weight_l2,
            weight_grad,
            weight_grad_time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        let p = ModelParams::default();
        assert_eq!(stationary_cq(0.0, &p).unwrap(), 0.0);
        assert_eq!(stationary_cq(1.0, &p).unwrap(), 1.0);
        assert_eq!(stationary_cq(0.25, &p).unwrap(), 0.5);
        assert!(stationary_cq(1.5, &p).is_err());
        assert!(stationary_cq(-0.1, &p).is_err());
    }

    #[test]
    fn profile_is_increasing_with_linear_pressure() {
        let p = ModelParams {
            gravity: 2.0,
            gamma: 1.7,
            ..ModelParams::default()
        };
        let g = MassGrid::new(64).unwrap();
        let s = StationaryProfile::new(&g, &p);
        assert!(s.cq_inf.windows(2).all(|w| w[1] > w[0]));
        for w in s.pressure_inf.windows(2) {
            assert!(((w[1] - w[0]) / g.dx() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_cell_vanishes_with_refinement() {
        let p = ModelParams::default();
        let first = |n| StationaryProfile::new(&MassGrid::new(n).unwrap(), &p).cq_inf[0];
        assert!(first(16) > first(64));
        assert!(first(4096) < 0.012);
    }
}
