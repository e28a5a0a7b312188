use super::DiagnosticsError;
use crate::grid::MassGrid;
use crate::model::{friction_coefficient, ModelParams, StationaryProfile, TransformedState};
use crate::pow::Power;

/// Weights of the three-point derivative at `ts[at]` for nonuniform spacing.
fn derivative_weights(ts: [f64; 3], at: usize) -> Result<[f64; 3], DiagnosticsError> {
    let [t0, t1, t2] = ts;
    if !(t0 < t1 && t1 < t2) {
        return Err(DiagnosticsError::BadTimeWindow);
    }
    let x = ts[at];
    // derivative of the quadratic Lagrange basis at x
    let l0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
    let l1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
    let l2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
    Ok([l0, l1, l2])
}

/// Sup over cells of the residual of the effective-viscous-flux identity
///
/// `A((cQ)^gamma - (cQ_inf)^gamma) + B/(theta rho_l) ((cQ)^theta)_t
///   + int_0^x u_t dy + int_0^x h(Q) u|u| dy = 0`,
///
/// evaluated at `window[at]`. Time derivatives use the three-point divided
/// difference over the window (centered when `at == 1`); the integrals are
/// cumulative sums over node control volumes.
pub fn flux_identity_residual(
    window: [&TransformedState; 3],
    at: usize,
    grid: &MassGrid,
    p: &ModelParams,
    stationary: &StationaryProfile,
) -> Result<f64, DiagnosticsError> {
    if at > 2 {
        return Err(DiagnosticsError::BadTimeWindow);
    }
    if window.iter().any(|s| !s.fits(grid)) {
        return Err(DiagnosticsError::ShapeMismatch);
    }
    let w = derivative_weights([window[0].t, window[1].t, window[2].t], at)?;
    let gamma = Power::new(p.gamma);
    let theta = Power::new(p.theta);
    let visc_scale = p.viscosity_coeff / (p.theta * p.rho_l);
    let here = window[at];
    let n = grid.n_cells();
    let mut running = 0.0;
    let mut worst = 0.0_f64;
    for j in 0..n {
        // node j closes the integral up to the center of cell j
        let u_t = w[0] * window[0].u[j] + w[1] * window[1].u[j] + w[2] * window[2].u[j];
        let q_node = if j == 0 {
            here.q[0]
        } else {
            0.5 * (here.q[j - 1] + here.q[j])
        };
        let u = here.u[j];
        let fric = friction_coefficient(q_node, p) * u * u.abs();
        running += grid.node_weight(j) * (u_t + fric);

        let c = here.c[j];
        let cq_theta_t = w[0] * theta.eval(c * window[0].q[j])
            + w[1] * theta.eval(c * window[1].q[j])
            + w[2] * theta.eval(c * window[2].q[j]);
        let pressure = p.pressure_coeff * gamma.eval(c * here.q[j]);
        let r = pressure - stationary.pressure_inf[j] + visc_scale * cq_theta_t + running;
        worst = worst.max(r.abs());
    }
    if !worst.is_finite() {
        return Err(DiagnosticsError::NonFinite(here.t));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial_data, InitialDataSpec};

    #[test]
    fn weights_are_exact_for_quadratics() {
        let ts = [0.0, 0.3, 1.0];
        let f = |t: f64| 2.0 * t * t - t + 0.5;
        let df = |t: f64| 4.0 * t - 1.0;
        for at in 0..3 {
            let w = derivative_weights(ts, at).unwrap();
            let d = w[0] * f(ts[0]) + w[1] * f(ts[1]) + w[2] * f(ts[2]);
            assert!((d - df(ts[at])).abs() < 1e-13);
        }
        assert!(derivative_weights([0.0, 0.0, 1.0], 1).is_err());
    }

    #[test]
    fn stationary_window_has_no_residual() {
        let g = MassGrid::new(32).unwrap();
        let p = ModelParams::default();
        let st = StationaryProfile::new(&g, &p);
        let s0 = build_initial_data(&InitialDataSpec::stationary(), &g, &p).unwrap();
        let s1 = TransformedState {
            t: 0.1,
            ..s0.clone()
        };
        let s2 = TransformedState {
            t: 0.3,
            ..s0.clone()
        };
        let r = flux_identity_residual([&s0, &s1, &s2], 1, &g, &p, &st).unwrap();
        assert!(r < 1e-14, "{r}");
    }

    #[test]
    fn frozen_state_reduces_to_pressure_gap() {
        let g = MassGrid::new(32).unwrap();
        let p = ModelParams::default();
        let st = StationaryProfile::new(&g, &p);
        let mut s0 = build_initial_data(&InitialDataSpec::default(), &g, &p).unwrap();
        s0.u.iter_mut().for_each(|v| *v = 0.0);
        let s1 = TransformedState {
            t: 0.5,
            ..s0.clone()
        };
        let s2 = TransformedState {
            t: 1.0,
            ..s0.clone()
        };
        let r = flux_identity_residual([&s0, &s1, &s2], 1, &g, &p, &st).unwrap();
        let want = s0
            .cq()
            .iter()
            .zip(&st.cq_inf)
            .map(|(a, b)| (a * a - b * b).abs())
            .fold(0.0, f64::max);
        assert!((r - want).abs() < 1e-14);
    }
}
