use super::DiagnosticsError;
use crate::model::ModelParams;

/// Energy density of `Q` relative to the stationary `Q_inf`:
///
/// `int_{Q_inf}^{Q} A c^gamma (h^gamma - Q_inf^gamma) / (rho_l h^2) dh`
/// in closed form. Nonnegative, zero only at `Q = Q_inf`.
pub fn relative_potential(
    c: f64,
    q: f64,
    q_inf: f64,
    p: &ModelParams,
) -> Result<f64, DiagnosticsError> {
    if !(p.gamma > 1.0) {
        return Err(DiagnosticsError::UnsupportedGamma(p.gamma));
    }
    if !(q > 0.0 && q_inf > 0.0) {
        return Err(DiagnosticsError::NonPositiveDensity { q, q_inf });
    }
    Ok(potential(c.powf(p.gamma), q, q_inf, p))
}

/// `c_gamma` is `c^gamma`, precomputed by callers looping over cells.
#[inline]
pub(crate) fn potential(c_gamma: f64, q: f64, q_inf: f64, p: &ModelParams) -> f64 {
    let g1 = p.gamma - 1.0;
    // factor out Q_inf^(gamma-1) and work with the ratio r = Q / Q_inf
    let r = q / q_inf;
    let bracket = (g1 * r.ln()).exp_m1() / g1 + (1.0 - r) / r;
    let scale = p.pressure_coeff * c_gamma * q_inf.powf(g1) / p.rho_l;
    (scale * bracket).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn zero_at_equilibrium() {
        assert_eq!(relative_potential(1.3, 0.7, 0.7, &unit()).unwrap(), 0.0);
    }

    #[test]
    fn hand_values() {
        let a = relative_potential(1.0, 2.0, 1.0, &unit()).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
        let b = relative_potential(1.0, 0.5, 1.0, &unit()).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_isothermal() {
        let p = ModelParams {
            gamma: 1.0,
            ..unit()
        };
        assert!(matches!(
            relative_potential(1.0, 2.0, 1.0, &p),
            Err(DiagnosticsError::UnsupportedGamma(_))
        ));
    }
}
