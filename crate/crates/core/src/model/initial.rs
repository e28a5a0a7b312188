use std::f64::consts::PI;

use super::{stationary_cq, ModelError, ModelParams, TransformedState};
use crate::grid::MassGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `cQ0 = kappa(x) x^(1/gamma)` with a sinusoidally modulated envelope
    /// `kappa` between `kappa_lo` and `kappa_hi`.
    Modulated,
    /// `cQ0 = cQ_inf` exactly; the envelope fields are ignored.
    Stationary,
}

/// Parametric initial data with a power-law vacuum profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataSpec {
    pub profile: ProfileKind,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    /// `c0(x) = c_amp x^alpha`
    pub c_amp: f64,
    /// `u0(x) = u_amp sin(pi x) (1 - x)`
    pub u_amp: f64,
    pub perturb_wavenumber: u32,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Modulated,
            kappa_lo: 0.8,
            kappa_hi: 1.2,
            c_amp: 1.0,
            u_amp: 0.05,
            perturb_wavenumber: 2,
        }
    }
}

impl InitialDataSpec {
    /// Initial data that coincides with the stationary state.
    pub fn stationary() -> Self {
        Self {
            profile: ProfileKind::Stationary,
            kappa_lo: 1.0,
            kappa_hi: 1.0,
            u_amp: 0.0,
            ..Self::default()
        }
    }

    /// Envelope factor `kappa(x)`.
    pub fn kappa(&self, x: f64) -> f64 {
        let s = (2.0 * PI * f64::from(self.perturb_wavenumber) * x).sin();
        self.kappa_lo + (self.kappa_hi - self.kappa_lo) * 0.5 * (1.0 + s)
    }

    pub fn velocity(&self, x: f64) -> f64 {
        self.u_amp * (PI * x).sin() * (1.0 - x)
    }

    fn check(&self) -> Result<(), ModelError> {
        let finite = [self.kappa_lo, self.kappa_hi, self.c_amp, self.u_amp]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::InvalidInitialData("non-finite field".into()));
        }
        if self.profile == ProfileKind::Modulated {
            if !(self.kappa_lo > 0.0) {
                return Err(ModelError::InvalidInitialData(format!(
                    "kappa_lo = {} must be positive",
                    self.kappa_lo
                )));
            }
            if self.kappa_lo > self.kappa_hi {
                return Err(ModelError::InvalidInitialData(format!(
                    "kappa_lo = {} exceeds kappa_hi = {}",
                    self.kappa_lo, self.kappa_hi
                )));
            }
        }
        if !(self.c_amp > 0.0) {
            return Err(ModelError::InvalidInitialData(format!(
                "c_amp = {} must be positive",
                self.c_amp
            )));
        }
        Ok(())
    }
}

/// Samples the initial state at `t = 0`.
///
/// `Q0 = cQ0 / c0` is formed with the `x^alpha` factor cancelled
/// analytically, so nothing is divided by a vanishing `c0` near the vacuum.
pub fn build_initial_data(
    spec: &InitialDataSpec,
    grid: &MassGrid,
    p: &ModelParams,
) -> Result<TransformedState, ModelError> {
    spec.check()?;
    let inv_gamma = 1.0 / p.gamma;
    let c: Vec<f64> = grid
        .centers()
        .iter()
        .map(|&x| spec.c_amp * x.powf(p.alpha))
        .collect();
    let q: Vec<f64> = grid
        .centers()
        .iter()
        .map(|&x| {
            let scale = match spec.profile {
                ProfileKind::Modulated => spec.kappa(x),
                ProfileKind::Stationary => stationary_cq(1.0, p).expect("x = 1 is in range"),
            };
            scale * x.powf(inv_gamma - p.alpha) / spec.c_amp
        })
        .collect();
    let mut u: Vec<f64> = grid.nodes().iter().map(|&x| spec.velocity(x)).collect();
    *u.last_mut().expect("grid has nodes") = 0.0;
    Ok(TransformedState { t: 0.0, c, q, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StationaryProfile;

    #[test]
    fn unit_envelope_is_stationary() {
        let p = ModelParams::default();
        let g = MassGrid::new(50).unwrap();
        let spec = InitialDataSpec {
            kappa_lo: 1.0,
            kappa_hi: 1.0,
            u_amp: 0.0,
            perturb_wavenumber: 7,
            ..InitialDataSpec::default()
        };
        let s = build_initial_data(&spec, &g, &p).unwrap();
        let st = StationaryProfile::new(&g, &p);
        for (a, b) in s.cq().iter().zip(&st.cq_inf) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(s.u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stationary_kind_tracks_gravity() {
        let p = ModelParams {
            gravity: 3.0,
            gamma: 1.6,
            alpha: 0.3,
            ..ModelParams::default()
        };
        let g = MassGrid::new(40).unwrap();
        let s = build_initial_data(&InitialDataSpec::stationary(), &g, &p).unwrap();
        let st = StationaryProfile::new(&g, &p);
        for (a, b) in s.cq().iter().zip(&st.cq_inf) {
            assert!((a / b - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn envelope_holds() {
        let p = ModelParams {
            alpha: 0.2,
            ..ModelParams::default()
        };
        let g = MassGrid::new(333).unwrap();
        let spec = InitialDataSpec::default();
        let s = build_initial_data(&spec, &g, &p).unwrap();
        let tol = 1e-14;
        for (cq, x) in s.cq().iter().zip(g.centers()) {
            let r = cq / x.powf(0.5);
            assert!(r >= 0.8 * (1.0 - tol) && r <= 1.2 * (1.0 + tol), "{r}");
        }
        assert_eq!(*s.u.last().unwrap(), 0.0);
        for (c, x) in s.c.iter().zip(g.centers()) {
            assert!((c - x.powf(0.2)).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_envelope() {
        let p = ModelParams::default();
        let g = MassGrid::new(8).unwrap();
        let mut spec = InitialDataSpec {
            kappa_lo: 0.0,
            ..InitialDataSpec::default()
        };
        assert!(build_initial_data(&spec, &g, &p).is_err());
        spec.kappa_lo = 1.5;
        assert!(build_initial_data(&spec, &g, &p).is_err());
    }

    #[test]
    fn zero_velocity_amplitude() {
        let p = ModelParams::default();
        let g = MassGrid::new(8).unwrap();
        let spec = InitialDataSpec {
            u_amp: 0.0,
            ..InitialDataSpec::default()
        };
        let s = build_initial_data(&spec, &g, &p).unwrap();
        assert!(s.u.iter().all(|&v| v == 0.0));
    }
}
