use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::ConservationLawModel;
use crate::error::{Error, Result};

/// Viscous Burgers: `F = u^2 / 2 - viscosity u_x`, optional source `s(x, t)`.
#[derive(Clone)]
pub struct Burgers1D {
    pub viscosity: f64,
    pub source: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for Burgers1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Burgers1D")
            .field("viscosity", &self.viscosity)
            .field("source", &self.source.is_some())
            .finish()
    }
}

impl Burgers1D {
    pub fn new(viscosity: f64) -> Result<Self> {
        if !(viscosity >= 0.0 && viscosity.is_finite()) {
            return Err(Error::Domain(format!(
                "viscosity must be nonnegative, got {viscosity}"
            )));
        }
        Ok(Self {
            viscosity,
            source: None,
        })
    }

    pub fn with_source(mut self, s: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(s));
        self
    }
}

impl ConservationLawModel for Burgers1D {
    fn components(&self) -> usize {
        1
    }

    fn admissibility(&self, u: &DVector<f64>) -> std::result::Result<(), String> {
        if u[0].is_finite() {
            Ok(())
        } else {
            Err(format!("non-finite state {}", u[0]))
        }
    }

    fn flux(&self, u: &DVector<f64>, u_x: &DVector<f64>, _x: f64, _t: f64) -> DVector<f64> {
        DVector::from_element(1, 0.5 * u[0] * u[0] - self.viscosity * u_x[0])
    }

    fn source(&self, _u: &DVector<f64>, _u_x: &DVector<f64>, x: f64, t: f64) -> DVector<f64> {
        DVector::from_element(1, self.source.as_ref().map_or(0.0, |s| s(x, t)))
    }

    fn flux_jacobians(
        &self,
        u: &DVector<f64>,
        _u_x: &DVector<f64>,
        _x: f64,
        _t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            DMatrix::from_element(1, 1, u[0]),
            DMatrix::from_element(1, 1, -self.viscosity),
        )
    }

    fn source_jacobians(
        &self,
        _u: &DVector<f64>,
        _u_x: &DVector<f64>,
        _x: f64,
        _t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        (DMatrix::zeros(1, 1), DMatrix::zeros(1, 1))
    }
}

/// Compressible Euler equations for an ideal gas, `U = (rho, rho u, E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler1D {
    pub gamma_gas: f64,
}

impl Default for Euler1D {
    fn default() -> Self {
        Self { gamma_gas: 1.4 }
    }
}

impl Euler1D {
    pub fn new(gamma_gas: f64) -> Result<Self> {
        if !(gamma_gas > 1.0 && gamma_gas.is_finite()) {
            return Err(Error::Domain(format!(
                "ratio of specific heats must exceed 1, got {gamma_gas}"
            )));
        }
        Ok(Self { gamma_gas })
    }

    pub fn pressure(&self, u: &DVector<f64>) -> f64 {
        (self.gamma_gas - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0])
    }

    /// Conserved state from density, velocity and pressure.
    pub fn conserved(&self, rho: f64, velocity: f64, pressure: f64) -> DVector<f64> {
        DVector::from_vec(vec![
            rho,
            rho * velocity,
            pressure / (self.gamma_gas - 1.0) + 0.5 * rho * velocity * velocity,
        ])
    }
}

impl ConservationLawModel for Euler1D {
    fn components(&self) -> usize {
        3
    }

    fn admissibility(&self, u: &DVector<f64>) -> std::result::Result<(), String> {
        if !u.iter().all(|v| v.is_finite()) {
            return Err("non-finite state".into());
        }
        if u[0] <= 0.0 {
            return Err(format!("density {} is not positive", u[0]));
        }
        let p = self.pressure(u);
        if p <= 0.0 {
            return Err(format!("pressure {p} is not positive"));
        }
        Ok(())
    }

    fn flux(&self, u: &DVector<f64>, _u_x: &DVector<f64>, _x: f64, _t: f64) -> DVector<f64> {
        let vel = u[1] / u[0];
        let p = self.pressure(u);
        DVector::from_vec(vec![u[1], u[1] * vel + p, vel * (u[2] + p)])
    }

    fn source(&self, _u: &DVector<f64>, _u_x: &DVector<f64>, _x: f64, _t: f64) -> DVector<f64> {
        DVector::zeros(3)
    }

    fn flux_jacobians(
        &self,
        u: &DVector<f64>,
        _u_x: &DVector<f64>,
        _x: f64,
        _t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let g = self.gamma_gas;
        let (rho, energy) = (u[0], u[2]);
        let vel = u[1] / rho;
        #[rustfmt::skip]
        let a = DMatrix::from_row_slice(3, 3, &[
            0.0, 1.0, 0.0,
            -0.5 * (3.0 - g) * vel * vel, (3.0 - g) * vel, g - 1.0,
            -g * energy * vel / rho + (g - 1.0) * vel.powi(3),
            g * energy / rho - 1.5 * (g - 1.0) * vel * vel,
            g * vel,
        ]);
        (a, DMatrix::zeros(3, 3))
    }

    fn source_jacobians(
        &self,
        _u: &DVector<f64>,
        _u_x: &DVector<f64>,
        _x: f64,
        _t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        (DMatrix::zeros(3, 3), DMatrix::zeros(3, 3))
    }
}
