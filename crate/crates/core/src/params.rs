//! Generalized-α parameter sets.

use serde::Serialize;

use crate::error::{Error, Result};

const FLAG_TOL: f64 = 1e-14;

/// The `(alpha_m, alpha_f, gamma)` triple that defines a generalized-α scheme.
///
/// `beta` is only used by the second-order (structural dynamics) form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenAlphaParams {
    pub alpha_m: f64,
    pub alpha_f: f64,
    pub gamma: f64,
    pub rho_inf: Option<f64>,
    pub beta: Option<f64>,
}

impl GenAlphaParams {
    /// The standard one-parameter family controlled by the high-frequency
    /// spectral radius `rho_inf`.
    pub fn from_rho_inf(rho_inf: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho_inf) {
            return Err(Error::Domain(format!(
                "rho_inf must lie in [0, 1], got {rho_inf}"
            )));
        }
        let alpha_m = 0.5 * (3.0 - rho_inf) / (1.0 + rho_inf);
        let alpha_f = 1.0 / (1.0 + rho_inf);
        Ok(Self {
            alpha_m,
            alpha_f,
            gamma: alpha_f,
            rho_inf: Some(rho_inf),
            beta: None,
        })
    }

    /// Stores the triple verbatim. Non-second-order and unstable combinations
    /// are accepted.
    pub fn new(alpha_m: f64, alpha_f: f64, gamma: f64) -> Result<Self> {
        if !(alpha_m.is_finite() && alpha_f.is_finite() && gamma.is_finite()) {
            return Err(Error::Domain(format!(
                "parameters must be finite, got ({alpha_m}, {alpha_f}, {gamma})"
            )));
        }
        Ok(Self {
            alpha_m,
            alpha_f,
            gamma,
            rho_inf: None,
            beta: None,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        self.beta = Some(beta);
        Ok(self)
    }

    /// Attaches `beta = (1 + alpha_m - alpha_f)^2 / 4`.
    pub fn with_default_beta(mut self) -> Self {
        let s = 1.0 + self.alpha_m - self.alpha_f;
        self.beta = Some(0.25 * s * s);
        self
    }

    /// Distance of `gamma` from the second-order value `1/2 + alpha_m - alpha_f`.
    pub fn order_defect(&self) -> f64 {
        self.gamma - (0.5 + self.alpha_m - self.alpha_f)
    }

    pub fn is_second_order(&self) -> bool {
        self.order_defect().abs() <= FLAG_TOL
    }

    pub fn is_unconditionally_stable(&self) -> bool {
        self.alpha_m >= self.alpha_f - FLAG_TOL && self.alpha_f >= 0.5 - FLAG_TOL
    }
}

pub fn params_from_rho_inf(rho_inf: f64) -> Result<GenAlphaParams> {
    GenAlphaParams::from_rho_inf(rho_inf)
}

pub fn make_params(alpha_m: f64, alpha_f: f64, gamma: f64) -> Result<GenAlphaParams> {
    GenAlphaParams::new(alpha_m, alpha_f, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_inf_endpoints() {
        let p = params_from_rho_inf(1.0).unwrap();
        assert_eq!((p.alpha_m, p.alpha_f, p.gamma), (0.5, 0.5, 0.5));
        let p = params_from_rho_inf(0.0).unwrap();
        assert_eq!((p.alpha_m, p.alpha_f, p.gamma), (1.5, 1.0, 1.0));
        let p = params_from_rho_inf(0.5).unwrap();
        assert!((p.alpha_m - 5.0 / 6.0).abs() <= 1e-14);
        assert!((p.alpha_f - 2.0 / 3.0).abs() <= 1e-14);
        assert!((p.gamma - 2.0 / 3.0).abs() <= 1e-14);
        assert_eq!(p.rho_inf, Some(0.5));
    }

    #[test]
    fn rho_inf_out_of_range() {
        assert!(matches!(params_from_rho_inf(-0.1), Err(Error::Domain(_))));
        assert!(matches!(params_from_rho_inf(1.5), Err(Error::Domain(_))));
        assert!(matches!(
            params_from_rho_inf(f64::NAN),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn explicit_triples() {
        let p = make_params(0.5, 0.5, 0.5).unwrap();
        assert!(p.is_second_order() && p.is_unconditionally_stable());
        assert!(p.rho_inf.is_none());
        assert!(!make_params(0.5, 0.5, 1.0).unwrap().is_second_order());
        assert!(!make_params(0.5, 0.75, 0.25)
            .unwrap()
            .is_unconditionally_stable());
        assert!(make_params(f64::INFINITY, 0.5, 0.5).is_err());
    }

    #[test]
    fn default_beta() {
        let p = params_from_rho_inf(1.0).unwrap().with_default_beta();
        assert_eq!(p.beta, Some(0.25));
        assert!(p.with_beta(-1.0).is_err());
    }

    #[test]
    fn family_is_second_order_and_stable() {
        for k in 0..=100 {
            let p = params_from_rho_inf(k as f64 / 100.0).unwrap();
            assert!(p.is_second_order(), "rho_inf = {}", k as f64 / 100.0);
            assert!(p.is_unconditionally_stable());
        }
    }
}
