use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A change of variables `U(V)` from nonconservation to conservation
/// variables.
pub trait VariableMap {
    fn components(&self) -> usize;

    fn admissibility(&self, _v: &DVector<f64>) -> std::result::Result<(), String> {
        Ok(())
    }

    fn to_conserved(&self, v: &DVector<f64>) -> DVector<f64>;

    /// `dU/dV`.
    fn jacobian(&self, v: &DVector<f64>) -> DMatrix<f64>;

    /// `d(J(V) w)/dV` for a fixed vector `w`, where `J = dU/dV`.
    fn jacobian_derivative(&self, v: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64>;
}

/// Ideal-gas map from `V = (p, u, T)` to `U = (rho, rho u, E)` with
/// `rho = p / (R T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressurePrimitiveMap {
    pub gamma_gas: f64,
    pub r_gas: f64,
}

pub fn pressure_primitive_map(gamma_gas: f64, r_gas: f64) -> Result<PressurePrimitiveMap> {
    if !(gamma_gas > 1.0 && gamma_gas.is_finite()) {
        return Err(Error::Domain(format!(
            "ratio of specific heats must exceed 1, got {gamma_gas}"
        )));
    }
    if !(r_gas > 0.0 && r_gas.is_finite()) {
        return Err(Error::Domain(format!(
            "gas constant must be positive, got {r_gas}"
        )));
    }
    Ok(PressurePrimitiveMap { gamma_gas, r_gas })
}

impl Default for PressurePrimitiveMap {
    fn default() -> Self {
        Self {
            gamma_gas: 1.4,
            r_gas: 1.0,
        }
    }
}

impl PressurePrimitiveMap {
    /// Inverse map, defined where density and pressure are positive.
    pub fn from_conserved(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let rho = u[0];
        let vel = u[1] / rho;
        let p = (self.gamma_gas - 1.0) * (u[2] - 0.5 * rho * vel * vel);
        if !(rho > 0.0 && p > 0.0) {
            return Err(Error::Domain(format!(
                "no primitive state for rho {rho}, p {p}"
            )));
        }
        Ok(DVector::from_vec(vec![p, vel, p / (self.r_gas * rho)]))
    }
}

impl VariableMap for PressurePrimitiveMap {
    fn components(&self) -> usize {
        3
    }

    fn admissibility(&self, v: &DVector<f64>) -> std::result::Result<(), String> {
        if !v.iter().all(|x| x.is_finite()) {
            return Err("non-finite state".into());
        }
        if v[0] <= 0.0 {
            return Err(format!("pressure {} is not positive", v[0]));
        }
        if v[2] <= 0.0 {
            return Err(format!("temperature {} is not positive", v[2]));
        }
        Ok(())
    }

    fn to_conserved(&self, v: &DVector<f64>) -> DVector<f64> {
        let (p, vel, temp) = (v[0], v[1], v[2]);
        let rho = p / (self.r_gas * temp);
        DVector::from_vec(vec![
            rho,
            rho * vel,
            p / (self.gamma_gas - 1.0) + 0.5 * rho * vel * vel,
        ])
    }

    fn jacobian(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let (p, vel, temp) = (v[0], v[1], v[2]);
        let rt = self.r_gas * temp;
        let rt2 = rt * temp;
        #[rustfmt::skip]
        let j = DMatrix::from_row_slice(3, 3, &[
            1.0 / rt, 0.0, -p / rt2,
            vel / rt, p / rt, -p * vel / rt2,
            1.0 / (self.gamma_gas - 1.0) + 0.5 * vel * vel / rt, p * vel / rt, -0.5 * p * vel * vel / rt2,
        ]);
        j
    }

    fn jacobian_derivative(&self, v: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let (p, vel, temp) = (v[0], v[1], v[2]);
        let (wp, wu, wt) = (w[0], w[1], w[2]);
        let rt = self.r_gas * temp;
        let rt2 = rt * temp;
        let rt3 = rt2 * temp;
        #[rustfmt::skip]
        let d = DMatrix::from_row_slice(3, 3, &[
            -wt / rt2,
            0.0,
            -wp / rt2 + 2.0 * wt * p / rt3,

            wu / rt - wt * vel / rt2,
            wp / rt - wt * p / rt2,
            -(wp * vel + wu * p) / rt2 + 2.0 * wt * p * vel / rt3,

            wu * vel / rt - 0.5 * wt * vel * vel / rt2,
            (wp * vel + wu * p) / rt - wt * p * vel / rt2,
            -0.5 * wp * vel * vel / rt2 - wu * p * vel / rt2 + wt * p * vel * vel / rt3,
        ]);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<DVector<f64>> {
        vec![
            DVector::from_vec(vec![1.0, 0.0, 1.0]),
            DVector::from_vec(vec![0.8, 0.4, 1.3]),
            DVector::from_vec(vec![2.2, -1.1, 0.6]),
        ]
    }

    #[test]
    fn rest_state() {
        let m = pressure_primitive_map(1.4, 1.0).unwrap();
        let u = m.to_conserved(&DVector::from_vec(vec![1.0, 0.0, 1.0]));
        assert!((u - DVector::from_vec(vec![1.0, 0.0, 2.5])).amax() < 1e-15);
    }

    #[test]
    fn jacobian_matches_differences() {
        let m = PressurePrimitiveMap::default();
        for v in samples() {
            let j = m.jacobian(&v);
            for k in 0..3 {
                let h = 1e-6;
                let mut e = DVector::zeros(3);
                e[k] = h;
                let fd = (m.to_conserved(&(&v + &e)) - m.to_conserved(&(&v - &e))) / (2.0 * h);
                assert!((j.column(k) - &fd).amax() <= 1e-6 * fd.amax().max(1.0));
            }
        }
    }

    #[test]
    fn jacobian_derivative_matches_differences() {
        let m = PressurePrimitiveMap::default();
        let w = DVector::from_vec(vec![0.3, -0.7, 1.1]);
        for v in samples() {
            let d = m.jacobian_derivative(&v, &w);
            for k in 0..3 {
                let h = 1e-6;
                let mut e = DVector::zeros(3);
                e[k] = h;
                let fd = (m.jacobian(&(&v + &e)) * &w - m.jacobian(&(&v - &e)) * &w) / (2.0 * h);
                assert!((d.column(k) - &fd).amax() <= 1e-6 * fd.amax().max(1.0));
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = PressurePrimitiveMap::default();
        for v in samples() {
            let back = m.from_conserved(&m.to_conserved(&v)).unwrap();
            assert!((back - v).amax() < 1e-14);
        }
    }

    #[test]
    fn invalid_parameters_and_states() {
        assert!(pressure_primitive_map(1.0, 1.0).is_err());
        assert!(pressure_primitive_map(1.4, 0.0).is_err());
        let m = PressurePrimitiveMap::default();
        assert!(m
            .admissibility(&DVector::from_vec(vec![1.0, 0.0, 0.0]))
            .is_err());
        assert!(m
            .admissibility(&DVector::from_vec(vec![-1.0, 0.0, 1.0]))
            .is_err());
    }
}
