//! Small model problems used by the convergence, amplification and
//! identity studies.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};
use crate::integrator::ResidualSystem;
use crate::second_order::SecondOrderSystem;

/// `u' = lambda u`, written as `R = u' - lambda u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLinear {
    pub lambda: f64,
}

impl ScalarLinear {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    pub fn exact(&self, u0: f64, t: f64) -> f64 {
        u0 * (self.lambda * t).exp()
    }
}

impl ResidualSystem for ScalarLinear {
    fn dimension(&self) -> usize {
        1
    }

    fn residual(&self, u_dot: &DVector<f64>, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        check_dim(1, u.len())?;
        Ok(u_dot - u * self.lambda)
    }

    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        c_u: f64,
        _u_dot: &DVector<f64>,
        _u: &DVector<f64>,
        _t: f64,
        direction: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(direction * (c_dot - c_u * self.lambda))
    }
}

/// `R = u'` in `m` components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeDrift {
    pub m: usize,
}

impl FreeDrift {
    pub fn new(m: usize) -> Self {
        Self { m }
    }
}

impl ResidualSystem for FreeDrift {
    fn dimension(&self) -> usize {
        self.m
    }

    fn residual(&self, u_dot: &DVector<f64>, _u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        check_dim(self.m, u_dot.len())?;
        Ok(u_dot.clone())
    }

    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        _c_u: f64,
        _u_dot: &DVector<f64>,
        _u: &DVector<f64>,
        _t: f64,
        direction: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(direction * c_dot)
    }
}

/// Logistic growth `u' = r u (1 - u)`; exact solution known in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logistic {
    pub rate: f64,
}

impl Logistic {
    pub fn exact(&self, u0: f64, t: f64) -> f64 {
        let e = (self.rate * t).exp();
        u0 * e / (1.0 - u0 + u0 * e)
    }
}

impl ResidualSystem for Logistic {
    fn dimension(&self) -> usize {
        1
    }

    fn residual(&self, u_dot: &DVector<f64>, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        check_dim(1, u.len())?;
        Ok(DVector::from_element(
            1,
            u_dot[0] - self.rate * u[0] * (1.0 - u[0]),
        ))
    }

    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        c_u: f64,
        _u_dot: &DVector<f64>,
        u: &DVector<f64>,
        _t: f64,
        direction: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let d = -self.rate * (1.0 - 2.0 * u[0]);
        Ok(direction * (c_dot + c_u * d))
    }
}

/// Nonlinear pendulum as a first-order pair: `q' = p`, `p' = -sin q`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pendulum;

impl ResidualSystem for Pendulum {
    fn dimension(&self) -> usize {
        2
    }

    fn residual(&self, u_dot: &DVector<f64>, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        check_dim(2, u.len())?;
        check_dim(2, u_dot.len())?;
        Ok(DVector::from_vec(vec![
            u_dot[0] - u[1],
            u_dot[1] + u[0].sin(),
        ]))
    }

    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        c_u: f64,
        _u_dot: &DVector<f64>,
        u: &DVector<f64>,
        _t: f64,
        d: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(vec![
            c_dot * d[0] - c_u * d[1],
            c_dot * d[1] + c_u * u[0].cos() * d[0],
        ]))
    }
}

/// `u'' + omega^2 u = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub omega: f64,
}

impl Oscillator {
    pub fn new(omega: f64) -> Self {
        Self { omega }
    }

    /// Exact displacement for `u(0) = u0`, `u'(0) = v0`.
    pub fn exact(&self, u0: f64, v0: f64, t: f64) -> f64 {
        let w = self.omega;
        u0 * (w * t).cos() + v0 / w * (w * t).sin()
    }
}

impl SecondOrderSystem for Oscillator {
    fn dimension(&self) -> usize {
        1
    }

    fn residual(
        &self,
        u_ddot: &DVector<f64>,
        _u_dot: &DVector<f64>,
        u: &DVector<f64>,
        _t: f64,
    ) -> Result<DVector<f64>> {
        check_dim(1, u.len())?;
        Ok(u_ddot + u * (self.omega * self.omega))
    }

    fn iteration_matrix(
        &self,
        c_ddot: f64,
        _c_dot: f64,
        c_u: f64,
        _u_ddot: &DVector<f64>,
        _u_dot: &DVector<f64>,
        _u: &DVector<f64>,
        _t: f64,
    ) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_element(
            1,
            1,
            c_ddot + c_u * self.omega * self.omega,
        ))
    }
}

/// `R = u''` in `m` components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderDrift {
    pub m: usize,
}

impl SecondOrderDrift {
    pub fn new(m: usize) -> Self {
        Self { m }
    }
}

impl SecondOrderSystem for SecondOrderDrift {
    fn dimension(&self) -> usize {
        self.m
    }

    fn residual(
        &self,
        u_ddot: &DVector<f64>,
        _u_dot: &DVector<f64>,
        _u: &DVector<f64>,
        _t: f64,
    ) -> Result<DVector<f64>> {
        check_dim(self.m, u_ddot.len())?;
        Ok(u_ddot.clone())
    }

    fn iteration_matrix(
        &self,
        c_ddot: f64,
        _c_dot: f64,
        _c_u: f64,
        _u_ddot: &DVector<f64>,
        _u_dot: &DVector<f64>,
        _u: &DVector<f64>,
        _t: f64,
    ) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.m, self.m) * c_ddot)
    }
}
