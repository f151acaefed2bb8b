//! Periodic piecewise-linear Galerkin discretizations of 1D conservation-law
//! systems `U_t + F(U, U_x)_x = S(U, U_x)` on `(0, 1)`.
//!
//! Unknowns are stored node-major: component `c` of node `i` sits at
//! `i * p + c`.

mod models;
mod nonconservative;
mod system;
mod variable_map;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::quadrature::GaussRule;

pub use models::{Burgers1D, Euler1D};
pub use nonconservative::{
    build_nonconservative_system, ModifiedScheme, NonconservativeRunner, NonconservativeScheme,
    NonconservativeSystem,
};
pub use system::{build_conslaw_system, ConsLawStabilization, ConsLawSystem};
pub use variable_map::{pressure_primitive_map, PressurePrimitiveMap, VariableMap};

/// A system of `p` conservation laws with flux `F(U, U_x, x, t)` and source
/// `S(U, U_x, x, t)`, both periodic in `x`.
pub trait ConservationLawModel {
    fn components(&self) -> usize;

    /// `Err(reason)` when `u` lies outside the set on which the flux is defined.
    fn admissibility(&self, _u: &DVector<f64>) -> std::result::Result<(), String> {
        Ok(())
    }

    fn flux(&self, u: &DVector<f64>, u_x: &DVector<f64>, x: f64, t: f64) -> DVector<f64>;

    fn source(&self, u: &DVector<f64>, u_x: &DVector<f64>, x: f64, t: f64) -> DVector<f64>;

    /// `(dF/dU, dF/dU_x)`.
    fn flux_jacobians(
        &self,
        u: &DVector<f64>,
        u_x: &DVector<f64>,
        x: f64,
        t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>);

    /// `(dS/dU, dS/dU_x)`.
    fn source_jacobians(
        &self,
        u: &DVector<f64>,
        u_x: &DVector<f64>,
        x: f64,
        t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>);
}

/// Periodic linear nodal space on a uniform mesh of `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicFemSpace {
    pub n_elements: usize,
    pub dx: f64,
}

impl PeriodicFemSpace {
    pub fn new(n_elements: usize) -> Result<Self> {
        if n_elements < 2 {
            return Err(Error::Domain(format!(
                "a periodic mesh needs at least two elements, got {n_elements}"
            )));
        }
        Ok(Self {
            n_elements,
            dx: 1.0 / n_elements as f64,
        })
    }

    /// Number of distinct nodes; node `n_elements` wraps to node 0.
    pub fn n_nodes(&self) -> usize {
        self.n_elements
    }

    pub fn dimension(&self, p: usize) -> usize {
        self.n_nodes() * p
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    /// Global node indices of element `e`.
    pub fn element_nodes(&self, e: usize) -> [usize; 2] {
        [e, (e + 1) % self.n_elements]
    }

    pub fn map(&self, e: usize, xi: f64) -> f64 {
        (e as f64 + xi) * self.dx
    }

    /// Nodal interpolant of a vector-valued function.
    pub fn interpolate(&self, p: usize, f: impl Fn(f64) -> DVector<f64>) -> Result<DVector<f64>> {
        let mut out = DVector::zeros(self.dimension(p));
        for i in 0..self.n_nodes() {
            let v = f(self.node(i));
            check_dim(p, v.len())?;
            out.rows_mut(i * p, p).copy_from(&v);
        }
        Ok(out)
    }

    /// Coefficients of the constant test function `e_j`.
    pub fn unit_vector(&self, p: usize, component: usize) -> DVector<f64> {
        DVector::from_fn(self.dimension(p), |k, _| {
            if k % p == component {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Value and slope of the discrete field at reference point `xi` of element `e`.
    pub fn evaluate(
        &self,
        p: usize,
        coeffs: &DVector<f64>,
        e: usize,
        xi: f64,
    ) -> (DVector<f64>, DVector<f64>) {
        let [a, b] = self.element_nodes(e);
        let left = coeffs.rows(a * p, p);
        let right = coeffs.rows(b * p, p);
        let value = left * (1.0 - xi) + right * xi;
        let slope = (right - left) / self.dx;
        (value, slope)
    }
}

pub(crate) fn inadmissible(
    space: &PeriodicFemSpace,
    e: usize,
    q: usize,
    xi: f64,
    detail: String,
) -> Error {
    Error::Inadmissible {
        element: e,
        point: q,
        x: space.map(e, xi),
        detail,
    }
}

pub(crate) fn rule() -> GaussRule {
    GaussRule::three_point()
}

/// Component-wise `∫ U^h dΩ` of conserved-variable coefficients.
pub fn total_conserved(
    space: &PeriodicFemSpace,
    p: usize,
    coeffs: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dim(space.dimension(p), coeffs.len())?;
    let mut total = DVector::zeros(p);
    for e in 0..space.n_elements {
        for (xi, w) in rule().iter() {
            let (u, _) = space.evaluate(p, coeffs, e, xi);
            total += u * (w * space.dx);
        }
    }
    Ok(total)
}
