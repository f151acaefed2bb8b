use nalgebra::{DMatrix, DVector};

use super::{inadmissible, rule, ConservationLawModel, PeriodicFemSpace};
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConsLawStabilization {
    None,
    /// Component-wise streamline operator `Σ_e ∫ tau speed^2 W_x · U_x` with
    /// `tau = dx / (2 |speed|)`.
    Streamline {
        speed: f64,
    },
}

/// Galerkin residual in conservation variables:
/// `∫ U' · W - ∫ F · W_x - ∫ S · W + S_h(U, W)`.
#[derive(Debug, Clone)]
pub struct ConsLawSystem<M> {
    space: PeriodicFemSpace,
    model: M,
    stabilization: ConsLawStabilization,
}

pub fn build_conslaw_system<M: ConservationLawModel>(
    space: PeriodicFemSpace,
    model: M,
    stabilization: ConsLawStabilization,
) -> Result<ConsLawSystem<M>> {
    if let ConsLawStabilization::Streamline { speed } = stabilization {
        if !speed.is_finite() {
            return Err(Error::Configuration(format!(
                "stabilization speed {speed} is not finite"
            )));
        }
    }
    Ok(ConsLawSystem {
        space,
        model,
        stabilization,
    })
}

impl<M: ConservationLawModel> ConsLawSystem<M> {
    pub fn space(&self) -> &PeriodicFemSpace {
        &self.space
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn components(&self) -> usize {
        self.model.components()
    }

    /// `tau speed^2` per element.
    fn streamline_coefficient(&self) -> f64 {
        match self.stabilization {
            ConsLawStabilization::None => 0.0,
            ConsLawStabilization::Streamline { speed } => 0.5 * self.space.dx * speed.abs(),
        }
    }

    /// `S_h(v, w)`, accumulated element by element from slope differences
    /// so that constant `w` in any component cancels exactly.
    pub fn stabilization_form(&self, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        let p = self.components();
        let m = self.space.dimension(p);
        check_dim(m, v.len())?;
        check_dim(m, w.len())?;
        let coef = self.streamline_coefficient();
        let dx = self.space.dx;
        let mut total = 0.0;
        for e in 0..self.space.n_elements {
            let [a, b] = self.space.element_nodes(e);
            for c in 0..p {
                let v_x = (v[b * p + c] - v[a * p + c]) / dx;
                let w_x = (w[b * p + c] - w[a * p + c]) / dx;
                total += coef * w_x * v_x * dx;
            }
        }
        Ok(total)
    }

    /// `∫ S(U^h) dΩ` per component with the residual's quadrature.
    pub fn source_integral(&self, u: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let p = self.components();
        check_dim(self.space.dimension(p), u.len())?;
        let mut total = DVector::zeros(p);
        for e in 0..self.space.n_elements {
            for (q, (xi, w)) in rule().iter().enumerate() {
                let x = self.space.map(e, xi);
                let (val, slope) = self.point(u, e, q, xi)?;
                total += self.model.source(&val, &slope, x, t) * (w * self.space.dx);
            }
        }
        Ok(total)
    }

    fn point(
        &self,
        u: &DVector<f64>,
        e: usize,
        q: usize,
        xi: f64,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let (val, slope) = self.space.evaluate(self.components(), u, e, xi);
        self.model
            .admissibility(&val)
            .map_err(|d| inadmissible(&self.space, e, q, xi, d))?;
        Ok((val, slope))
    }

    /// Residual and, when `coefs = Some((c_dot, c_u))`, the iteration matrix.
    fn assemble(
        &self,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
        coefs: Option<(f64, f64)>,
    ) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let p = self.components();
        let m = self.space.dimension(p);
        check_dim(m, u.len())?;
        check_dim(m, u_dot.len())?;
        let dx = self.space.dx;
        let slopes = [-1.0 / dx, 1.0 / dx];
        let stab = self.streamline_coefficient();
        let mut res = DVector::zeros(m);
        let mut jac = coefs.map(|_| DMatrix::zeros(m, m));
        let eye = DMatrix::<f64>::identity(p, p);
        for e in 0..self.space.n_elements {
            let nodes = self.space.element_nodes(e);
            for (q, (xi, w)) in rule().iter().enumerate() {
                let x = self.space.map(e, xi);
                let shape = [1.0 - xi, xi];
                let wdx = w * dx;
                let (val, slope) = self.point(u, e, q, xi)?;
                let (rate, _) = self.space.evaluate(p, u_dot, e, xi);
                let flux = self.model.flux(&val, &slope, x, t);
                let src = self.model.source(&val, &slope, x, t);
                for a in 0..2 {
                    let local = (&rate - &src) * (shape[a] * wdx) - &flux * (slopes[a] * wdx)
                        + &slope * (stab * slopes[a] * wdx);
                    let mut rows = res.rows_mut(nodes[a] * p, p);
                    rows += local;
                }
                if let (Some(jac), Some((c_dot, c_u))) = (jac.as_mut(), coefs) {
                    let (fa, fax) = self.model.flux_jacobians(&val, &slope, x, t);
                    let (sa, sax) = self.model.source_jacobians(&val, &slope, x, t);
                    for a in 0..2 {
                        for b in 0..2 {
                            let state = -(&fa * shape[b] + &fax * slopes[b]) * (slopes[a] * wdx)
                                - (&sa * shape[b] + &sax * slopes[b]) * (shape[a] * wdx)
                                + &eye * (stab * slopes[a] * slopes[b] * wdx);
                            let block = &eye * (c_dot * shape[a] * shape[b] * wdx) + state * c_u;
                            let mut view = jac.view_mut((nodes[a] * p, nodes[b] * p), (p, p));
                            view += block;
                        }
                    }
                }
            }
        }
        Ok((res, jac))
    }
}

impl<M: ConservationLawModel> crate::integrator::ResidualSystem for ConsLawSystem<M> {
    fn dimension(&self) -> usize {
        self.space.dimension(self.components())
    }

    fn residual(&self, u_dot: &DVector<f64>, u: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        self.assemble(u_dot, u, t, None).map(|(r, _)| r)
    }

    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        c_u: f64,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
        direction: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim(self.dimension(), direction.len())?;
        Ok(self.iteration_matrix(c_dot, c_u, u_dot, u, t)? * direction)
    }

    fn iteration_matrix(
        &self,
        c_dot: f64,
        c_u: f64,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
    ) -> Result<DMatrix<f64>> {
        let (_, jac) = self.assemble(u_dot, u, t, Some((c_dot, c_u)))?;
        Ok(jac.expect("requested"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conslaw::{Burgers1D, Euler1D};
    use crate::integrator::{step_traced, ResidualSystem, StatePair};
    use crate::newton::NewtonSettings;
    use crate::params::params_from_rho_inf;
    use std::f64::consts::PI;

    fn sine(space: &PeriodicFemSpace, amp: f64) -> DVector<f64> {
        space
            .interpolate(1, |x| DVector::from_element(1, amp * (2.0 * PI * x).sin()))
            .unwrap()
    }

    #[test]
    fn euler_constant_state_is_steady() {
        let space = PeriodicFemSpace::new(8).unwrap();
        let model = Euler1D::default();
        let u = space
            .interpolate(3, |_| model.conserved(1.0, 0.0, 1.0))
            .unwrap();
        let sys = build_conslaw_system(space, model, ConsLawStabilization::None).unwrap();
        let r = sys.residual(&DVector::zeros(24), &u, 0.0).unwrap();
        assert!(r.amax() < 1e-14);
    }

    #[test]
    fn burgers_residual_sums_to_zero() {
        let space = PeriodicFemSpace::new(32).unwrap();
        let sys = build_conslaw_system(
            space,
            Burgers1D::new(0.0).unwrap(),
            ConsLawStabilization::None,
        )
        .unwrap();
        let u = sine(&space, 1.0);
        let r = sys.residual(&DVector::zeros(32), &u, 0.0).unwrap();
        assert!(r.sum().abs() < 1e-13);
        assert!(r.amax() > 1e-3);
    }

    #[test]
    fn inadmissible_state_names_the_point() {
        let space = PeriodicFemSpace::new(4).unwrap();
        let model = Euler1D::default();
        let mut u = space
            .interpolate(3, |_| model.conserved(1.0, 0.0, 1.0))
            .unwrap();
        u[2 * 3] = -1.0;
        let sys = build_conslaw_system(space, model, ConsLawStabilization::None).unwrap();
        match sys.residual(&DVector::zeros(12), &u, 0.0).unwrap_err() {
            Error::Inadmissible { element, point, .. } => {
                assert_eq!(element, 1);
                assert!(point < 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iteration_matrix_matches_differences() {
        let space = PeriodicFemSpace::new(6).unwrap();
        let model = Euler1D::default();
        let u = space
            .interpolate(3, |x| {
                model.conserved(1.0 + 0.2 * (2.0 * PI * x).sin(), 0.3, 1.0 + 0.1 * x)
            })
            .unwrap();
        let v = DVector::from_fn(18, |i, _| ((i * 5) % 7) as f64 * 0.01);
        let sys = build_conslaw_system(
            space,
            model,
            ConsLawStabilization::Streamline { speed: 1.3 },
        )
        .unwrap();
        let (c_dot, c_u) = (0.7, 0.02);
        let jac = sys.iteration_matrix(c_dot, c_u, &v, &u, 0.0).unwrap();
        for j in 0..18 {
            let h = 1e-6;
            let mut dir = DVector::zeros(18);
            dir[j] = 1.0;
            let plus = sys
                .residual(&(&v + &dir * (c_dot * h)), &(&u + &dir * (c_u * h)), 0.0)
                .unwrap();
            let minus = sys
                .residual(&(&v - &dir * (c_dot * h)), &(&u - &dir * (c_u * h)), 0.0)
                .unwrap();
            let fd = (plus - minus) / (2.0 * h);
            assert!((jac.column(j) - &fd).amax() < 1e-8, "column {j}");
        }
    }

    #[test]
    fn stabilization_kills_constants() {
        let space = PeriodicFemSpace::new(10).unwrap();
        let sys = build_conslaw_system(
            space,
            Euler1D::default(),
            ConsLawStabilization::Streamline { speed: 2.0 },
        )
        .unwrap();
        let v = DVector::from_fn(30, |i, _| (i as f64 * 0.37).sin());
        for c in 0..3 {
            assert_eq!(
                sys.stabilization_form(&v, &space.unit_vector(3, c))
                    .unwrap(),
                0.0
            );
        }
        assert!(sys.stabilization_form(&v, &v).unwrap() > 0.0);
    }

    #[test]
    fn burgers_step_is_cheap_and_conservative() {
        let space = PeriodicFemSpace::new(32).unwrap();
        let sys = build_conslaw_system(
            space,
            Burgers1D::new(0.0).unwrap(),
            ConsLawStabilization::None,
        )
        .unwrap();
        let u0 = sine(&space, 0.1);
        let newton = NewtonSettings::default();
        let rate = crate::integrator::consistent_initial_rate(&sys, &u0, 0.0, &newton).unwrap();
        let s0 = StatePair::new(u0, rate, 0.0).unwrap();
        let (s1, stats) =
            step_traced(&sys, &s0, 1e-3, &params_from_rho_inf(0.5).unwrap(), &newton).unwrap();
        assert!(stats.iterations <= 5);
        assert!(s1.u_dot.sum().abs() < 1e-12);
    }
}
