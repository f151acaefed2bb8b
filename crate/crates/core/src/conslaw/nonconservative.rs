//! Conservation laws discretized in nonconservation variables `V`.
//!
//! The standard scheme tests `(dU/dV)(V_{n+alpha_f}) V'_{n+alpha_m}`
//! against `W`. The modified scheme replaces that term with the difference
//! quotient `(Û+ - Û-) / dt` of the shifted conserved states
//! `Û = U(V) + (alpha_f - 1/2) dt (dU/dV)(V) V'`, evaluated pointwise at the
//! quadrature points at the two ends of the step. Flux and source terms are
//! evaluated from `V_{n+alpha_f}` in both schemes.

use nalgebra::{DMatrix, DVector};

use super::{inadmissible, rule, ConservationLawModel, PeriodicFemSpace, VariableMap};
use crate::error::{check_dim, Error, Result};
use crate::integrator::{
    blend, check_dt, rate_predictor, update_solution, ResidualSystem, StatePair, Stepper,
};
use crate::newton::{self, NewtonSettings, NewtonStats};
use crate::params::GenAlphaParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonconservativeScheme {
    Standard,
    Modified,
}

/// Galerkin system over nodal `V` coefficients; as a [`ResidualSystem`] it
/// is the standard scheme.
#[derive(Debug, Clone)]
pub struct NonconservativeSystem<M, V> {
    space: PeriodicFemSpace,
    model: M,
    map: V,
}

struct PointState {
    v: DVector<f64>,
    v_x: DVector<f64>,
    u: DVector<f64>,
    u_x: DVector<f64>,
    jac: DMatrix<f64>,
}

impl<M: ConservationLawModel, V: VariableMap> NonconservativeSystem<M, V> {
    pub fn new(space: PeriodicFemSpace, model: M, map: V) -> Result<Self> {
        if model.components() != map.components() {
            return Err(Error::Configuration(format!(
                "model has {} components but the variable map has {}",
                model.components(),
                map.components()
            )));
        }
        Ok(Self { space, model, map })
    }

    pub fn space(&self) -> &PeriodicFemSpace {
        &self.space
    }

    pub fn map(&self) -> &V {
        &self.map
    }

    pub fn components(&self) -> usize {
        self.model.components()
    }

    fn point(&self, coeffs: &DVector<f64>, e: usize, q: usize, xi: f64) -> Result<PointState> {
        let p = self.components();
        let (v, v_x) = self.space.evaluate(p, coeffs, e, xi);
        let fail = |d: String| inadmissible(&self.space, e, q, xi, d);
        self.map.admissibility(&v).map_err(fail)?;
        let u = self.map.to_conserved(&v);
        self.model.admissibility(&u).map_err(fail)?;
        let jac = self.map.jacobian(&v);
        let u_x = &jac * &v_x;
        Ok(PointState {
            v,
            v_x,
            u,
            u_x,
            jac,
        })
    }

    /// Adds `-∫ F · W_x - ∫ S · W` at `v_af` to `res` and, when requested,
    /// `scale` times its derivative with respect to the `V` coefficients.
    fn add_spatial(
        &self,
        v_af: &DVector<f64>,
        t: f64,
        res: &mut DVector<f64>,
        mut jac: Option<(&mut DMatrix<f64>, f64)>,
    ) -> Result<()> {
        let p = self.components();
        let dx = self.space.dx;
        let slopes = [-1.0 / dx, 1.0 / dx];
        for e in 0..self.space.n_elements {
            let nodes = self.space.element_nodes(e);
            for (q, (xi, w)) in rule().iter().enumerate() {
                let x = self.space.map(e, xi);
                let shape = [1.0 - xi, xi];
                let wdx = w * dx;
                let pt = self.point(v_af, e, q, xi)?;
                let flux = self.model.flux(&pt.u, &pt.u_x, x, t);
                let src = self.model.source(&pt.u, &pt.u_x, x, t);
                for a in 0..2 {
                    let mut rows = res.rows_mut(nodes[a] * p, p);
                    rows -= &flux * (slopes[a] * wdx) + &src * (shape[a] * wdx);
                }
                if let Some((jac, scale)) = jac.as_mut() {
                    let (fa, fax) = self.model.flux_jacobians(&pt.u, &pt.u_x, x, t);
                    let (sa, sax) = self.model.source_jacobians(&pt.u, &pt.u_x, x, t);
                    let d = self.map.jacobian_derivative(&pt.v, &pt.v_x);
                    for b in 0..2 {
                        // dU/dV_b and dU_x/dV_b.
                        let du = &pt.jac * shape[b];
                        let dux = &d * shape[b] + &pt.jac * slopes[b];
                        let dflux = &fa * &du + &fax * &dux;
                        let dsrc = &sa * &du + &sax * &dux;
                        for a in 0..2 {
                            let block = (&dflux * slopes[a] + &dsrc * shape[a]) * (-*scale * wdx);
                            let mut view = jac.view_mut((nodes[a] * p, nodes[b] * p), (p, p));
                            view += block;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn assemble_standard(
        &self,
        v_dot: &DVector<f64>,
        v: &DVector<f64>,
        t: f64,
        coefs: Option<(f64, f64)>,
    ) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let p = self.components();
        let m = self.space.dimension(p);
        check_dim(m, v.len())?;
        check_dim(m, v_dot.len())?;
        let dx = self.space.dx;
        let mut res = DVector::zeros(m);
        let mut jac = coefs.map(|_| DMatrix::zeros(m, m));
        for e in 0..self.space.n_elements {
            let nodes = self.space.element_nodes(e);
            for (q, (xi, w)) in rule().iter().enumerate() {
                let shape = [1.0 - xi, xi];
                let wdx = w * dx;
                let pt = self.point(v, e, q, xi)?;
                let (rate, _) = self.space.evaluate(p, v_dot, e, xi);
                let temporal = &pt.jac * &rate;
                for a in 0..2 {
                    let mut rows = res.rows_mut(nodes[a] * p, p);
                    rows += &temporal * (shape[a] * wdx);
                }
                if let (Some(jac), Some((c_dot, c_u))) = (jac.as_mut(), coefs) {
                    let d = self.map.jacobian_derivative(&pt.v, &rate);
                    let local = &pt.jac * c_dot + d * c_u;
                    for a in 0..2 {
                        for b in 0..2 {
                            let mut view = jac.view_mut((nodes[a] * p, nodes[b] * p), (p, p));
                            view += &local * (shape[a] * shape[b] * wdx);
                        }
                    }
                }
            }
        }
        let jac_ref = match (jac.as_mut(), coefs) {
            (Some(j), Some((_, c_u))) => Some((j, c_u)),
            _ => None,
        };
        self.add_spatial(v, t, &mut res, jac_ref)?;
        Ok((res, jac))
    }

    /// `Û` at every quadrature point, element-major.
    fn shifted_conserved_points(&self, state: &StatePair, shift: f64) -> Result<Vec<DVector<f64>>> {
        let p = self.components();
        let mut out = Vec::with_capacity(self.space.n_elements * rule().len());
        for e in 0..self.space.n_elements {
            for (q, (xi, _)) in rule().iter().enumerate() {
                let pt = self.point(&state.u, e, q, xi)?;
                let (rate, _) = self.space.evaluate(p, &state.u_dot, e, xi);
                out.push(pt.u + pt.jac * rate * shift);
            }
        }
        Ok(out)
    }

    /// `∫ U(V^h) dΩ` per component.
    pub fn total_conserved(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.components();
        check_dim(self.space.dimension(p), v.len())?;
        let mut total = DVector::zeros(p);
        for e in 0..self.space.n_elements {
            for (q, (xi, w)) in rule().iter().enumerate() {
                total += self.point(v, e, q, xi)?.u * (w * self.space.dx);
            }
        }
        Ok(total)
    }

    /// `∫ Û dΩ` with `Û = U(V) + shift (dU/dV)(V) V'`.
    pub fn shifted_conserved_total(&self, state: &StatePair, shift: f64) -> Result<DVector<f64>> {
        check_dim(self.space.dimension(self.components()), state.dimension())?;
        let mut total = DVector::zeros(self.components());
        let weights: Vec<f64> = rule().iter().map(|(_, w)| w * self.space.dx).collect();
        for (k, u_hat) in self
            .shifted_conserved_points(state, shift)?
            .into_iter()
            .enumerate()
        {
            total += u_hat * weights[k % weights.len()];
        }
        Ok(total)
    }

    /// `∫ S(U(V^h)) dΩ` per component.
    pub fn source_integral(&self, v: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let p = self.components();
        check_dim(self.space.dimension(p), v.len())?;
        let mut total = DVector::zeros(p);
        for e in 0..self.space.n_elements {
            for (q, (xi, w)) in rule().iter().enumerate() {
                let pt = self.point(v, e, q, xi)?;
                let x = self.space.map(e, xi);
                total += self.model.source(&pt.u, &pt.u_x, x, t) * (w * self.space.dx);
            }
        }
        Ok(total)
    }

    /// Residual of the modified scheme for the trial rate `v_dot_np1`, and
    /// optionally its derivative with respect to that rate.
    #[allow(clippy::too_many_arguments)]
    fn assemble_modified(
        &self,
        state: &StatePair,
        minus: &[DVector<f64>],
        v_dot_np1: &DVector<f64>,
        dt: f64,
        params: &GenAlphaParams,
        with_jacobian: bool,
    ) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
        let p = self.components();
        let m = self.space.dimension(p);
        let dx = self.space.dx;
        let shift = (params.alpha_f - 0.5) * dt;
        let gamma = params.gamma;
        let v_np1 = update_solution(&state.u, &state.u_dot, v_dot_np1, dt, gamma);
        let mut res = DVector::zeros(m);
        let mut jac = with_jacobian.then(|| DMatrix::zeros(m, m));
        let nq = rule().len();
        for e in 0..self.space.n_elements {
            let nodes = self.space.element_nodes(e);
            for (q, (xi, w)) in rule().iter().enumerate() {
                let shape = [1.0 - xi, xi];
                let wdx = w * dx;
                let pt = self.point(&v_np1, e, q, xi)?;
                let (rate, _) = self.space.evaluate(p, v_dot_np1, e, xi);
                let plus = &pt.u + &pt.jac * &rate * shift;
                let quotient = (plus - &minus[e * nq + q]) / dt;
                for a in 0..2 {
                    let mut rows = res.rows_mut(nodes[a] * p, p);
                    rows += &quotient * (shape[a] * wdx);
                }
                if let Some(jac) = jac.as_mut() {
                    // d/d(rate) of (U(V+) + shift J(V+) rate) / dt, V+ depending on rate through gamma dt.
                    let d = self.map.jacobian_derivative(&pt.v, &rate);
                    let local = (&pt.jac + d * shift) * gamma + &pt.jac * (shift / dt);
                    for a in 0..2 {
                        for b in 0..2 {
                            let mut view = jac.view_mut((nodes[a] * p, nodes[b] * p), (p, p));
                            view += &local * (shape[a] * shape[b] * wdx);
                        }
                    }
                }
            }
        }
        let v_af = blend(&state.u, &v_np1, params.alpha_f);
        let scale = params.alpha_f * gamma * dt;
        self.add_spatial(
            &v_af,
            state.t + params.alpha_f * dt,
            &mut res,
            jac.as_mut().map(|j| (j, scale)),
        )?;
        Ok((res, jac))
    }
}

impl<M: ConservationLawModel, V: VariableMap> ResidualSystem for NonconservativeSystem<M, V> {
    fn dimension(&self) -> usize {
        self.space.dimension(self.components())
    }

    fn residual(&self, v_dot: &DVector<f64>, v: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        self.assemble_standard(v_dot, v, t, None).map(|(r, _)| r)
    }

    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        c_u: f64,
        v_dot: &DVector<f64>,
        v: &DVector<f64>,
        t: f64,
        direction: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        check_dim(ResidualSystem::dimension(self), direction.len())?;
        Ok(self.iteration_matrix(c_dot, c_u, v_dot, v, t)? * direction)
    }

    fn iteration_matrix(
        &self,
        c_dot: f64,
        c_u: f64,
        v_dot: &DVector<f64>,
        v: &DVector<f64>,
        t: f64,
    ) -> Result<DMatrix<f64>> {
        let (_, jac) = self.assemble_standard(v_dot, v, t, Some((c_dot, c_u)))?;
        Ok(jac.expect("requested"))
    }
}

/// The modified scheme. Defined only for uniform `dt` and second-order
/// parameters.
#[derive(Debug, Clone)]
pub struct ModifiedScheme<M, V> {
    pub system: NonconservativeSystem<M, V>,
}

impl<M: ConservationLawModel, V: VariableMap> ModifiedScheme<M, V> {
    /// Residual of the modified scheme at trial rate `v_dot_np1`.
    pub fn residual(
        &self,
        state: &StatePair,
        v_dot_np1: &DVector<f64>,
        dt: f64,
        params: &GenAlphaParams,
    ) -> Result<DVector<f64>> {
        let minus = self
            .system
            .shifted_conserved_points(state, (params.alpha_f - 0.5) * dt)?;
        self.system
            .assemble_modified(state, &minus, v_dot_np1, dt, params, false)
            .map(|(r, _)| r)
    }

    /// Derivative of [`ModifiedScheme::residual`] with respect to `v_dot_np1`.
    pub fn jacobian(
        &self,
        state: &StatePair,
        v_dot_np1: &DVector<f64>,
        dt: f64,
        params: &GenAlphaParams,
    ) -> Result<DMatrix<f64>> {
        let minus = self
            .system
            .shifted_conserved_points(state, (params.alpha_f - 0.5) * dt)?;
        let (_, jac) = self
            .system
            .assemble_modified(state, &minus, v_dot_np1, dt, params, true)?;
        Ok(jac.expect("requested"))
    }
}

impl<M: ConservationLawModel, V: VariableMap> Stepper for ModifiedScheme<M, V> {
    fn dimension(&self) -> usize {
        ResidualSystem::dimension(&self.system)
    }

    fn advance(
        &self,
        state: &StatePair,
        dt: f64,
        params: &GenAlphaParams,
        newton: &NewtonSettings,
    ) -> Result<(StatePair, NewtonStats)> {
        check_dt(dt)?;
        check_dim(Stepper::dimension(self), state.dimension())?;
        if !params.is_second_order() {
            return Err(Error::Configuration(format!(
                "the modified scheme needs gamma = 1/2 + alpha_m - alpha_f (defect {:e})",
                params.order_defect()
            )));
        }
        let minus = self
            .system
            .shifted_conserved_points(state, (params.alpha_f - 0.5) * dt)?;
        let (rate, stats) = newton::solve(
            rate_predictor(&state.u_dot, params.gamma),
            |r| {
                self.system
                    .assemble_modified(state, &minus, r, dt, params, false)
                    .map(|(res, _)| res)
            },
            |r| {
                self.system
                    .assemble_modified(state, &minus, r, dt, params, true)
                    .map(|(_, j)| j.expect("requested"))
            },
            newton,
        )?;
        let u = update_solution(&state.u, &state.u_dot, &rate, dt, params.gamma);
        Ok((
            StatePair {
                u,
                u_dot: rate,
                t: state.t + dt,
            },
            stats,
        ))
    }

    fn requires_uniform_dt(&self) -> bool {
        true
    }
}

/// Either nonconservative scheme behind one stepping interface.
#[derive(Debug, Clone)]
pub enum NonconservativeRunner<M, V> {
    Standard(NonconservativeSystem<M, V>),
    Modified(ModifiedScheme<M, V>),
}

impl<M, V> NonconservativeRunner<M, V> {
    pub fn system(&self) -> &NonconservativeSystem<M, V> {
        match self {
            Self::Standard(s) => s,
            Self::Modified(m) => &m.system,
        }
    }

    pub fn scheme(&self) -> NonconservativeScheme {
        match self {
            Self::Standard(_) => NonconservativeScheme::Standard,
            Self::Modified(_) => NonconservativeScheme::Modified,
        }
    }
}

impl<M: ConservationLawModel, V: VariableMap> Stepper for NonconservativeRunner<M, V> {
    fn dimension(&self) -> usize {
        ResidualSystem::dimension(self.system())
    }

    fn advance(
        &self,
        state: &StatePair,
        dt: f64,
        params: &GenAlphaParams,
        newton: &NewtonSettings,
    ) -> Result<(StatePair, NewtonStats)> {
        match self {
            Self::Standard(s) => s.advance(state, dt, params, newton),
            Self::Modified(m) => m.advance(state, dt, params, newton),
        }
    }

    fn requires_uniform_dt(&self) -> bool {
        matches!(self, Self::Modified(_))
    }
}

pub fn build_nonconservative_system<M: ConservationLawModel, V: VariableMap>(
    space: PeriodicFemSpace,
    model: M,
    map: V,
    scheme: NonconservativeScheme,
) -> Result<NonconservativeRunner<M, V>> {
    let system = NonconservativeSystem::new(space, model, map)?;
    Ok(match scheme {
        NonconservativeScheme::Standard => NonconservativeRunner::Standard(system),
        NonconservativeScheme::Modified => {
            NonconservativeRunner::Modified(ModifiedScheme { system })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conslaw::{Euler1D, PressurePrimitiveMap};
    use crate::integrator::consistent_initial_rate;
    use crate::params::{make_params, params_from_rho_inf};
    use std::f64::consts::PI;

    fn euler_system(n: usize) -> NonconservativeSystem<Euler1D, PressurePrimitiveMap> {
        NonconservativeSystem::new(
            PeriodicFemSpace::new(n).unwrap(),
            Euler1D::default(),
            PressurePrimitiveMap::default(),
        )
        .unwrap()
    }

    fn smooth_primitive(
        sys: &NonconservativeSystem<Euler1D, PressurePrimitiveMap>,
    ) -> DVector<f64> {
        sys.space()
            .interpolate(3, |x| {
                let rho = 1.0 + 0.1 * (2.0 * PI * x).sin();
                DVector::from_vec(vec![1.0, 0.1, 1.0 / rho])
            })
            .unwrap()
    }

    #[test]
    fn constant_state_is_steady_in_both_schemes() {
        let sys = euler_system(6);
        let v = sys
            .space()
            .interpolate(3, |_| DVector::from_vec(vec![1.0, 0.0, 1.0]))
            .unwrap();
        let zero = DVector::zeros(18);
        assert!(sys.residual(&zero, &v, 0.0).unwrap().amax() < 1e-14);
        let modified = ModifiedScheme { system: sys };
        let state = StatePair::new(v, zero.clone(), 0.0).unwrap();
        let p = params_from_rho_inf(0.5).unwrap();
        assert!(modified.residual(&state, &zero, 1e-3, &p).unwrap().amax() < 1e-14);
        let (next, _) = modified
            .advance(&state, 1e-3, &p, &NewtonSettings::default())
            .unwrap();
        assert!((next.u - &state.u).amax() < 1e-14);
    }

    #[test]
    fn standard_jacobian_matches_differences() {
        let sys = euler_system(5);
        let v = smooth_primitive(&sys);
        let v_dot = DVector::from_fn(15, |i, _| ((i * 3) % 5) as f64 * 0.02 - 0.04);
        let (c_dot, c_u) = (0.8, 0.05);
        let jac = sys.iteration_matrix(c_dot, c_u, &v_dot, &v, 0.0).unwrap();
        for j in 0..15 {
            let h = 1e-6;
            let mut dir = DVector::zeros(15);
            dir[j] = 1.0;
            let plus = sys
                .residual(
                    &(&v_dot + &dir * (c_dot * h)),
                    &(&v + &dir * (c_u * h)),
                    0.0,
                )
                .unwrap();
            let minus = sys
                .residual(
                    &(&v_dot - &dir * (c_dot * h)),
                    &(&v - &dir * (c_u * h)),
                    0.0,
                )
                .unwrap();
            assert!(
                (jac.column(j) - (plus - minus) / (2.0 * h)).amax() < 1e-8,
                "column {j}"
            );
        }
    }

    #[test]
    fn modified_jacobian_matches_differences() {
        let sys = euler_system(5);
        let v = smooth_primitive(&sys);
        let rate = consistent_initial_rate(&sys, &v, 0.0, &NewtonSettings::default()).unwrap();
        let state = StatePair::new(v, rate.clone(), 0.0).unwrap();
        let scheme = ModifiedScheme { system: sys };
        let p = params_from_rho_inf(0.3).unwrap();
        let dt = 0.01;
        let trial = &rate * 0.9;
        let jac = scheme.jacobian(&state, &trial, dt, &p).unwrap();
        for j in 0..15 {
            let h = 1e-6;
            let mut dir = DVector::zeros(15);
            dir[j] = h;
            let fd = (scheme.residual(&state, &(&trial + &dir), dt, &p).unwrap()
                - scheme.residual(&state, &(&trial - &dir), dt, &p).unwrap())
                / (2.0 * h);
            assert!(
                (jac.column(j) - &fd).amax() < 1e-7 * fd.amax().max(1.0),
                "column {j}"
            );
        }
    }

    #[test]
    fn midpoint_shift_gives_plain_difference_quotient() {
        let sys = euler_system(4);
        let v0 = smooth_primitive(&sys);
        let rate = DVector::from_fn(12, |i, _| (i as f64 * 0.3).cos() * 0.05);
        let state = StatePair::new(v0.clone(), rate.clone(), 0.0).unwrap();
        let trial = &rate * 1.1;
        let p = params_from_rho_inf(1.0).unwrap();
        let dt = 0.02;
        let scheme = ModifiedScheme {
            system: sys.clone(),
        };
        let r = scheme.residual(&state, &trial, dt, &p).unwrap();
        // Independent assembly: ∫ (U(V1) - U(V0)) / dt W plus the same spatial terms.
        let v1 = update_solution(&v0, &rate, &trial, dt, p.gamma);
        let mut expected = DVector::zeros(12);
        for e in 0..4 {
            let nodes = sys.space().element_nodes(e);
            for (xi, w) in rule().iter() {
                let (a, _) = sys.space().evaluate(3, &v0, e, xi);
                let (b, _) = sys.space().evaluate(3, &v1, e, xi);
                let dq = (sys.map().to_conserved(&b) - sys.map().to_conserved(&a)) / dt;
                for (k, s) in [1.0 - xi, xi].into_iter().enumerate() {
                    let mut rows = expected.rows_mut(nodes[k] * 3, 3);
                    rows += &dq * (s * w * 0.25);
                }
            }
        }
        let v_af = blend(&v0, &v1, 0.5);
        sys.add_spatial(&v_af, 0.5 * dt, &mut expected, None)
            .unwrap();
        assert!((r - expected).amax() < 1e-13);
    }

    #[test]
    fn modified_refuses_first_order_and_nonuniform() {
        let sys = euler_system(4);
        let v = smooth_primitive(&sys);
        let state = StatePair::new(v, DVector::zeros(12), 0.0).unwrap();
        let runner = NonconservativeRunner::Modified(ModifiedScheme { system: sys });
        let bad = make_params(0.5, 0.5, 0.75).unwrap();
        let err = runner
            .advance(&state, 1e-3, &bad, &NewtonSettings::default())
            .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
        let p = params_from_rho_inf(0.5).unwrap();
        let err = crate::integrator::integrate(
            &runner,
            state,
            &[1e-3, 2e-3],
            &p,
            &NewtonSettings::default(),
            |_, _, _, _, _| Ok(()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn inadmissible_temperature_is_reported() {
        let sys = euler_system(4);
        let mut v = sys
            .space()
            .interpolate(3, |_| DVector::from_vec(vec![1.0, 0.0, 1.0]))
            .unwrap();
        v[3 * 3 + 2] = -0.5;
        match sys.residual(&DVector::zeros(12), &v, 0.0).unwrap_err() {
            Error::Inadmissible {
                element, detail, ..
            } => {
                assert!(element == 2 || element == 3);
                assert!(detail.contains("temperature"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
