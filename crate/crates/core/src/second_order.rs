//! Generalized-α for second-order systems `R(U'', U', U, t) = 0` with
//! Newmark updates.
//!
//! With `gamma = 1/2 + alpha_m - alpha_f` the acceleration average satisfies
//! `U''_{n+alpha_m} = (V+ - V-) / dt` where `V = U' + (alpha_f - 1/2) dt U''`
//! at the two ends of the step.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::integrator::{blend, check_dt};
use crate::newton::{self, inf_norm, NewtonSettings, NewtonStats};
use crate::params::GenAlphaParams;

pub trait SecondOrderSystem {
    fn dimension(&self) -> usize;

    fn residual(
        &self,
        u_ddot: &DVector<f64>,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
    ) -> Result<DVector<f64>>;

    /// `c_ddot dR/dU'' + c_dot dR/dU' + c_u dR/dU` as a dense matrix.
    #[allow(clippy::too_many_arguments)]
    fn iteration_matrix(
        &self,
        c_ddot: f64,
        c_dot: f64,
        c_u: f64,
        u_ddot: &DVector<f64>,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
    ) -> Result<DMatrix<f64>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderState {
    pub u: DVector<f64>,
    pub u_dot: DVector<f64>,
    pub u_ddot: DVector<f64>,
    pub t: f64,
}

impl SecondOrderState {
    pub fn new(u: DVector<f64>, u_dot: DVector<f64>, u_ddot: DVector<f64>, t: f64) -> Result<Self> {
        check_dim(u.len(), u_dot.len())?;
        check_dim(u.len(), u_ddot.len())?;
        let finite = u
            .iter()
            .chain(u_dot.iter())
            .chain(u_ddot.iter())
            .all(|v| v.is_finite());
        if !(finite && t.is_finite()) {
            return Err(Error::Domain("state entries must be finite".into()));
        }
        Ok(Self {
            u,
            u_dot,
            u_ddot,
            t,
        })
    }

    pub fn dimension(&self) -> usize {
        self.u.len()
    }
}

/// Solves `R(U''_0, U'_0, U_0, t_0) = 0` for the initial acceleration.
pub fn consistent_initial_acceleration<S: SecondOrderSystem + ?Sized>(
    system: &S,
    u0: &DVector<f64>,
    u_dot0: &DVector<f64>,
    t0: f64,
    newton: &NewtonSettings,
) -> Result<DVector<f64>> {
    check_dim(system.dimension(), u0.len())?;
    check_dim(u0.len(), u_dot0.len())?;
    let (acc, _) = newton::solve(
        DVector::zeros(u0.len()),
        |a| system.residual(a, u_dot0, u0, t0),
        |a| system.iteration_matrix(1.0, 0.0, 0.0, a, u_dot0, u0, t0),
        newton,
    )?;
    Ok(acc)
}

pub fn step_second_order<S: SecondOrderSystem + ?Sized>(
    system: &S,
    state: &SecondOrderState,
    dt: f64,
    params: &GenAlphaParams,
    newton: &NewtonSettings,
) -> Result<SecondOrderState> {
    step_second_order_traced(system, state, dt, params, newton).map(|(s, _)| s)
}

pub fn step_second_order_traced<S: SecondOrderSystem + ?Sized>(
    system: &S,
    state: &SecondOrderState,
    dt: f64,
    params: &GenAlphaParams,
    newton: &NewtonSettings,
) -> Result<(SecondOrderState, NewtonStats)> {
    check_dt(dt)?;
    check_dim(system.dimension(), state.dimension())?;
    let beta = params
        .beta
        .ok_or_else(|| Error::Configuration("second-order stepping needs beta".into()))?;
    let GenAlphaParams {
        alpha_m,
        alpha_f,
        gamma,
        ..
    } = *params;
    let t_af = state.t + alpha_f * dt;
    let advance = |acc: &DVector<f64>| {
        let u =
            &state.u + &state.u_dot * dt + (&state.u_ddot * (0.5 - beta) + acc * beta) * (dt * dt);
        let v = &state.u_dot + (&state.u_ddot * (1.0 - gamma) + acc * gamma) * dt;
        (u, v)
    };
    let stage = |acc: &DVector<f64>| {
        let (u, v) = advance(acc);
        (
            blend(&state.u_ddot, acc, alpha_m),
            blend(&state.u_dot, &v, alpha_f),
            blend(&state.u, &u, alpha_f),
        )
    };
    // Constant-displacement predictor.
    let predictor = -&state.u_dot / (beta * dt) - &state.u_ddot * ((0.5 - beta) / beta);
    let (acc, stats) = newton::solve(
        predictor,
        |acc| {
            let (a, v, u) = stage(acc);
            system.residual(&a, &v, &u, t_af)
        },
        |acc| {
            let (a, v, u) = stage(acc);
            system.iteration_matrix(
                alpha_m,
                alpha_f * gamma * dt,
                alpha_f * beta * dt * dt,
                &a,
                &v,
                &u,
                t_af,
            )
        },
        newton,
    )?;
    let (u, u_dot) = advance(&acc);
    Ok((
        SecondOrderState {
            u,
            u_dot,
            u_ddot: acc,
            t: state.t + dt,
        },
        stats,
    ))
}

/// `|U''_{n+alpha_m} - (V+ - V-) / dt|_inf` with
/// `V = U' + (alpha_f - 1/2) dt U''` evaluated at `t_{n+1}` and `t_n`.
pub fn second_order_identity_residual(
    state_n: &SecondOrderState,
    state_np1: &SecondOrderState,
    dt: f64,
    params: &GenAlphaParams,
) -> Result<f64> {
    check_dt(dt)?;
    check_dim(state_n.dimension(), state_np1.dimension())?;
    let shift = (params.alpha_f - 0.5) * dt;
    let minus = &state_n.u_dot + &state_n.u_ddot * shift;
    let plus = &state_np1.u_dot + &state_np1.u_ddot * shift;
    let a_am = blend(&state_n.u_ddot, &state_np1.u_ddot, params.alpha_m);
    Ok(inf_norm(&(a_am - (plus - minus) / dt)))
}

/// `max(1, |U''_{n+alpha_m}|_inf)`.
pub fn second_order_identity_scale(
    state_n: &SecondOrderState,
    state_np1: &SecondOrderState,
    params: &GenAlphaParams,
) -> f64 {
    inf_norm(&blend(&state_n.u_ddot, &state_np1.u_ddot, params.alpha_m)).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Oscillator, SecondOrderDrift};
    use crate::params::{make_params, params_from_rho_inf};

    fn scalar(u: f64, v: f64, a: f64) -> SecondOrderState {
        SecondOrderState::new(
            DVector::from_element(1, u),
            DVector::from_element(1, v),
            DVector::from_element(1, a),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn free_drift_is_unchanged() {
        let p = params_from_rho_inf(0.4).unwrap().with_default_beta();
        let s0 = scalar(1.25, 0.0, 0.0);
        let s1 = step_second_order(
            &SecondOrderDrift::new(1),
            &s0,
            0.1,
            &p,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert_eq!(s1.u, s0.u);
        assert_eq!(s1.u_dot, s0.u_dot);
        assert_eq!(s1.u_ddot, s0.u_ddot);
        assert!((s1.t - 0.1).abs() < 1e-16);
    }

    #[test]
    fn oscillator_reaches_cos_one() {
        let sys = Oscillator::new(1.0);
        let p = params_from_rho_inf(1.0).unwrap().with_default_beta();
        let newton = NewtonSettings::default();
        let mut s = scalar(1.0, 0.0, -1.0);
        for _ in 0..100 {
            s = step_second_order(&sys, &s, 0.01, &p, &newton).unwrap();
        }
        assert!((s.u[0] - 1f64.cos()).abs() < 1e-4);
        assert!((s.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn needs_beta() {
        let p = params_from_rho_inf(1.0).unwrap();
        let err = step_second_order(
            &Oscillator::new(1.0),
            &scalar(1.0, 0.0, -1.0),
            0.01,
            &p,
            &NewtonSettings::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn identity_defect_for_wrong_gamma() {
        let base = params_from_rho_inf(0.5).unwrap();
        let p = make_params(base.alpha_m, base.alpha_f, base.gamma + 0.2)
            .unwrap()
            .with_default_beta();
        let s0 = scalar(0.0, 1.0, 0.0);
        let s1 = step_second_order(
            &Oscillator::new(1.0),
            &s0,
            0.1,
            &p,
            &NewtonSettings::default(),
        )
        .unwrap();
        let r = second_order_identity_residual(&s0, &s1, 0.1, &p).unwrap();
        assert!(r > 1e-3, "defect {r}");
        assert!((r - 0.2 * (s1.u_ddot[0] - s0.u_ddot[0]).abs()).abs() < 1e-12);
    }

    #[test]
    fn identity_zero_rates() {
        let p = params_from_rho_inf(0.0).unwrap().with_default_beta();
        let s = scalar(2.0, 0.0, 0.0);
        assert_eq!(
            second_order_identity_residual(&s, &s, 0.1, &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn initial_acceleration() {
        let a0 = consistent_initial_acceleration(
            &Oscillator::new(2.0),
            &DVector::from_element(1, 0.5),
            &DVector::from_element(1, 0.0),
            0.0,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!((a0[0] + 2.0).abs() < 1e-15);
    }
}
