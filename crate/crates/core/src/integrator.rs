//! Generalized-α stepping for first-order systems `R(U', U, t) = 0`.
//!
//! When the parameters satisfy `gamma = 1/2 + alpha_m - alpha_f` the rate
//! average `U'_{n+alpha_m}` equals the central difference of the shifted
//! states `U + (alpha_f - 1/2) dt U'` at the two ends of the step, so the
//! scheme acts as an implicit midpoint rule on a temporal mesh shifted by
//! `(alpha_f - 1/2) dt`. [`midpoint_identity_residual`] measures the defect
//! of that identity.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::newton::{self, inf_norm, NewtonSettings, NewtonStats};
use crate::params::GenAlphaParams;

/// A semi-discrete system `R(U', U, t) = 0` of dimension `m`.
pub trait ResidualSystem {
    fn dimension(&self) -> usize;

    fn residual(&self, u_dot: &DVector<f64>, u: &DVector<f64>, t: f64) -> Result<DVector<f64>>;

    /// `(c_dot * dR/dU' + c_u * dR/dU) * direction`.
    #[allow(clippy::too_many_arguments)]
    fn iteration_matrix_action(
        &self,
        c_dot: f64,
        c_u: f64,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
        direction: &DVector<f64>,
    ) -> Result<DVector<f64>>;

    /// Dense form of [`ResidualSystem::iteration_matrix_action`]. The default
    /// builds it one column at a time.
    fn iteration_matrix(
        &self,
        c_dot: f64,
        c_u: f64,
        u_dot: &DVector<f64>,
        u: &DVector<f64>,
        t: f64,
    ) -> Result<DMatrix<f64>> {
        let m = self.dimension();
        let mut mat = DMatrix::zeros(m, m);
        let mut e = DVector::zeros(m);
        for j in 0..m {
            e[j] = 1.0;
            let col = self.iteration_matrix_action(c_dot, c_u, u_dot, u, t, &e)?;
            mat.set_column(j, &col);
            e[j] = 0.0;
        }
        Ok(mat)
    }
}

/// Solution and rate at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub u: DVector<f64>,
    pub u_dot: DVector<f64>,
    pub t: f64,
}

impl StatePair {
    pub fn new(u: DVector<f64>, u_dot: DVector<f64>, t: f64) -> Result<Self> {
        check_dim(u.len(), u_dot.len())?;
        if !(t.is_finite() && u.iter().chain(u_dot.iter()).all(|v| v.is_finite())) {
            return Err(Error::Domain("state entries must be finite".into()));
        }
        Ok(Self { u, u_dot, t })
    }

    pub fn dimension(&self) -> usize {
        self.u.len()
    }
}

/// Anything that can advance a [`StatePair`] by one generalized-α step.
///
/// Every [`ResidualSystem`] is a stepper through [`step_traced`]; schemes
/// whose temporal term is not a function of `(U'_{n+alpha_m}, U_{n+alpha_f})`
/// implement this directly.
pub trait Stepper {
    fn dimension(&self) -> usize;

    fn advance(
        &self,
        state: &StatePair,
        dt: f64,
        params: &GenAlphaParams,
        newton: &NewtonSettings,
    ) -> Result<(StatePair, NewtonStats)>;

    /// Whether the scheme is only defined on a uniform temporal mesh.
    fn requires_uniform_dt(&self) -> bool {
        false
    }
}

impl<S: ResidualSystem + ?Sized> Stepper for S {
    fn dimension(&self) -> usize {
        ResidualSystem::dimension(self)
    }

    fn advance(
        &self,
        state: &StatePair,
        dt: f64,
        params: &GenAlphaParams,
        newton: &NewtonSettings,
    ) -> Result<(StatePair, NewtonStats)> {
        step_traced(self, state, dt, params, newton)
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time increment must be positive, got {dt}"
        )))
    }
}

/// Rate predictor that keeps `U_{n+1} = U_n`.
pub(crate) fn rate_predictor(u_dot_n: &DVector<f64>, gamma: f64) -> DVector<f64> {
    if gamma.abs() > f64::EPSILON {
        u_dot_n * ((gamma - 1.0) / gamma)
    } else {
        u_dot_n.clone()
    }
}

/// `U_{n+1} = U_n + dt ((1 - gamma) U'_n + gamma U'_{n+1})`.
pub(crate) fn update_solution(
    u_n: &DVector<f64>,
    u_dot_n: &DVector<f64>,
    u_dot_np1: &DVector<f64>,
    dt: f64,
    gamma: f64,
) -> DVector<f64> {
    u_n + (u_dot_n * (1.0 - gamma) + u_dot_np1 * gamma) * dt
}

pub(crate) fn blend(a: &DVector<f64>, b: &DVector<f64>, alpha: f64) -> DVector<f64> {
    a * (1.0 - alpha) + b * alpha
}

/// Solves `R(U'_0, U_0, t_0) = 0` for `U'_0` by Newton iteration from zero.
pub fn consistent_initial_rate<S: ResidualSystem + ?Sized>(
    system: &S,
    u0: &DVector<f64>,
    t0: f64,
    newton: &NewtonSettings,
) -> Result<DVector<f64>> {
    check_dim(system.dimension(), u0.len())?;
    let (rate, _) = newton::solve(
        DVector::zeros(u0.len()),
        |v| system.residual(v, u0, t0),
        |v| system.iteration_matrix(1.0, 0.0, v, u0, t0),
        newton,
    )?;
    Ok(rate)
}

/// One generalized-α step.
pub fn step<S: ResidualSystem + ?Sized>(
    system: &S,
    state: &StatePair,
    dt: f64,
    params: &GenAlphaParams,
    newton: &NewtonSettings,
) -> Result<StatePair> {
    step_traced(system, state, dt, params, newton).map(|(s, _)| s)
}

/// [`step`], also returning the Newton history.
///
/// Newton iterates on `U'_{n+1}` with iteration matrix
/// `alpha_m dR/dU' + alpha_f gamma dt dR/dU`.
pub fn step_traced<S: ResidualSystem + ?Sized>(
    system: &S,
    state: &StatePair,
    dt: f64,
    params: &GenAlphaParams,
    newton: &NewtonSettings,
) -> Result<(StatePair, NewtonStats)> {
    check_dt(dt)?;
    check_dim(system.dimension(), state.dimension())?;
    let GenAlphaParams {
        alpha_m,
        alpha_f,
        gamma,
        ..
    } = *params;
    let t_af = state.t + alpha_f * dt;
    let stage = |rate: &DVector<f64>| {
        let u_np1 = update_solution(&state.u, &state.u_dot, rate, dt, gamma);
        (
            blend(&state.u_dot, rate, alpha_m),
            blend(&state.u, &u_np1, alpha_f),
        )
    };
    let (rate, stats) = newton::solve(
        rate_predictor(&state.u_dot, gamma),
        |rate| {
            let (v_am, u_af) = stage(rate);
            system.residual(&v_am, &u_af, t_af)
        },
        |rate| {
            let (v_am, u_af) = stage(rate);
            system.iteration_matrix(alpha_m, alpha_f * gamma * dt, &v_am, &u_af, t_af)
        },
        newton,
    )?;
    let u = update_solution(&state.u, &state.u_dot, &rate, dt, gamma);
    Ok((
        StatePair {
            u,
            u_dot: rate,
            t: state.t + dt,
        },
        stats,
    ))
}

/// `U + (alpha_f - 1/2) dt U'`.
///
/// Applied to the state at `t_{n+1}` this is `U+_{n+alpha_f}`; applied to
/// the state at `t_n` it is `U-_{n+alpha_f}`, which on a uniform mesh is
/// `U_{n+alpha_f-1/2}`.
pub fn shifted_state(state: &StatePair, dt: f64, alpha_f: f64) -> Result<DVector<f64>> {
    check_dt(dt)?;
    Ok(&state.u + &state.u_dot * ((alpha_f - 0.5) * dt))
}

/// `(U-_{n+alpha_f}, U+_{n+alpha_f})` for one step.
pub fn shifted_pair(
    state_n: &StatePair,
    state_np1: &StatePair,
    dt: f64,
    alpha_f: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim(state_n.dimension(), state_np1.dimension())?;
    Ok((
        shifted_state(state_n, dt, alpha_f)?,
        shifted_state(state_np1, dt, alpha_f)?,
    ))
}

/// `|U'_{n+alpha_m} - (U+_{n+alpha_f} - U-_{n+alpha_f}) / dt|_inf`.
///
/// Exactly `|gamma - 1/2 - alpha_m + alpha_f| |U'_{n+1} - U'_n|_inf` in exact
/// arithmetic, so it vanishes to rounding for second-order parameters.
pub fn midpoint_identity_residual(
    state_n: &StatePair,
    state_np1: &StatePair,
    dt: f64,
    params: &GenAlphaParams,
) -> Result<f64> {
    let (minus, plus) = shifted_pair(state_n, state_np1, dt, params.alpha_f)?;
    let v_am = blend(&state_n.u_dot, &state_np1.u_dot, params.alpha_m);
    Ok(inf_norm(&(v_am - (plus - minus) / dt)))
}

/// The scale `max(1, |U'_{n+alpha_m}|_inf)` used to normalise
/// [`midpoint_identity_residual`].
pub fn midpoint_identity_scale(
    state_n: &StatePair,
    state_np1: &StatePair,
    params: &GenAlphaParams,
) -> f64 {
    inf_norm(&blend(&state_n.u_dot, &state_np1.u_dot, params.alpha_m)).max(1.0)
}

/// Advances `initial` through the step sizes in `dts`, calling `on_step`
/// with `(n, state_n, state_np1, dt, stats)` after every accepted step.
pub fn integrate<S, F>(
    stepper: &S,
    initial: StatePair,
    dts: &[f64],
    params: &GenAlphaParams,
    newton: &NewtonSettings,
    mut on_step: F,
) -> Result<StatePair>
where
    S: Stepper + ?Sized,
    F: FnMut(usize, &StatePair, &StatePair, f64, &NewtonStats) -> Result<()>,
{
    if stepper.requires_uniform_dt() && !is_uniform(dts) {
        return Err(Error::Configuration(
            "this scheme requires a uniform time increment".into(),
        ));
    }
    let mut state = initial;
    for (n, &dt) in dts.iter().enumerate() {
        let (next, stats) = stepper.advance(&state, dt, params, newton)?;
        on_step(n, &state, &next, dt, &stats)?;
        state = next;
    }
    Ok(state)
}

/// True when every entry equals the first to relative 1e-14.
pub fn is_uniform(dts: &[f64]) -> bool {
    match dts.first() {
        None => true,
        Some(&d0) => dts.iter().all(|&d| (d - d0).abs() <= 1e-14 * d0.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FreeDrift, ScalarLinear};
    use crate::params::{make_params, params_from_rho_inf};

    fn scalar(u: f64, v: f64) -> StatePair {
        StatePair::new(
            DVector::from_element(1, u),
            DVector::from_element(1, v),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn decay_midpoint_step() {
        let sys = ScalarLinear::new(-1.0);
        let p = params_from_rho_inf(1.0).unwrap();
        let s1 = step(
            &sys,
            &scalar(1.0, -1.0),
            0.1,
            &p,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!((s1.u[0] - 0.95 / 1.05).abs() < 1e-15);
        assert!((s1.t - 0.1).abs() < 1e-16);
    }

    #[test]
    fn decay_maximal_damping_step() {
        let sys = ScalarLinear::new(-1.0);
        let p = params_from_rho_inf(0.0).unwrap();
        let s1 = step(
            &sys,
            &scalar(1.0, -1.0),
            0.1,
            &p,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!((s1.u[0] - 14.5 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn drift_is_a_fixed_point() {
        for params in [
            params_from_rho_inf(0.3).unwrap(),
            make_params(0.5, 0.5, 1.0).unwrap(),
            make_params(0.7, 0.9, 0.2).unwrap(),
        ] {
            let s1 = step(
                &FreeDrift::new(1),
                &scalar(2.5, 0.0),
                0.3,
                &params,
                &NewtonSettings::default(),
            )
            .unwrap();
            assert_eq!(s1.u[0], 2.5);
            assert_eq!(s1.u_dot[0], 0.0);
        }
    }

    #[test]
    fn linear_step_converges_in_one_iteration() {
        let sys = ScalarLinear::new(-3.0);
        let p = params_from_rho_inf(0.5).unwrap();
        let (_, stats) = step_traced(
            &sys,
            &scalar(1.0, -3.0),
            0.1,
            &p,
            &NewtonSettings::default(),
        )
        .unwrap();
        assert_eq!(stats.iterations, 1);
    }

    #[test]
    fn rejects_bad_dt_and_dimension() {
        let sys = ScalarLinear::new(-1.0);
        let p = params_from_rho_inf(0.5).unwrap();
        let n = NewtonSettings::default();
        assert!(matches!(
            step(&sys, &scalar(1.0, -1.0), 0.0, &p, &n),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            step(&sys, &scalar(1.0, -1.0), -0.1, &p, &n),
            Err(Error::Domain(_))
        ));
        let wide = StatePair::new(DVector::zeros(2), DVector::zeros(2), 0.0).unwrap();
        assert!(matches!(
            step(&sys, &wide, 0.1, &p, &n),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn initial_rate() {
        let n = NewtonSettings::default();
        let u0 = DVector::from_element(1, 1.0);
        let v0 = consistent_initial_rate(&ScalarLinear::new(-1.0), &u0, 0.0, &n).unwrap();
        assert!((v0[0] + 1.0).abs() < 1e-15);
        let v0 = consistent_initial_rate(&FreeDrift::new(1), &u0, 0.0, &n).unwrap();
        assert_eq!(v0[0], 0.0);
    }

    #[test]
    fn shifted_state_formula() {
        let s = shifted_state(&scalar(1.0, -1.0), 0.1, 1.0).unwrap();
        assert!((s[0] - 0.95).abs() < 1e-16);
        let s = shifted_state(&scalar(3.7, 11.0), 0.1, 0.5).unwrap();
        assert_eq!(s[0], 3.7);
        let s = shifted_state(&scalar(2.0, 4.0), 0.5, 2.0 / 3.0).unwrap();
        assert!((s[0] - 7.0 / 3.0).abs() < 1e-15);
        assert!(shifted_state(&scalar(2.0, 4.0), 0.0, 0.5).is_err());
    }

    #[test]
    fn identity_defect_for_wrong_gamma() {
        let sys = ScalarLinear::new(-1.0);
        let p = make_params(0.5, 0.5, 1.0).unwrap();
        let s0 = scalar(1.0, -1.0);
        let s1 = step(&sys, &s0, 0.1, &p, &NewtonSettings::default()).unwrap();
        let r = midpoint_identity_residual(&s0, &s1, 0.1, &p).unwrap();
        let expected = 0.5 * (s1.u_dot[0] - s0.u_dot[0]).abs();
        assert!(r > 1e-3);
        assert!((r - expected).abs() < 1e-13);
    }

    #[test]
    fn identity_vanishes_for_zero_rates() {
        let p = params_from_rho_inf(0.2).unwrap();
        let r = midpoint_identity_residual(&scalar(4.0, 0.0), &scalar(4.0, 0.0), 0.1, &p).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn uniform_detection() {
        assert!(is_uniform(&[0.1; 5]));
        assert!(!is_uniform(&[0.001, 0.002, 0.001]));
        assert!(is_uniform(&[]));
    }
}
