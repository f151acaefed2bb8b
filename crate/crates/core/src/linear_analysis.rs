//! Amplification-matrix and observed-order diagnostics on `u' = lambda u`.

use nalgebra::{Complex, DVector, Matrix2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{consistent_initial_rate, integrate, ResidualSystem, StatePair};
use crate::models::ScalarLinear;
use crate::newton::{inf_norm, NewtonSettings};
use crate::params::GenAlphaParams;

/// Maps `(U_n, dt U'_n)` to `(U_{n+1}, dt U'_{n+1})` for `u' = lambda u` at
/// `z = lambda dt`. Column `j` is the image of the `j`-th unit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplificationMatrix {
    pub entries: Matrix2<f64>,
}

/// Builds the matrix from two generalized-α steps of unit states with
/// `dt = 1`; the Newton solve is exact after one iteration.
pub fn amplification_matrix(z: f64, params: &GenAlphaParams) -> Result<AmplificationMatrix> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {z}")));
    }
    let system = ScalarLinear::new(z);
    // Residual rounding grows like |z| eps, so the absolute tolerance follows it.
    let newton = NewtonSettings {
        abs_tol: 1e-12 * (1.0 + z.abs()),
        ..NewtonSettings::default()
    };
    let mut entries = Matrix2::zeros();
    for (j, (u, w)) in [(1.0, 0.0), (0.0, 1.0)].into_iter().enumerate() {
        let s0 = StatePair::new(
            DVector::from_element(1, u),
            DVector::from_element(1, w),
            0.0,
        )?;
        let (s1, _) = crate::integrator::step_traced(&system, &s0, 1.0, params, &newton)?;
        entries[(0, j)] = s1.u[0];
        entries[(1, j)] = s1.u_dot[0];
    }
    Ok(AmplificationMatrix { entries })
}

/// Closed-form amplification matrix for complex `z`.
pub fn amplification_matrix_complex(
    z: Complex<f64>,
    params: &GenAlphaParams,
) -> Result<Matrix2<Complex<f64>>> {
    let GenAlphaParams {
        alpha_m,
        alpha_f,
        gamma,
        ..
    } = *params;
    let denom = Complex::new(alpha_m, 0.0) - z * (alpha_f * gamma);
    if denom.norm() <= f64::EPSILON * alpha_m.abs().max(1.0) {
        return Err(Error::Singular(format!(
            "implicit solve singular at z = {z}"
        )));
    }
    // w1 = (z u0 + (z alpha_f (1 - gamma) - (1 - alpha_m)) w0) / denom
    let w_from_u = z / denom;
    let w_from_w = (z * (alpha_f * (1.0 - gamma)) - (1.0 - alpha_m)) / denom;
    let one = Complex::new(1.0, 0.0);
    Ok(Matrix2::new(
        one + w_from_u * gamma,
        Complex::new(1.0 - gamma, 0.0) + w_from_w * gamma,
        w_from_u,
        w_from_w,
    ))
}

/// Largest eigenvalue modulus from the closed-form 2x2 characteristic roots.
pub fn spectral_radius(matrix: &AmplificationMatrix) -> f64 {
    let a = &matrix.entries;
    let half_trace = 0.5 * (a[(0, 0)] + a[(1, 1)]);
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    // Written via the half difference to avoid cancellation near double roots.
    let half_diff = 0.5 * (a[(0, 0)] - a[(1, 1)]);
    let disc = half_diff * half_diff + a[(0, 1)] * a[(1, 0)];
    if disc >= 0.0 {
        let s = disc.sqrt();
        (half_trace + s).abs().max((half_trace - s).abs())
    } else {
        // Complex pair with modulus sqrt(det).
        det.sqrt()
    }
}

pub fn spectral_radius_complex(a: &Matrix2<Complex<f64>>) -> f64 {
    let half_trace = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let half_diff = (a[(0, 0)] - a[(1, 1)]) * 0.5;
    let s = (half_diff * half_diff + a[(0, 1)] * a[(1, 0)]).sqrt();
    (half_trace + s).norm().max((half_trace - s).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub dt_values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `ln error` against `ln dt`; `None` when fewer
    /// than two errors lie above the rounding floor.
    pub observed_order: Option<f64>,
    pub degenerate: bool,
}

/// Integrates to `t_final` with each `dt` and fits the error decay rate.
///
/// Errors below `1e3 * eps * |exact(t_final)|` are excluded from the fit.
pub fn observed_order<S, E>(
    system: &S,
    exact: E,
    u0: &DVector<f64>,
    t_final: f64,
    dt_values: &[f64],
    params: &GenAlphaParams,
    newton: &NewtonSettings,
) -> Result<ConvergenceReport>
where
    S: ResidualSystem + ?Sized,
    E: Fn(f64) -> DVector<f64>,
{
    if dt_values.len() < 3 {
        return Err(Error::Domain("need at least three time increments".into()));
    }
    if dt_values
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::Domain(
            "time increments must be strictly decreasing".into(),
        ));
    }
    let mut errors = Vec::with_capacity(dt_values.len());
    let u_dot0 = consistent_initial_rate(system, u0, 0.0, newton)?;
    let reference = exact(t_final);
    for &dt in dt_values {
        let n = (t_final / dt).round();
        if n < 1.0 || (n * dt - t_final).abs() > 1e-12 * t_final.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "t_final {t_final} is not a multiple of dt {dt}"
            )));
        }
        let dts = vec![dt; n as usize];
        let initial = StatePair::new(u0.clone(), u_dot0.clone(), 0.0)?;
        let end = integrate(
            system,
            initial,
            &dts,
            params,
            newton,
            |_, _, _, _, _| Ok(()),
        )?;
        errors.push(inf_norm(&(end.u - &reference)));
    }
    let floor = 1e3 * f64::EPSILON * inf_norm(&reference);
    let points: Vec<(f64, f64)> = dt_values
        .iter()
        .zip(&errors)
        .filter(|(_, &e)| e > floor)
        .map(|(&dt, &e)| (dt.ln(), e.ln()))
        .collect();
    let observed_order = least_squares_slope(&points);
    Ok(ConvergenceReport {
        dt_values: dt_values.to_vec(),
        errors,
        degenerate: observed_order.is_none(),
        observed_order,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), (x, y)| (sx + x / n, sy + y / n));
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::FreeDrift;
    use crate::params::{make_params, params_from_rho_inf};

    #[test]
    fn spectral_radius_of_simple_matrices() {
        let id = AmplificationMatrix {
            entries: Matrix2::identity(),
        };
        assert_eq!(spectral_radius(&id), 1.0);
        let d = AmplificationMatrix {
            entries: Matrix2::new(0.5, 0.0, 0.0, 0.25),
        };
        assert_eq!(spectral_radius(&d), 0.5);
        let rot = AmplificationMatrix {
            entries: Matrix2::new(0.0, -0.8, 0.8, 0.0),
        };
        assert!((spectral_radius(&rot) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn midpoint_amplification() {
        let p = params_from_rho_inf(1.0).unwrap();
        let a = amplification_matrix(-0.1, &p).unwrap();
        assert!((a.entries[(0, 0)] - 0.95 / 1.05).abs() < 1e-12);
    }

    #[test]
    fn zero_z_matrix() {
        // At z = 0 the residual forces U'_{n+alpha_m} = 0.
        for rho in [0.0, 0.5, 1.0] {
            let p = params_from_rho_inf(rho).unwrap();
            let a = amplification_matrix(0.0, &p).unwrap();
            let r = (1.0 - p.alpha_m) / p.alpha_m;
            let expected = Matrix2::new(1.0, 1.0 - p.gamma - p.gamma * r, 0.0, -r);
            assert!(
                (a.entries - expected).abs().max() < 1e-14,
                "rho {rho}: {a:?}"
            );
        }
    }

    #[test]
    fn complex_form_agrees_on_real_axis() {
        let p = params_from_rho_inf(0.3).unwrap();
        for z in [-50.0, -1.0, -0.01, 0.0] {
            let real = amplification_matrix(z, &p).unwrap().entries;
            let cplx = amplification_matrix_complex(Complex::new(z, 0.0), &p).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((real[(i, j)] - cplx[(i, j)].re).abs() < 1e-13);
                    assert_eq!(cplx[(i, j)].im, 0.0);
                }
            }
        }
        let a = amplification_matrix_complex(
            Complex::new(0.0, 1.0),
            &params_from_rho_inf(1.0).unwrap(),
        )
        .unwrap();
        // Midpoint rule is unitary on the imaginary axis.
        assert!((spectral_radius_complex(&a) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn drift_gives_degenerate_fit() {
        let u0 = DVector::from_element(1, 3.0);
        let report = observed_order(
            &FreeDrift::new(1),
            |_| DVector::from_element(1, 3.0),
            &u0,
            1.0,
            &[0.1, 0.05, 0.025],
            &params_from_rho_inf(0.5).unwrap(),
            &NewtonSettings::default(),
        )
        .unwrap();
        assert!(report.errors.iter().all(|&e| e == 0.0));
        assert!(report.degenerate);
        assert!(report.observed_order.is_none());
    }

    #[test]
    fn rejects_bad_dt_lists() {
        let sys = ScalarLinear::new(-1.0);
        let u0 = DVector::from_element(1, 1.0);
        let p = make_params(0.5, 0.5, 0.5).unwrap();
        let n = NewtonSettings::default();
        let exact = |t: f64| DVector::from_element(1, (-t).exp());
        assert!(observed_order(&sys, exact, &u0, 1.0, &[0.1, 0.05], &p, &n).is_err());
        assert!(observed_order(&sys, exact, &u0, 1.0, &[0.1, 0.2, 0.05], &p, &n).is_err());
        assert!(observed_order(&sys, exact, &u0, 1.0, &[0.3, 0.2, 0.1], &p, &n).is_err());
    }
}
