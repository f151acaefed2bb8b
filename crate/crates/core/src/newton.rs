//! Plain Newton iteration with dense direct linear solves.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_iters: 30,
        }
    }
}

impl NewtonSettings {
    /// Tolerances near the rounding floor of the balance-law residuals,
    /// used where unconverged residual would show up in a ledger.
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_iters: 30,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain(format!(
                "Newton tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Domain("Newton max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Iteration count and residual history of one Newton solve.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual_norm: f64,
    /// Infinity norm of the residual at the predictor and after each update.
    pub trace: Vec<f64>,
}

pub(crate) fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub(crate) fn solve_dense(matrix: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = matrix.nrows();
    matrix
        .lu()
        .solve(rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(format!("{n}x{n} iteration matrix")))
}

/// Solves `residual(x) = 0` starting from `x0`.
///
/// Converged when `|r|_inf <= max(abs_tol, rel_tol * |r0|_inf)`, where `r0`
/// is the residual at the starting point.
pub(crate) fn solve<F, J>(
    x0: DVector<f64>,
    mut residual: F,
    mut jacobian: J,
    settings: &NewtonSettings,
) -> Result<(DVector<f64>, NewtonStats)>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    J: FnMut(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    settings.validate()?;
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut norm = inf_norm(&r);
    let tol = settings.abs_tol.max(settings.rel_tol * norm);
    let mut trace = vec![norm];
    let mut iterations = 0;
    // NaN never satisfies the test.
    while !matches!(
        norm.partial_cmp(&tol),
        Some(Ordering::Less | Ordering::Equal)
    ) {
        if iterations == settings.max_iters || !norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                last_residual: norm,
                trace,
            });
        }
        let delta = solve_dense(jacobian(&x)?, &r)?;
        x -= delta;
        r = residual(&x)?;
        norm = inf_norm(&r);
        trace.push(norm);
        iterations += 1;
    }
    Ok((
        x,
        NewtonStats {
            iterations,
            residual_norm: norm,
            trace,
        },
    ))
}
