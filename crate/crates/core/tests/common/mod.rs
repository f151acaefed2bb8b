//! Reference implementations and problem builders shared by the
//! integration tests. The midpoint solvers here do not use the library
//! integrator.

#![allow(dead_code)]

use std::f64::consts::PI;

use genalpha::conslaw::{Euler1D, PeriodicFemSpace};
use nalgebra::{DVector, Matrix2, Vector2};

/// Implicit midpoint for `u' = lambda u`: closed-form amplification.
pub fn midpoint_linear(lambda: f64, u0: f64, dt: f64, steps: usize) -> Vec<f64> {
    let g = (1.0 + 0.5 * lambda * dt) / (1.0 - 0.5 * lambda * dt);
    let mut out = Vec::with_capacity(steps + 1);
    let mut u = u0;
    out.push(u);
    for _ in 0..steps {
        u *= g;
        out.push(u);
    }
    out
}

/// Implicit midpoint for the pendulum `q' = p, p' = -sin q`, solved for
/// the end state with a hand-written 2x2 Newton loop.
pub fn midpoint_pendulum(q0: f64, p0: f64, dt: f64, steps: usize) -> Vec<Vector2<f64>> {
    let mut y = Vector2::new(q0, p0);
    let mut out = vec![y];
    for _ in 0..steps {
        let y0 = y;
        let mut y1 = y0;
        for _ in 0..50 {
            let mid = (y0 + y1) * 0.5;
            let g = Vector2::new(
                (y1[0] - y0[0]) / dt - mid[1],
                (y1[1] - y0[1]) / dt + mid[0].sin(),
            );
            if g.amax() < 1e-15 {
                break;
            }
            let jac = Matrix2::new(1.0 / dt, -0.5, 0.5 * mid[0].cos(), 1.0 / dt);
            y1 -= jac.lu().solve(&g).expect("nonsingular midpoint Jacobian");
        }
        y = y1;
        out.push(y);
    }
    out
}

pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn bump(x: f64) -> f64 {
    (-((x - 0.5) / 0.1).powi(2)).exp()
}

/// Smooth Euler data with density and pressure waves on a uniform drift.
pub fn euler_initial(space: &PeriodicFemSpace, model: &Euler1D) -> DVector<f64> {
    space
        .interpolate(3, |x| {
            let w = (2.0 * PI * x).sin();
            model.conserved(1.0 + 0.1 * w, 0.1, 1.0 + 0.1 * w)
        })
        .expect("periodic interpolation")
}

pub fn sine(space: &PeriodicFemSpace, amplitude: f64) -> DVector<f64> {
    space
        .interpolate(1, |x| {
            DVector::from_element(1, amplitude * (2.0 * PI * x).sin())
        })
        .expect("periodic interpolation")
}
