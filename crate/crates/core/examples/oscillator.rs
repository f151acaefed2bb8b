//! Second-order form on the harmonic oscillator: the velocity identity
//! holds to rounding and the numerical period error shrinks with dt.

use genalpha::models::Oscillator;
use genalpha::newton::NewtonSettings;
use genalpha::params::params_from_rho_inf;
use genalpha::second_order::{
    consistent_initial_acceleration, second_order_identity_residual, second_order_identity_scale,
    step_second_order, SecondOrderState,
};
use nalgebra::DVector;

fn main() -> genalpha::error::Result<()> {
    let sys = Oscillator::new(2.0);
    let newton = NewtonSettings::default();
    let params = params_from_rho_inf(0.8)?.with_default_beta();
    for dt in [0.1f64, 0.05, 0.025] {
        let u0 = DVector::from_element(1, 1.0);
        let v0 = DVector::from_element(1, 0.0);
        let a0 = consistent_initial_acceleration(&sys, &u0, &v0, 0.0, &newton)?;
        let mut state = SecondOrderState::new(u0, v0, a0, 0.0)?;
        let mut worst: f64 = 0.0;
        for _ in 0..(5.0 / dt).round() as usize {
            let next = step_second_order(&sys, &state, dt, &params, &newton)?;
            worst = worst.max(
                second_order_identity_residual(&state, &next, dt, &params)?
                    / second_order_identity_scale(&state, &next, &params),
            );
            state = next;
        }
        let err = (state.u[0] - sys.exact(1.0, 0.0, state.t)).abs();
        println!("dt {dt:<6} error at t=5 {err:.3e}  identity residual {worst:.2e}");
    }
    Ok(())
}
