//! Checks the midpoint identity on the pendulum for a second-order
//! parameter set and for one with gamma moved off the second-order value.

use genalpha::integrator::{
    consistent_initial_rate, midpoint_identity_residual, midpoint_identity_scale, step, StatePair,
};
use genalpha::models::Pendulum;
use genalpha::newton::NewtonSettings;
use genalpha::params::{make_params, params_from_rho_inf};
use nalgebra::DVector;

fn max_scaled_residual(params: &genalpha::params::GenAlphaParams) -> genalpha::error::Result<f64> {
    let newton = NewtonSettings::default();
    let u0 = DVector::from_vec(vec![1.0, 0.0]);
    let rate = consistent_initial_rate(&Pendulum, &u0, 0.0, &newton)?;
    let mut state = StatePair::new(u0, rate, 0.0)?;
    let dt = 0.1;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let next = step(&Pendulum, &state, dt, params, &newton)?;
        let r = midpoint_identity_residual(&state, &next, dt, params)?
            / midpoint_identity_scale(&state, &next, params);
        worst = worst.max(r);
        state = next;
    }
    Ok(worst)
}

fn main() -> genalpha::error::Result<()> {
    let good = params_from_rho_inf(0.5)?;
    let bad = make_params(good.alpha_m, good.alpha_f, good.gamma + 0.25)?;
    println!(
        "second order  gamma = {:.4}: max scaled residual {:.3e}",
        good.gamma,
        max_scaled_residual(&good)?
    );
    println!(
        "first order   gamma = {:.4}: max scaled residual {:.3e}",
        bad.gamma,
        max_scaled_residual(&bad)?
    );
    Ok(())
}
