//! Euler equations advanced in pressure-primitive unknowns. The standard
//! residual loses conservation; the modified one keeps it to rounding.

use genalpha::audit::audited_run;
use genalpha::conslaw::{
    build_nonconservative_system, pressure_primitive_map, Euler1D, NonconservativeScheme,
    PeriodicFemSpace,
};
use genalpha::integrator::{consistent_initial_rate, StatePair};
use genalpha::newton::NewtonSettings;
use genalpha::params::params_from_rho_inf;
use std::f64::consts::PI;

fn main() -> genalpha::error::Result<()> {
    let space = PeriodicFemSpace::new(32)?;
    let model = Euler1D::new(1.4)?;
    let map = pressure_primitive_map(1.4, 1.0)?;
    let params = params_from_rho_inf(0.5)?;
    let newton = NewtonSettings::tight();
    let v0 = space.interpolate(3, |x| {
        let w = (2.0 * PI * x).sin();
        map.from_conserved(&model.conserved(1.0 + 0.1 * w, 0.1, 1.0 + 0.1 * w))
            .expect("positive density and pressure")
    })?;
    for scheme in [
        NonconservativeScheme::Standard,
        NonconservativeScheme::Modified,
    ] {
        let runner = build_nonconservative_system(space, model, map, scheme)?;
        let rate = consistent_initial_rate(runner.system(), &v0, 0.0, &newton)?;
        let run = audited_run(
            &runner,
            StatePair::new(v0.clone(), rate, 0.0)?,
            &vec![0.002; 100],
            &params,
            &newton,
        )?;
        let report = run.ledger.report()?;
        let drift: Vec<String> = report
            .max_drift
            .iter()
            .map(|d| format!("{d:.3e}"))
            .collect();
        println!("{scheme:?}: drift per component [{}]", drift.join(", "));
    }
    Ok(())
}
