//! Viscous Burgers on a periodic mesh with a spatially varying source.

use genalpha::audit::audited_run;
use genalpha::conslaw::{build_conslaw_system, Burgers1D, ConsLawStabilization, PeriodicFemSpace};
use genalpha::integrator::{consistent_initial_rate, StatePair};
use genalpha::newton::NewtonSettings;
use genalpha::params::params_from_rho_inf;
use nalgebra::DVector;
use std::f64::consts::PI;

fn main() -> genalpha::error::Result<()> {
    let space = PeriodicFemSpace::new(48)?;
    let model = Burgers1D::new(0.005)?.with_source(|x, t| 0.2 * (2.0 * PI * x).cos() * (1.0 + t));
    let sys = build_conslaw_system(space, model, ConsLawStabilization::None)?;
    let newton = NewtonSettings::tight();
    let u0 = space.interpolate(1, |x| {
        DVector::from_element(1, 0.5 + 0.4 * (2.0 * PI * x).sin())
    })?;
    let rate = consistent_initial_rate(&sys, &u0, 0.0, &newton)?;
    for rho in [0.0, 0.5, 1.0] {
        let params = params_from_rho_inf(rho)?;
        let run = audited_run(
            &sys,
            StatePair::new(u0.clone(), rate.clone(), 0.0)?,
            &vec![0.004; 100],
            &params,
            &newton,
        )?;
        let report = run.ledger.report()?;
        println!(
            "rho_inf {rho:.1}: drift {:.3e}, Newton iterations <= {}",
            report.max_abs_drift(),
            run.max_newton_iterations
        );
    }
    Ok(())
}
