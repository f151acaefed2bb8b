//! Alternating step sizes break the match between the shifted states of
//! consecutive steps, so the ledger is no longer certified.

use genalpha::audit::audited_run;
use genalpha::conslaw::{build_conslaw_system, Burgers1D, ConsLawStabilization, PeriodicFemSpace};
use genalpha::integrator::{consistent_initial_rate, StatePair};
use genalpha::newton::NewtonSettings;
use genalpha::params::params_from_rho_inf;
use nalgebra::DVector;
use std::f64::consts::PI;

fn main() -> genalpha::error::Result<()> {
    let space = PeriodicFemSpace::new(32)?;
    let sys = build_conslaw_system(space, Burgers1D::new(0.01)?, ConsLawStabilization::None)?;
    let newton = NewtonSettings::tight();
    let params = params_from_rho_inf(0.5)?;
    let u0 = space.interpolate(1, |x| DVector::from_element(1, 0.5 * (2.0 * PI * x).sin()))?;
    let rate = consistent_initial_rate(&sys, &u0, 0.0, &newton)?;
    let uniform = vec![0.0015; 100];
    let alternating: Vec<f64> = (0..100)
        .map(|n| if n % 2 == 0 { 0.001 } else { 0.002 })
        .collect();
    for (label, dts) in [("uniform", uniform), ("alternating", alternating)] {
        let run = audited_run(
            &sys,
            StatePair::new(u0.clone(), rate.clone(), 0.0)?,
            &dts,
            &params,
            &newton,
        )?;
        let report = run.ledger.report()?;
        println!(
            "{label:<12} certified {:<5} shift mismatch {:.3e} drift {:.3e}",
            report.certified,
            report.max_shift_mismatch,
            report.max_abs_drift()
        );
    }
    Ok(())
}
