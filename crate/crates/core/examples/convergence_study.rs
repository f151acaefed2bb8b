//! Observed temporal order on a linear decay and on the logistic equation.

use genalpha::linear_analysis::observed_order;
use genalpha::models::{Logistic, ScalarLinear};
use genalpha::newton::NewtonSettings;
use genalpha::params::params_from_rho_inf;
use nalgebra::DVector;

fn main() -> genalpha::error::Result<()> {
    let newton = NewtonSettings::default();
    let dts = [0.1, 0.05, 0.025, 0.0125, 0.00625];
    let linear = ScalarLinear::new(-1.0);
    let logistic = Logistic { rate: 1.0 };
    for rho in [0.0, 0.5, 1.0] {
        let params = params_from_rho_inf(rho)?;
        let a = observed_order(
            &linear,
            |t| DVector::from_element(1, linear.exact(1.0, t)),
            &DVector::from_element(1, 1.0),
            1.0,
            &dts,
            &params,
            &newton,
        )?;
        let b = observed_order(
            &logistic,
            |t| DVector::from_element(1, logistic.exact(0.1, t)),
            &DVector::from_element(1, 0.1),
            1.0,
            &dts,
            &params,
            &newton,
        )?;
        println!(
            "rho_inf {rho:.2}: linear order {:.4}, logistic order {:.4}",
            a.observed_order.unwrap_or(f64::NAN),
            b.observed_order.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
