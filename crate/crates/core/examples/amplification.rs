//! Spectral radius of the amplification matrix for u' = lambda u over a
//! range of z = lambda dt and several high-frequency damping targets.

use genalpha::linear_analysis::{amplification_matrix_complex, spectral_radius_complex};
use genalpha::params::params_from_rho_inf;
use nalgebra::Complex;

fn main() -> genalpha::error::Result<()> {
    let rhos = [0.0, 0.25, 0.5, 0.75, 1.0];
    print!("{:>10}", "-z");
    for r in rhos {
        print!("  rho={r:<5}");
    }
    println!();
    for k in -2..=8 {
        let z = -(10f64).powi(k);
        print!("{:>10.0e}", -z);
        for r in rhos {
            let m = amplification_matrix_complex(Complex::new(z, 0.0), &params_from_rho_inf(r)?)?;
            print!("  {:<9.6}", spectral_radius_complex(&m));
        }
        println!();
    }
    Ok(())
}
