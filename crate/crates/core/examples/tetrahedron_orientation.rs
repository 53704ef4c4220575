//! Energy of two tetrahedra as the one at +y turns about z (φ) and y (θ).

use casimir_core::cli::{tetrahedron_pair, Range};
use casimir_core::xi_quadrature::{Integrator, QuadratureSpec};

fn main() -> casimir_core::Result<()> {
    let integrator = Integrator::new(QuadratureSpec::default())?;
    let phis = Range::new(0.0, 120.0, 5)?.values();
    print!("θ \\ φ  ");
    for phi in &phis {
        print!("{phi:>12}");
    }
    println!();
    for theta in Range::new(-60.0, 60.0, 5)?.values() {
        print!("{theta:>6} ");
        for &phi in &phis {
            let energy = integrator.energy(&tetrahedron_pair(1, 1.0, theta, phi)?)?.energy;
            print!("{energy:12.4e}");
        }
        println!();
    }
    Ok(())
}
