//! Parallel and crossed capsules against spheres of the same radius.

use casimir_core::cli::{capsule_pair, sphere_pair};
use casimir_core::xi_quadrature::{Integrator, QuadratureSpec};

fn main() -> casimir_core::Result<()> {
    let integrator = Integrator::new(QuadratureSpec::default())?;
    println!("{:>6} {:>14} {:>14} {:>14}", "gap", "spheres", "crossed", "parallel");
    for gap in [0.5, 1.0, 2.0, 4.0] {
        let spheres = integrator.energy(&sphere_pair(1, gap)?)?.energy;
        let crossed = integrator.energy(&capsule_pair(8, 6.0, gap, true)?)?.energy;
        let parallel = integrator.energy(&capsule_pair(8, 6.0, gap, false)?)?.energy;
        println!("{gap:6} {spheres:14.5e} {crossed:14.5e} {parallel:14.5e}");
    }
    Ok(())
}
