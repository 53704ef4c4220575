//! Casimir energy and force between two conducting spheres.
//!
//! Usage: `cargo run --release --example sphere_pair -- [level] [distance]`

use casimir_core::geometry::{Configuration, ObjectInstance, RigidTransform};
use casimir_core::meshio::{generate_sphere, Vec3};
use casimir_core::xi_quadrature::{Integrator, QuadratureSpec};

fn main() -> casimir_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let level: usize = args.next().map_or(Ok(1), |s| s.parse()).expect("level must be an integer");
    let distance: f64 = args.next().map_or(Ok(4.0), |s| s.parse()).expect("distance must be a number");

    let sphere = ObjectInstance::from_mesh("lower", generate_sphere(1.0, level)?, RigidTransform::identity());
    let upper = ObjectInstance::new("upper", sphere.basis().clone(), RigidTransform::translation(Vec3::new(0.0, 0.0, distance)));
    let config = Configuration::new(vec![sphere, upper])?;

    let integrator = Integrator::new(QuadratureSpec::default())?;
    let result = integrator.force(&config, 1, Vec3::z())?;
    println!("N = {}, d = {distance}", result.n_basis);
    println!("energy = {:.10e} ħc/R", result.energy);
    println!("force on upper sphere = {:.10e} ħc/R²", result.force.unwrap());
    println!("wall time {:.2} s", result.wall_seconds);
    for s in &result.samples {
        println!("  κ = {:10.4e}  log det ratio = {:11.4e}  trace = {:11.4e}", s.kappa, s.energy_integrand, s.force_integrand.unwrap());
    }
    Ok(())
}
