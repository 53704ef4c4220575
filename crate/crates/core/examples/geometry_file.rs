//! Parse a geometry description and inspect the resulting configuration.

use std::path::Path;

use casimir_core::geometry::parse_geometry;

const GEOMETRY: &str = "\
# a sphere, a tilted capsule and a tetrahedron
object ball sphere(1, 2)
object rod capsule(0.5, 4, 10) rot 90 y rot 30 z move 0 0 3.5
object tip tetrahedron(1, 1) pivot 0 0 0.2 rot 45 x move 4 0 0
";

fn main() -> casimir_core::Result<()> {
    let config = parse_geometry(GEOMETRY, Path::new("."))?.into_configuration()?;
    println!("{} objects, N = {}", config.len(), config.dimension());
    for (i, object) in config.objects().iter().enumerate() {
        let (lo, hi) = object.placed().bounding_box();
        let (offset, size) = config.block(i);
        println!(
            "  {:<5} {:4} RWG functions, rows {offset}..{}, box ({:.2}, {:.2}, {:.2}) to ({:.2}, {:.2}, {:.2})",
            object.label(),
            object.len(),
            offset + size,
            lo.x,
            lo.y,
            lo.z,
            hi.x,
            hi.y,
            hi.z
        );
    }
    for i in 0..config.len() {
        for j in i + 1..config.len() {
            println!("  separation {} - {}: {:.4}", config.objects()[i].label(), config.objects()[j].label(), config.min_separation(i, j)?);
        }
    }
    println!("d_min = {:.4}", config.d_min().unwrap());
    Ok(())
}
