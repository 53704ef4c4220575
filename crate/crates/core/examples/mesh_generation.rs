//! Generated shapes, their RWG bases and an MSH round trip.

use std::sync::Arc;

use casimir_core::meshio::{generate_capsule, generate_sphere, generate_tetrahedron, parse_msh, write_msh, RwgBasisSet, TriangleMesh};

fn report(name: &str, mesh: &TriangleMesh) {
    let basis = RwgBasisSet::new(Arc::new(mesh.clone()));
    println!(
        "{name:<22} V = {:5}  E = {:5}  F = {:5}  area = {:8.4}  volume = {:7.4}  RWG functions = {}",
        mesh.num_vertices(),
        mesh.num_edges(),
        mesh.num_panels(),
        mesh.area(),
        mesh.volume(),
        basis.len()
    );
}

fn main() -> casimir_core::Result<()> {
    for s in 0..=3 {
        report(&format!("sphere R=1 s={s}"), &generate_sphere(1.0, s)?);
    }
    for ring in [8, 12, 16] {
        report(&format!("capsule R=1 L=6 n={ring}"), &generate_capsule(1.0, 6.0, ring)?);
    }
    for s in 0..=2 {
        report(&format!("tetrahedron L=1 s={s}"), &generate_tetrahedron(1.0, s)?);
    }

    let mesh = generate_sphere(1.0, 1)?;
    let text = write_msh(&mesh);
    let back = parse_msh(&text)?;
    println!("MSH round trip: {} bytes, identical vertices: {}", text.len(), back.vertices() == mesh.vertices());
    Ok(())
}
