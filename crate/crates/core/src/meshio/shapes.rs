use std::collections::HashMap;
use std::f64::consts::PI;

use super::{TriangleMesh, Vec3};
use crate::error::{Error, Result};

fn require(cond: bool, message: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(message()))
    }
}

/// Reorder every triangle so its normal points away from `center`.
/// Only valid for surfaces that are star-shaped about `center`.
fn orient_from(center: Vec3, vertices: &[Vec3], triangles: &mut [[usize; 3]]) {
    for t in triangles.iter_mut() {
        let [a, b, c] = t.map(|i| vertices[i]);
        let n = (b - a).cross(&(c - a));
        if n.dot(&((a + b + c) / 3.0 - center)) < 0.0 {
            t.swap(1, 2);
        }
    }
}

/// Split every triangle into four, optionally pushing new vertices through `project`.
fn subdivide(
    vertices: &mut Vec<Vec3>,
    triangles: &[[usize; 3]],
    project: &dyn Fn(Vec3) -> Vec3,
) -> Vec<[usize; 3]> {
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
        *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
            vertices.push(project(0.5 * (vertices[a] + vertices[b])));
            vertices.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * triangles.len());
    for &[a, b, c] in triangles {
        let ab = midpoint(a, b, vertices);
        let bc = midpoint(b, c, vertices);
        let ca = midpoint(c, a, vertices);
        out.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    out
}

/// Icosphere of the given radius centered at the origin, with two icosahedron
/// vertices on the z axis. Each level splits every face into four and projects
/// the new vertices onto the sphere, so the mesh has `20 * 4^s` panels.
pub fn generate_sphere(radius: f64, subdivisions: usize) -> Result<TriangleMesh> {
    require(radius > 0.0 && radius.is_finite(), || {
        format!("sphere radius must be positive, got {radius}")
    })?;
    let ring_z = 1.0 / 5f64.sqrt();
    let ring_r = 2.0 / 5f64.sqrt();
    let mut vertices = vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)];
    for k in 0..5 {
        let t = 2.0 * PI * k as f64 / 5.0;
        vertices.push(Vec3::new(ring_r * t.cos(), ring_r * t.sin(), ring_z));
    }
    for k in 0..5 {
        let t = 2.0 * PI * (k as f64 + 0.5) / 5.0;
        vertices.push(Vec3::new(ring_r * t.cos(), ring_r * t.sin(), -ring_z));
    }
    let upper = |k: usize| 2 + k % 5;
    let lower = |k: usize| 7 + k % 5;
    let mut triangles = Vec::with_capacity(20);
    for k in 0..5 {
        triangles.push([0, upper(k), upper(k + 1)]);
        triangles.push([upper(k), lower(k), upper(k + 1)]);
        triangles.push([upper(k + 1), lower(k), lower(k + 1)]);
        triangles.push([1, lower(k + 1), lower(k)]);
    }
    let unit = |v: Vec3| v.normalize();
    for _ in 0..subdivisions {
        triangles = subdivide(&mut vertices, &triangles, &unit);
    }
    for v in vertices.iter_mut() {
        *v *= radius;
    }
    orient_from(Vec3::zeros(), &vertices, &mut triangles);
    TriangleMesh::new(vertices, triangles)
}

/// Capsule along the z axis, centered at the origin: a cylinder of length
/// `total_length - 2 radius` closed by two hemispheres.
///
/// `resolution` is the number of vertices around each ring; rings are spaced
/// by roughly `2 pi radius / resolution` along the cylinder and in polar angle
/// on the caps.
pub fn generate_capsule(radius: f64, total_length: f64, resolution: usize) -> Result<TriangleMesh> {
    require(radius > 0.0 && radius.is_finite(), || {
        format!("capsule radius must be positive, got {radius}")
    })?;
    require(total_length >= 2.0 * radius && total_length.is_finite(), || {
        format!("capsule length {total_length} is shorter than its diameter {}", 2.0 * radius)
    })?;
    require(resolution >= 3, || {
        format!("capsule resolution must be at least 3, got {resolution}")
    })?;

    let step = 2.0 * PI * radius / resolution as f64;
    let half_cylinder = 0.5 * total_length - radius;
    let cap_rings = ((0.5 * PI * radius / step).round() as usize).max(1);
    let cylinder_segments = if half_cylinder > 0.0 {
        ((2.0 * half_cylinder / step).round() as usize).max(1)
    } else {
        0
    };

    // ring heights and radii from the north cap down to the south cap
    let mut rings: Vec<(f64, f64)> = Vec::new();
    for i in 1..=cap_rings {
        let polar = 0.5 * PI * i as f64 / cap_rings as f64;
        rings.push((half_cylinder + radius * polar.cos(), radius * polar.sin()));
    }
    for i in 1..=cylinder_segments {
        let z = half_cylinder - 2.0 * half_cylinder * i as f64 / cylinder_segments as f64;
        rings.push((z, radius));
    }
    for i in (1..cap_rings).rev() {
        let polar = 0.5 * PI * i as f64 / cap_rings as f64;
        rings.push((-half_cylinder - radius * polar.cos(), radius * polar.sin()));
    }

    let mut vertices = vec![Vec3::new(0.0, 0.0, half_cylinder + radius)];
    for &(z, r) in &rings {
        for k in 0..resolution {
            let t = 2.0 * PI * k as f64 / resolution as f64;
            vertices.push(Vec3::new(r * t.cos(), r * t.sin(), z));
        }
    }
    let south = vertices.len();
    vertices.push(Vec3::new(0.0, 0.0, -half_cylinder - radius));

    let at = |ring: usize, k: usize| 1 + ring * resolution + k % resolution;
    let mut triangles = Vec::new();
    for k in 0..resolution {
        triangles.push([0, at(0, k), at(0, k + 1)]);
    }
    for ring in 0..rings.len() - 1 {
        for k in 0..resolution {
            let (a, b) = (at(ring, k), at(ring, k + 1));
            let (c, d) = (at(ring + 1, k), at(ring + 1, k + 1));
            triangles.push([a, c, b]);
            triangles.push([b, c, d]);
        }
    }
    let last = rings.len() - 1;
    for k in 0..resolution {
        triangles.push([south, at(last, k + 1), at(last, k)]);
    }
    orient_from(Vec3::zeros(), &vertices, &mut triangles);
    TriangleMesh::new(vertices, triangles)
}

/// Regular tetrahedron with its centroid at the origin, apex on the +z axis
/// and base parallel to the xy plane. Base vertices sit at azimuths 90, 210
/// and 330 degrees, so one of them lies on the +y axis.
/// Faces are split four ways `subdivisions` times and stay planar.
pub fn generate_tetrahedron(edge: f64, subdivisions: usize) -> Result<TriangleMesh> {
    require(edge > 0.0 && edge.is_finite(), || {
        format!("tetrahedron edge must be positive, got {edge}")
    })?;
    let height = (2.0f64 / 3.0).sqrt() * edge;
    let circumradius = edge / 3f64.sqrt();
    let mut vertices = vec![Vec3::new(0.0, 0.0, 0.75 * height)];
    for deg in [90.0f64, 210.0, 330.0] {
        let t = deg.to_radians();
        vertices.push(Vec3::new(
            circumradius * t.cos(),
            circumradius * t.sin(),
            -0.25 * height,
        ));
    }
    let mut triangles = vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]];
    for _ in 0..subdivisions {
        triangles = subdivide(&mut vertices, &triangles, &|v| v);
    }
    orient_from(Vec3::zeros(), &vertices, &mut triangles);
    TriangleMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euler(mesh: &TriangleMesh) -> i64 {
        mesh.num_vertices() as i64 - mesh.num_edges() as i64 + mesh.num_panels() as i64
    }

    #[test]
    fn icosahedron() {
        let m = generate_sphere(1.0, 0).unwrap();
        assert_eq!((m.num_panels(), m.num_vertices(), m.num_edges()), (20, 12, 30));
        assert_eq!(euler(&m), 2);
        let area = m.area();
        assert!(area < 4.0 * PI && area > 0.75 * 4.0 * PI);
        assert!((area - 9.574541383273939).abs() < 1e-12);
    }

    #[test]
    fn level_two_icosphere_area() {
        // facet-area sum of the level-2 icosphere, computed independently
        let m = generate_sphere(1.0, 2).unwrap();
        assert_eq!(m.num_panels(), 320);
        assert!((m.area() - 12.329848595234688).abs() < 1e-10);
        assert!((m.area() / (4.0 * PI) - 1.0).abs() < 0.02);
    }

    #[test]
    fn sphere_vertices_on_radius() {
        let m = generate_sphere(2.0, 1).unwrap();
        assert_eq!(m.num_panels(), 80);
        assert_eq!(euler(&m), 2);
        for v in m.vertices() {
            assert!((v.norm() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_has_pole_vertices() {
        let m = generate_sphere(1.0, 3).unwrap();
        assert_eq!(m.vertices()[0], Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(m.vertices()[1], Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn degenerate_capsule_is_a_sphere() {
        let m = generate_capsule(1.0, 2.0, 8).unwrap();
        assert_eq!(euler(&m), 2);
        for v in m.vertices() {
            assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn capsule_extent() {
        let m = generate_capsule(1.0, 6.0, 12).unwrap();
        assert_eq!(euler(&m), 2);
        let (lo, hi) = m.bounding_box();
        assert!((hi.z - lo.z - 6.0).abs() < 1e-12);
        assert!((hi.x - lo.x - 2.0).abs() < 1e-12);
        assert!((hi.y - lo.y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn capsule_area() {
        let m = generate_capsule(1.0, 6.0, 16).unwrap();
        let exact = 2.0 * PI * 4.0 + 4.0 * PI;
        assert!((m.area() / exact - 1.0).abs() < 0.02, "{}", m.area() / exact);
    }

    #[test]
    fn capsule_rejects_bad_input() {
        assert!(generate_capsule(1.0, 1.5, 12).is_err());
        assert!(generate_capsule(1.0, 4.0, 2).is_err());
        assert!(generate_capsule(-1.0, 4.0, 12).is_err());
    }

    #[test]
    fn tetrahedron_area_and_edges() {
        let m = generate_tetrahedron(1.0, 0).unwrap();
        assert_eq!(m.num_panels(), 4);
        assert!((m.area() - 3f64.sqrt()).abs() < 1e-14);
        for (a, b) in m.edges() {
            assert!(((m.vertices()[a] - m.vertices()[b]).norm() - 1.0).abs() < 1e-14);
        }
        let m1 = generate_tetrahedron(1.0, 1).unwrap();
        assert_eq!(m1.num_panels(), 16);
        assert!((m1.area() - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(euler(&m1), 2);
    }

    #[test]
    fn tetrahedron_orientation() {
        let m = generate_tetrahedron(2.0, 0).unwrap();
        let v = m.vertices();
        assert!(v[0].x.abs() < 1e-15 && v[0].y.abs() < 1e-15 && v[0].z > 0.0);
        assert!((v[1].z - v[2].z).abs() < 1e-15 && (v[2].z - v[3].z).abs() < 1e-15);
        assert_eq!(v[1..].iter().filter(|p| p.x > 1e-12).count(), 1);
        let centroid: Vec3 = v.iter().sum::<Vec3>() / 4.0;
        assert!(centroid.norm() < 1e-14);
    }
}
