//! Closed triangle surface meshes, their generators and MSH import, and the
//! RWG edge basis built on top of them.

mod msh;
mod rwg;
mod shapes;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::RigidTransform;

pub use msh::{parse_msh, write_msh};
pub use rwg::{RwgBasisSet, RwgEdge, RwgHalf};
pub use shapes::{generate_capsule, generate_sphere, generate_tetrahedron};

pub type Vec3 = nalgebra::Vector3<f64>;

/// A planar triangle with its cached geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    /// Vertex indices, counterclockwise when seen from outside.
    pub vertices: [usize; 3],
    pub area: f64,
    pub centroid: Vec3,
    /// Outward unit normal.
    pub normal: Vec3,
    /// Longest edge length.
    pub diameter: f64,
}

impl Panel {
    fn from_vertices(vertices: [usize; 3], coords: &[Vec3]) -> Self {
        let [a, b, c] = vertices.map(|i| coords[i]);
        let cross = (b - a).cross(&(c - a));
        let twice_area = cross.norm();
        let normal = if twice_area > 0.0 {
            cross / twice_area
        } else {
            Vec3::zeros()
        };
        let diameter = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        Panel {
            vertices,
            area: 0.5 * twice_area,
            centroid: (a + b + c) / 3.0,
            normal,
            diameter,
        }
    }

    /// Largest distance from the centroid to a vertex.
    pub fn radius(&self, coords: &[Vec3]) -> f64 {
        self.vertices
            .iter()
            .map(|&v| (coords[v] - self.centroid).norm())
            .fold(0.0, f64::max)
    }
}

/// Watertight, consistently oriented triangle surface.
///
/// Construction validates the mesh: every edge is shared by exactly two
/// panels that traverse it in opposite directions, no panel is degenerate and
/// no two vertices coincide. Each connected component is oriented so that its
/// normals point outward.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    panels: Vec<Panel>,
}

/// Relative tolerance for coincident vertices, scaled by the bounding-box diagonal.
const DUPLICATE_TOL: f64 = 1e-12;
/// Panels with area below this times diameter squared are rejected.
const DEGENERATE_TOL: f64 = 1e-12;

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        for (p, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!(
                    "panel {p} references vertex {v}, but there are only {} vertices",
                    vertices.len()
                )));
            }
        }

        let mut panels: Vec<Panel> = triangles
            .iter()
            .map(|&t| Panel::from_vertices(t, &vertices))
            .collect();
        for (i, panel) in panels.iter().enumerate() {
            let [a, b, c] = panel.vertices;
            if a == b || b == c || a == c || panel.area < DEGENERATE_TOL * panel.diameter.powi(2) {
                return Err(Error::DegeneratePanel {
                    panel: i,
                    area: panel.area,
                });
            }
        }
        check_duplicates(&vertices)?;

        let edges = edge_map(&panels);
        let mut keys: Vec<_> = edges.keys().copied().collect();
        keys.sort_unstable();
        for &(a, b) in &keys {
            let uses = &edges[&(a, b)];
            if uses.len() != 2 {
                return Err(Error::OpenSurface(a, b, uses.len()));
            }
            if uses[0].1 == uses[1].1 {
                return Err(Error::InconsistentOrientation(a, b));
            }
        }

        orient_outward(&vertices, &mut panels, &edges);
        Ok(TriangleMesh { vertices, panels })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_panels(&self) -> usize {
        self.panels.len()
    }

    /// Every edge of a closed mesh is shared by exactly two panels.
    pub fn num_edges(&self) -> usize {
        3 * self.panels.len() / 2
    }

    pub fn area(&self) -> f64 {
        self.panels.iter().map(|p| p.area).sum()
    }

    pub fn max_diameter(&self) -> f64 {
        self.panels.iter().map(|p| p.diameter).fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }

    /// Copy of the mesh with every vertex moved by `transform`. Topology and
    /// orientation are unchanged, so no revalidation is needed.
    pub fn transformed(&self, transform: &RigidTransform) -> TriangleMesh {
        let vertices: Vec<Vec3> = self
            .vertices
            .iter()
            .map(|v| transform.apply(v))
            .collect();
        let panels = self
            .panels
            .iter()
            .map(|p| Panel::from_vertices(p.vertices, &vertices))
            .collect();
        TriangleMesh { vertices, panels }
    }

    /// Sorted list of edges as `(v1, v2)` with `v1 < v2`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut keys: Vec<_> = edge_map(&self.panels).into_keys().collect();
        keys.sort_unstable();
        keys
    }

    /// Enclosed volume; positive for outward-oriented meshes.
    pub fn volume(&self) -> f64 {
        self.panels
            .iter()
            .map(|p| {
                let [a, b, c] = p.vertices.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }
}

/// For every undirected edge, the panels using it and whether they traverse it
/// from the lower to the higher vertex index.
fn edge_map(panels: &[Panel]) -> HashMap<(usize, usize), Vec<(usize, bool)>> {
    let mut map: HashMap<(usize, usize), Vec<(usize, bool)>> = HashMap::new();
    for (p, panel) in panels.iter().enumerate() {
        for k in 0..3 {
            let a = panel.vertices[k];
            let b = panel.vertices[(k + 1) % 3];
            map.entry((a.min(b), a.max(b))).or_default().push((p, a < b));
        }
    }
    map
}

fn check_duplicates(vertices: &[Vec3]) -> Result<()> {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let tol = DUPLICATE_TOL * (hi - lo).norm();
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by(|&a, &b| vertices[a].x.total_cmp(&vertices[b].x));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if vertices[j].x - vertices[i].x > tol {
                break;
            }
            if (vertices[j] - vertices[i]).norm() <= tol {
                return Err(Error::DuplicateVertex(i.min(j), i.max(j)));
            }
        }
    }
    Ok(())
}

/// Flip connected components whose enclosed volume is negative.
fn orient_outward(
    vertices: &[Vec3],
    panels: &mut [Panel],
    edges: &HashMap<(usize, usize), Vec<(usize, bool)>>,
) {
    let mut parent: Vec<usize> = (0..panels.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for uses in edges.values() {
        let (a, b) = (find(&mut parent, uses[0].0), find(&mut parent, uses[1].0));
        if a != b {
            parent[a] = b;
        }
    }
    let mut volume: HashMap<usize, f64> = HashMap::new();
    for p in 0..panels.len() {
        let root = find(&mut parent, p);
        let [a, b, c] = panels[p].vertices.map(|i| vertices[i]);
        *volume.entry(root).or_default() += a.dot(&b.cross(&c));
    }
    for p in 0..panels.len() {
        let root = find(&mut parent, p);
        if volume[&root] < 0.0 {
            let [a, b, c] = panels[p].vertices;
            panels[p] = Panel::from_vertices([a, c, b], vertices);
        }
    }
}
