use std::sync::Arc;

use super::{TriangleMesh, Vec3};

/// One side of an RWG function: the panel and the vertex opposite the shared edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RwgHalf {
    pub panel: usize,
    pub free_vertex: usize,
}

/// RWG function attached to one interior edge.
///
/// On the plus panel `f(x) = l / (2 A+) (x - p+)`, on the minus panel
/// `f(x) = -l / (2 A-) (x - p-)`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwgEdge {
    /// Edge endpoints, `v1 < v2`.
    pub vertices: (usize, usize),
    /// The panel traversing the edge as `v1 -> v2`.
    pub plus: RwgHalf,
    pub minus: RwgHalf,
    pub length: f64,
}

impl RwgEdge {
    /// Constant surface divergence on the plus (`+l/A+`) and minus (`-l/A-`) panels.
    pub fn divergence(&self, mesh: &TriangleMesh) -> (f64, f64) {
        let panels = mesh.panels();
        (
            self.length / panels[self.plus.panel].area,
            -self.length / panels[self.minus.panel].area,
        )
    }

    /// Value of the basis function at `x`, assumed to lie on `panel`.
    pub fn value(&self, mesh: &TriangleMesh, panel: usize, x: &Vec3) -> Vec3 {
        let v = mesh.vertices();
        let p = &mesh.panels()[panel];
        if panel == self.plus.panel {
            (x - v[self.plus.free_vertex]) * (self.length / (2.0 * p.area))
        } else if panel == self.minus.panel {
            (x - v[self.minus.free_vertex]) * (-self.length / (2.0 * p.area))
        } else {
            Vec3::zeros()
        }
    }
}

/// Local view of one panel's three RWG half-functions, indexed by the local
/// vertex that is free (opposite the edge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelBasis {
    pub basis: [usize; 3],
    /// +1 on the plus panel, -1 on the minus panel.
    pub sign: [f64; 3],
}

/// RWG basis of one closed mesh: one function per edge, ordered by sorted
/// `(v1, v2)` pairs.
#[derive(Debug, Clone)]
pub struct RwgBasisSet {
    mesh: Arc<TriangleMesh>,
    edges: Vec<RwgEdge>,
    panel_bases: Vec<PanelBasis>,
}

impl RwgBasisSet {
    pub fn new(mesh: Arc<TriangleMesh>) -> Self {
        let coords = mesh.vertices();
        let panels = mesh.panels();
        let mut halves: Vec<((usize, usize), bool, RwgHalf, usize)> =
            Vec::with_capacity(3 * panels.len());
        for (p, panel) in panels.iter().enumerate() {
            for k in 0..3 {
                let a = panel.vertices[(k + 1) % 3];
                let b = panel.vertices[(k + 2) % 3];
                let half = RwgHalf {
                    panel: p,
                    free_vertex: panel.vertices[k],
                };
                halves.push(((a.min(b), a.max(b)), a < b, half, k));
            }
        }
        halves.sort_unstable_by_key(|h| (h.0, !h.1));

        let mut edges = Vec::with_capacity(halves.len() / 2);
        let mut panel_bases = vec![
            PanelBasis {
                basis: [usize::MAX; 3],
                sign: [0.0; 3],
            };
            panels.len()
        ];
        for pair in halves.chunks_exact(2) {
            let (plus, minus) = (&pair[0], &pair[1]);
            debug_assert!(plus.0 == minus.0 && plus.1 && !minus.1);
            let (v1, v2) = plus.0;
            let index = edges.len();
            edges.push(RwgEdge {
                vertices: (v1, v2),
                plus: plus.2,
                minus: minus.2,
                length: (coords[v2] - coords[v1]).norm(),
            });
            panel_bases[plus.2.panel].basis[plus.3] = index;
            panel_bases[plus.2.panel].sign[plus.3] = 1.0;
            panel_bases[minus.2.panel].basis[minus.3] = index;
            panel_bases[minus.2.panel].sign[minus.3] = -1.0;
        }
        RwgBasisSet {
            mesh,
            edges,
            panel_bases,
        }
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn edges(&self) -> &[RwgEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn panel_basis(&self, panel: usize) -> &PanelBasis {
        &self.panel_bases[panel]
    }

    /// Panels in the support of basis function `index` with their signs.
    pub fn support(&self, index: usize) -> [(usize, f64); 2] {
        let e = &self.edges[index];
        [(e.plus.panel, 1.0), (e.minus.panel, -1.0)]
    }

    /// Local slot (free-vertex position) of basis `index` within `panel`.
    pub fn local_slot(&self, panel: usize, index: usize) -> Option<usize> {
        self.panel_bases[panel].basis.iter().position(|&b| b == index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshio::generate_sphere;

    fn tetra() -> Arc<TriangleMesh> {
        let v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        Arc::new(TriangleMesh::new(v, vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]]).unwrap())
    }

    #[test]
    fn tetrahedron_has_six_functions() {
        let basis = RwgBasisSet::new(tetra());
        assert_eq!(basis.len(), 6);
        let keys: Vec<_> = basis.edges().iter().map(|e| e.vertices).collect();
        assert_eq!(keys, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn plus_panel_traverses_edge_forward() {
        let mesh = tetra();
        let basis = RwgBasisSet::new(mesh.clone());
        for e in basis.edges() {
            let tri = mesh.panels()[e.plus.panel].vertices;
            let k = tri.iter().position(|&v| v == e.vertices.0).unwrap();
            assert_eq!(tri[(k + 1) % 3], e.vertices.1);
        }
    }

    #[test]
    fn divergence_is_length_over_area() {
        let mesh = tetra();
        let basis = RwgBasisSet::new(mesh.clone());
        // edge (0,1) has length 1 and borders the two right triangles of area 1/2
        let e = basis.edges()[0];
        assert_eq!(e.length, 1.0);
        let (dp, dm) = e.divergence(&mesh);
        assert!((dp - 2.0).abs() < 1e-15 && (dm + 2.0).abs() < 1e-15);
    }

    #[test]
    fn charge_neutral_and_normal_continuous() {
        let mesh = Arc::new(generate_sphere(1.0, 1).unwrap());
        let basis = RwgBasisSet::new(mesh.clone());
        assert_eq!(basis.len(), 120);
        let v = mesh.vertices();
        for e in basis.edges() {
            let (dp, dm) = e.divergence(&mesh);
            let total = dp * mesh.panels()[e.plus.panel].area + dm * mesh.panels()[e.minus.panel].area;
            assert!(total.abs() < 1e-14);

            // flux through the shared edge agrees from both sides
            let (a, b) = (v[e.vertices.0], v[e.vertices.1]);
            let mid = 0.3 * a + 0.7 * b;
            let fp = e.value(&mesh, e.plus.panel, &mid);
            let fm = e.value(&mesh, e.minus.panel, &mid);
            let tp = mesh.panels()[e.plus.panel].normal.cross(&(b - a)).normalize();
            let tm = mesh.panels()[e.minus.panel].normal.cross(&(b - a)).normalize();
            assert!((fp.dot(&tp) - fm.dot(&tm)).abs() < 1e-12);
        }
    }
}
