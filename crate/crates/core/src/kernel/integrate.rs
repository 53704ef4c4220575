use std::sync::Arc;

use super::rules::{DuffyRule, Singularity, TriangleRule};
use super::{classify_pair, Kernel, PanelPairClass};
use crate::error::{Error, Result};
use crate::meshio::{RwgBasisSet, TriangleMesh, Vec3};

/// Quadrature rules for every panel-pair class.
#[derive(Debug, Clone)]
pub struct PanelRules {
    pub far: TriangleRule,
    pub near: TriangleRule,
    pub identical: DuffyRule,
    pub common_edge: DuffyRule,
    pub common_vertex: DuffyRule,
}

impl PanelRules {
    pub fn new(far_points: usize, near_points: usize, duffy_order: usize) -> Result<Self> {
        Ok(PanelRules {
            far: TriangleRule::with_points(far_points)?,
            near: TriangleRule::with_points(near_points)?,
            identical: DuffyRule::new(Singularity::Identical, duffy_order)?,
            common_edge: DuffyRule::new(Singularity::CommonEdge, duffy_order)?,
            common_vertex: DuffyRule::new(Singularity::CommonVertex, duffy_order)?,
        })
    }
}

impl Default for PanelRules {
    fn default() -> Self {
        Self::new(6, 16, 5).expect("default rules exist")
    }
}

/// Moments of the kernel over a panel pair, with `x̃ = x - c_P` and
/// `ỹ = y - c_Q` taken relative to the panel centroids:
/// `i0 = ∬ K`, `ix = ∬ x̃ K`, `iy = ∬ ỹ K`, `ixy = ∬ x̃·ỹ K`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairMoments {
    pub i0: f64,
    pub ix: Vec3,
    pub iy: Vec3,
    pub ixy: f64,
}

impl PairMoments {
    #[inline]
    fn add(&mut self, x: &Vec3, y: &Vec3, w: f64) {
        self.i0 += w;
        self.ix += x * w;
        self.iy += y * w;
        self.ixy += w * x.dot(y);
    }

    fn scale(&mut self, s: f64) {
        self.i0 *= s;
        self.ix *= s;
        self.iy *= s;
        self.ixy *= s;
    }

    /// The same moments with the roles of the two panels exchanged.
    pub fn swapped(&self) -> Self {
        PairMoments {
            i0: self.i0,
            ix: self.iy,
            iy: self.ix,
            ixy: self.ixy,
        }
    }

    fn is_finite(&self) -> bool {
        self.i0.is_finite() && self.ixy.is_finite() && self.ix.iter().chain(self.iy.iter()).all(|v| v.is_finite())
    }
}

/// RWG data of one panel per local slot `k` (the function whose free vertex
/// is local vertex `k`): `f = c (x - p)` and `div f = d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotCoefficients {
    pub basis: [usize; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
    /// Free vertices relative to the panel centroid.
    pub p: [Vec3; 3],
}

/// A mesh in world coordinates with its quadrature points and RWG slot data
/// cached per panel.
#[derive(Debug, Clone)]
pub struct SurfaceData {
    mesh: Arc<TriangleMesh>,
    basis: Arc<RwgBasisSet>,
    far: Vec<Vec3>,
    near: Vec<Vec3>,
    far_len: usize,
    near_len: usize,
    slots: Vec<SlotCoefficients>,
}

fn rule_points(mesh: &TriangleMesh, rule: &TriangleRule) -> Vec<Vec3> {
    let v = mesh.vertices();
    let mut out = Vec::with_capacity(mesh.num_panels() * rule.len());
    for p in mesh.panels() {
        let rel = p.vertices.map(|i| v[i] - p.centroid);
        for (l, _) in &rule.points {
            out.push(rel[0] * l[0] + rel[1] * l[1] + rel[2] * l[2]);
        }
    }
    out
}

impl SurfaceData {
    /// `mesh` may be a rigidly moved copy of the mesh `basis` was built on.
    pub fn new(mesh: Arc<TriangleMesh>, basis: Arc<RwgBasisSet>, rules: &PanelRules) -> Self {
        assert_eq!(mesh.num_panels(), basis.mesh().num_panels(), "mesh and basis topology differ");
        let v = mesh.vertices();
        let slots = mesh
            .panels()
            .iter()
            .enumerate()
            .map(|(i, panel)| {
                let pb = basis.panel_basis(i);
                let mut s = SlotCoefficients {
                    basis: pb.basis,
                    c: [0.0; 3],
                    d: [0.0; 3],
                    p: [Vec3::zeros(); 3],
                };
                for k in 0..3 {
                    let a = v[panel.vertices[(k + 1) % 3]];
                    let b = v[panel.vertices[(k + 2) % 3]];
                    let length = basis.edges()[pb.basis[k]].length;
                    debug_assert!(((b - a).norm() - length).abs() <= 1e-9 * length);
                    s.c[k] = pb.sign[k] * length / (2.0 * panel.area);
                    s.d[k] = pb.sign[k] * length / panel.area;
                    s.p[k] = v[panel.vertices[k]] - panel.centroid;
                }
                s
            })
            .collect();
        SurfaceData {
            far: rule_points(&mesh, &rules.far),
            near: rule_points(&mesh, &rules.near),
            far_len: rules.far.len(),
            near_len: rules.near.len(),
            mesh,
            basis,
            slots,
        }
    }

    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        &self.mesh
    }

    pub fn basis(&self) -> &Arc<RwgBasisSet> {
        &self.basis
    }

    pub fn slots(&self, panel: usize) -> &SlotCoefficients {
        &self.slots[panel]
    }
}

fn product_rule(
    a: &SurfaceData,
    pa: usize,
    b: &SurfaceData,
    pb: usize,
    rule: &TriangleRule,
    near: bool,
    kernel: &Kernel,
) -> PairMoments {
    let (pts_a, pts_b, n) = if near {
        (&a.near, &b.near, a.near_len)
    } else {
        (&a.far, &b.far, a.far_len)
    };
    debug_assert_eq!(n, rule.len());
    let xa = &pts_a[pa * n..(pa + 1) * n];
    let yb = &pts_b[pb * n..(pb + 1) * n];
    let (panel_a, panel_b) = (&a.mesh.panels()[pa], &b.mesh.panels()[pb]);
    let offset = panel_a.centroid - panel_b.centroid;
    let mut m = PairMoments::default();
    for (x, (_, wx)) in xa.iter().zip(&rule.points) {
        let base = offset + x;
        for (y, (_, wy)) in yb.iter().zip(&rule.points) {
            m.add(x, y, wx * wy * kernel.eval(&(base - y)));
        }
    }
    m.scale(panel_a.area * panel_b.area);
    m
}

fn duffy(
    a: &SurfaceData,
    pa: usize,
    order_a: [usize; 3],
    b: &SurfaceData,
    pb: usize,
    order_b: [usize; 3],
    rule: &DuffyRule,
    kernel: &Kernel,
) -> PairMoments {
    let frame = |s: &SurfaceData, p: usize, order: [usize; 3]| {
        let panel = &s.mesh.panels()[p];
        let v = order.map(|k| s.mesh.vertices()[panel.vertices[k]]);
        (v[0], v[1] - v[0], v[2] - v[1], v[0] - panel.centroid, panel.area)
    };
    let (a0, a1, a2, ac, area_a) = frame(a, pa, order_a);
    let (b0, b1, b2, bc, area_b) = frame(b, pb, order_b);
    let identical = rule.kind == Singularity::Identical;
    let shift = a0 - b0;
    let mut m = PairMoments::default();
    for (x, y, w) in &rule.nodes {
        let xl = a1 * x[0] + a2 * x[1];
        let yl = b1 * y[0] + b2 * y[1];
        let d = if identical {
            a1 * (x[0] - y[0]) + a2 * (x[1] - y[1])
        } else {
            shift + xl - yl
        };
        m.add(&(ac + xl), &(bc + yl), w * kernel.eval(&d));
    }
    m.scale(4.0 * area_a * area_b);
    m
}

/// Kernel moments over panel `pa` of `a` and panel `pb` of `b`.
pub fn pair_moments(
    a: &SurfaceData,
    pa: usize,
    b: &SurfaceData,
    pb: usize,
    class: PanelPairClass,
    kernel: &Kernel,
    rules: &PanelRules,
) -> Result<PairMoments> {
    let m = match class {
        PanelPairClass::Far => product_rule(a, pa, b, pb, &rules.far, false, kernel),
        PanelPairClass::Near => product_rule(a, pa, b, pb, &rules.near, true, kernel),
        PanelPairClass::SelfPanel => duffy(a, pa, [0, 1, 2], b, pb, [0, 1, 2], &rules.identical, kernel),
        PanelPairClass::CommonEdge { a: oa, b: ob } => duffy(a, pa, oa, b, pb, ob, &rules.common_edge, kernel),
        PanelPairClass::CommonVertex { a: oa, b: ob } => duffy(a, pa, oa, b, pb, ob, &rules.common_vertex, kernel),
    };
    if !m.is_finite() {
        return Err(Error::Quadrature {
            panel_a: pa,
            panel_b: pb,
            message: format!("non-finite moments for {class:?}"),
        });
    }
    Ok(m)
}

/// Contribution of a panel pair to the nine entries coupling the RWG slots
/// of the two panels: `ff` weights the current term, `dd` the charge term.
#[inline]
pub fn slot_block(m: &PairMoments, sa: &SlotCoefficients, sb: &SlotCoefficients, ff: f64, dd: f64) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    let pa_iy = sa.p.map(|p| p.dot(&m.iy));
    let qb_ix = sb.p.map(|q| q.dot(&m.ix));
    for k in 0..3 {
        for l in 0..3 {
            let current = m.ixy - pa_iy[k] - qb_ix[l] + sa.p[k].dot(&sb.p[l]) * m.i0;
            out[k][l] = ff * sa.c[k] * sb.c[l] * current + dd * sa.d[k] * sb.d[l] * m.i0;
        }
    }
    out
}

/// Weak-form matrix element between RWG function `alpha` on `a` and `beta`
/// on `b`:
/// `∬ [f_α(x)·f_β(y) + κ⁻² div f_α(x) div f_β(y)] g_κ(|x - y|) dA dA'`.
pub fn rwg_pair_integral(
    a: &SurfaceData,
    alpha: usize,
    b: &SurfaceData,
    beta: usize,
    same_object: bool,
    kappa: f64,
    rules: &PanelRules,
) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("κ must be positive, got {kappa}")));
    }
    let kernel = Kernel::Value { kappa };
    let mut total = 0.0;
    for (pa, _) in a.basis.support(alpha) {
        let ka = a.basis.local_slot(pa, alpha).expect("support panel holds its basis");
        for (pb, _) in b.basis.support(beta) {
            let kb = b.basis.local_slot(pb, beta).expect("support panel holds its basis");
            let class = classify_pair(&a.mesh.panels()[pa], &b.mesh.panels()[pb], same_object);
            let m = pair_moments(a, pa, b, pb, class, &kernel, rules)?;
            let block = slot_block(&m, &a.slots[pa], &b.slots[pb], 1.0, 1.0 / (kappa * kappa));
            total += block[ka][kb];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RigidTransform;
    use crate::kernel::oracle::{reference_moments, OracleRule};
    use crate::meshio::{generate_sphere, generate_tetrahedron};

    fn surface(mesh: TriangleMesh, rules: &PanelRules) -> SurfaceData {
        let basis = Arc::new(RwgBasisSet::new(Arc::new(mesh)));
        SurfaceData::new(basis.mesh().clone(), basis, rules)
    }

    fn corners(s: &SurfaceData, p: usize) -> [Vec3; 3] {
        s.mesh.panels()[p].vertices.map(|i| s.mesh.vertices()[i])
    }

    const ORACLE: OracleRule = OracleRule { points: 8, levels: 5 };

    fn block_error(a: &SurfaceData, pa: usize, b: &SurfaceData, pb: usize, class: PanelPairClass, kappa: f64, rules: &PanelRules) -> f64 {
        let kernel = Kernel::Value { kappa };
        let m = pair_moments(a, pa, b, pb, class, &kernel, rules).unwrap();
        let r = reference_moments(&corners(a, pa), &corners(b, pb), &kernel, ORACLE);
        let (sa, sb) = (a.slots(pa), b.slots(pb));
        let ours = slot_block(&m, sa, sb, 1.0, 1.0 / (kappa * kappa));
        let exact = slot_block(&r, sa, sb, 1.0, 1.0 / (kappa * kappa));
        let scale = exact.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        ours.iter().flatten().zip(exact.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
    }

    fn singular_pairs(s: &SurfaceData, p: usize) -> Vec<(usize, PanelPairClass)> {
        let panels = s.mesh.panels();
        let mut seen = [false; 3];
        let mut out = Vec::new();
        for q in 0..panels.len() {
            let class = classify_pair(&panels[p], &panels[q], true);
            let slot = match class {
                PanelPairClass::SelfPanel => 0,
                PanelPairClass::CommonEdge { .. } => 1,
                PanelPairClass::CommonVertex { .. } => 2,
                _ => continue,
            };
            if !seen[slot] {
                seen[slot] = true;
                out.push((q, class));
            }
        }
        out
    }

    #[test]
    fn reference_quadrature_agrees_with_high_order_duffy() {
        let a = surface(generate_sphere(1.0, 1).unwrap(), &PanelRules::default());
        let high = PanelRules::new(6, 16, 16).unwrap();
        for (q, class) in singular_pairs(&a, 0) {
            let kernel = Kernel::Value { kappa: 2.0 };
            let d = pair_moments(&a, 0, &a, q, class, &kernel, &high).unwrap();
            let r = reference_moments(&corners(&a, 0), &corners(&a, q), &kernel, ORACLE);
            let size = a.mesh.panels()[0].diameter;
            assert!(((d.i0 - r.i0) / r.i0).abs() < 1e-9, "{class:?} {:e}", (d.i0 - r.i0) / r.i0);
            assert!((d.ixy - r.ixy).abs() < 1e-9 * r.i0 * size * size, "{class:?}");
            assert!((d.ix - r.ix).norm() < 1e-9 * r.i0 * size, "{class:?}");
            assert!((d.iy - r.iy).norm() < 1e-9 * r.i0 * size, "{class:?}");
        }
    }

    #[test]
    fn singular_classes_meet_accuracy_target() {
        let rules = PanelRules::default();
        let sphere = surface(generate_sphere(1.0, 1).unwrap(), &rules);
        let tetra = surface(generate_tetrahedron(1.0, 1).unwrap(), &rules);
        for s in [&sphere, &tetra] {
            for (q, class) in singular_pairs(s, 0) {
                for kappa in [0.2, 3.0] {
                    let err = block_error(s, 0, s, q, class, kappa, &rules);
                    assert!(err < 1e-5, "{class:?} κ={kappa}: {err:e}");
                }
            }
        }
    }

    #[test]
    fn near_pairs_meet_accuracy_target() {
        let rules = PanelRules::default();
        let a = surface(generate_sphere(1.0, 2).unwrap(), &rules);
        let panels = a.mesh.panels();
        let mut checked = 0;
        for q in 0..panels.len() {
            let ratio = (panels[q].centroid - panels[0].centroid).norm() / panels[0].diameter;
            if classify_pair(&panels[0], &panels[q], true) != PanelPairClass::Near || !(1.2..2.8).contains(&ratio) {
                continue;
            }
            let err = block_error(&a, 0, &a, q, PanelPairClass::Near, 1.0, &rules);
            assert!(err < 1e-6, "ratio {ratio}: {err:e}");
            checked += 1;
            if checked == 3 {
                break;
            }
        }
        assert_eq!(checked, 3);
    }

    #[test]
    fn far_pairs_between_separated_spheres_meet_accuracy_target() {
        let rules = PanelRules::default();
        let a = surface(generate_sphere(1.0, 2).unwrap(), &rules);
        let moved = generate_sphere(1.0, 2).unwrap().transformed(&RigidTransform::translation(Vec3::new(0.0, 0.0, 4.0)));
        let b = SurfaceData::new(Arc::new(moved), a.basis.clone(), &rules);
        let (pa, pb) = (a.mesh.panels(), b.mesh.panels());
        let top = (0..pa.len()).max_by(|&i, &j| pa[i].centroid.z.total_cmp(&pa[j].centroid.z)).unwrap();
        let bottom = (0..pb.len()).min_by(|&i, &j| pb[i].centroid.z.total_cmp(&pb[j].centroid.z)).unwrap();
        for (i, j) in [(top, bottom), (top, 7), (0, bottom)] {
            let class = classify_pair(&pa[i], &pb[j], false);
            assert_eq!(class, PanelPairClass::Far);
            for kappa in [0.125, 0.25, 0.5] {
                let err = block_error(&a, i, &b, j, class, kappa, &rules);
                assert!(err < 1e-8, "pair ({i}, {j}) κ={kappa}: {err:e}");
            }
        }
    }

    #[test]
    fn moments_are_symmetric_under_exchange() {
        let rules = PanelRules::default();
        let a = surface(generate_sphere(1.0, 1).unwrap(), &rules);
        let panels = a.mesh.panels();
        let kernel = Kernel::Value { kappa: 0.7 };
        for q in 0..panels.len() {
            let forward = pair_moments(&a, 0, &a, q, classify_pair(&panels[0], &panels[q], true), &kernel, &rules).unwrap();
            let back = pair_moments(&a, q, &a, 0, classify_pair(&panels[q], &panels[0], true), &kernel, &rules).unwrap().swapped();
            let size = panels[0].diameter;
            assert!((forward.i0 - back.i0).abs() < 1e-6 * forward.i0, "panel {q}");
            assert!((forward.ix - back.ix).norm() < 1e-6 * forward.i0 * size, "panel {q}");
            assert!((forward.iy - back.iy).norm() < 1e-6 * forward.i0 * size, "panel {q}");
        }
    }

    #[test]
    fn pair_integral_is_symmetric_and_positive_on_diagonal() {
        let rules = PanelRules::default();
        let a = surface(generate_sphere(1.0, 1).unwrap(), &rules);
        for kappa in [0.3, 2.0] {
            for alpha in [0, 5, 17] {
                let diag = rwg_pair_integral(&a, alpha, &a, alpha, true, kappa, &rules).unwrap();
                assert!(diag > 0.0);
                for beta in [1, 40, 100] {
                    let ab = rwg_pair_integral(&a, alpha, &a, beta, true, kappa, &rules).unwrap();
                    let ba = rwg_pair_integral(&a, beta, &a, alpha, true, kappa, &rules).unwrap();
                    assert!((ab - ba).abs() < 1e-6 * diag, "{alpha} {beta}");
                }
            }
        }
        assert!(rwg_pair_integral(&a, 0, &a, 0, true, 0.0, &rules).is_err());
    }

    #[test]
    fn moments_are_invariant_under_rigid_motion() {
        let rules = PanelRules::default();
        let mesh = generate_sphere(1.0, 1).unwrap();
        let motion = RigidTransform::rot_x(23.0).then(&RigidTransform::rot_z(63.0)).then(&RigidTransform::translation(Vec3::new(0.3, -2.0, 5.0)));
        let a = surface(mesh.clone(), &rules);
        let b = SurfaceData::new(Arc::new(mesh.transformed(&motion)), a.basis.clone(), &rules);
        let kernel = Kernel::Value { kappa: 1.3 };
        let panels = a.mesh.panels();
        for q in [0, 1, 2, 9, 30, 70] {
            let class = classify_pair(&panels[0], &panels[q], true);
            let m = pair_moments(&a, 0, &a, q, class, &kernel, &rules).unwrap();
            let n = pair_moments(&b, 0, &b, q, class, &kernel, &rules).unwrap();
            assert!((m.i0 - n.i0).abs() < 1e-12 * m.i0);
            assert!((m.ixy - n.ixy).abs() < 1e-12 * m.i0);
            assert!((motion.apply_vector(&m.ix) - n.ix).norm() < 1e-12 * m.i0);
        }
    }

    #[test]
    fn screening_bounds_the_coupling() {
        let rules = PanelRules::default();
        let a = surface(generate_sphere(1.0, 1).unwrap(), &rules);
        let panels = a.mesh.panels();
        for q in [0, 9, 30, 70] {
            let class = classify_pair(&panels[0], &panels[q], true);
            let gap = crate::geometry::triangle_distance(&corners(&a, 0), &corners(&a, q));
            let at = |kappa: f64| pair_moments(&a, 0, &a, q, class, &Kernel::Value { kappa }, &rules).unwrap().i0;
            let static_value = at(0.0);
            let mut last = static_value;
            for kappa in [0.1, 0.5, 1.0, 4.0] {
                let v = at(kappa);
                assert!(v > 0.0 && v < last);
                assert!(v <= (-kappa * gap).exp() * static_value * (1.0 + 1e-12));
                last = v;
            }
        }
    }
}
