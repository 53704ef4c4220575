//! Rigid placement of meshes and multi-object configurations.

mod distance;
mod file;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix3, Rotation3, Unit};

use crate::error::{Error, Result};
use crate::meshio::{RwgBasisSet, TriangleMesh, Vec3};

pub use distance::{mesh_distance, triangle_distance};
pub use file::{load_geometry, parse_geometry, GeometryFile};

/// Coordinate axis, used for rotations, translations and force directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> Vec3 {
        match self {
            Axis::X => Vec3::x(),
            Axis::Y => Vec3::y(),
            Axis::Z => Vec3::z(),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(Error::InvalidArgument(format!(
                "unknown axis `{s}`, expected x, y or z"
            ))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Proper rigid motion `x -> R x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    /// Validates that `rotation` is orthogonal with determinant +1.
    pub fn new(rotation: Matrix3<f64>, translation: Vec3) -> Result<Self> {
        let defect = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if defect > 1e-12 || (rotation.determinant() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "rotation matrix is not proper orthogonal (|RᵀR - I| = {defect:e})"
            )));
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn translation(offset: Vec3) -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: offset,
        }
    }

    /// Rotation about a coordinate axis through the origin, angle in degrees.
    pub fn rotation_deg(axis: Axis, degrees: f64) -> Self {
        let rot = Rotation3::from_axis_angle(&Unit::new_unchecked(axis.unit()), degrees.to_radians());
        RigidTransform {
            rotation: *rot.matrix(),
            translation: Vec3::zeros(),
        }
    }

    pub fn rot_x(degrees: f64) -> Self {
        Self::rotation_deg(Axis::X, degrees)
    }

    pub fn rot_y(degrees: f64) -> Self {
        Self::rotation_deg(Axis::Y, degrees)
    }

    pub fn rot_z(degrees: f64) -> Self {
        Self::rotation_deg(Axis::Z, degrees)
    }

    /// The same motion with `pivot` as its fixed point instead of the origin.
    pub fn about(self, pivot: Vec3) -> Self {
        compose(
            &Self::translation(pivot),
            &compose(&self, &Self::translation(-pivot)),
        )
    }

    pub fn apply(&self, point: &Vec3) -> Vec3 {
        self.rotation * point + self.translation
    }

    /// Rotate a direction; translations do not act on vectors.
    pub fn apply_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &RigidTransform) -> Self {
        compose(other, self)
    }
}

/// Transform applying `inner` first, then `outer`.
pub fn compose(outer: &RigidTransform, inner: &RigidTransform) -> RigidTransform {
    RigidTransform {
        rotation: outer.rotation * inner.rotation,
        translation: outer.rotation * inner.translation + outer.translation,
    }
}

/// Rotation origin of a tetrahedron built by
/// [`generate_tetrahedron`](crate::meshio::generate_tetrahedron): the point on
/// the symmetry axis a distance `√3 L / 4` below the apex.
pub fn tetrahedron_pivot(edge: f64) -> Vec3 {
    let apex = 0.75 * (2.0f64 / 3.0).sqrt() * edge;
    Vec3::new(0.0, 0.0, apex - 3f64.sqrt() * edge / 4.0)
}

/// Orientation protocol for the tetrahedron sweeps: rotate by `phi` about
/// `z`, then by `theta` about `y`, both about the origin. Compose with a
/// translation taking the pivot to the origin to rotate about the pivot.
pub fn orientation(theta_deg: f64, phi_deg: f64) -> RigidTransform {
    compose(
        &RigidTransform::rot_y(theta_deg),
        &RigidTransform::rot_z(phi_deg),
    )
}

/// Placement of a generated tetrahedron with its pivot at `position` and the
/// orientation `(theta, phi)` applied about the pivot.
pub fn place_tetrahedron(edge: f64, theta_deg: f64, phi_deg: f64, position: Vec3) -> RigidTransform {
    let to_origin = RigidTransform::translation(-tetrahedron_pivot(edge));
    compose(
        &RigidTransform::translation(position),
        &compose(&orientation(theta_deg, phi_deg), &to_origin),
    )
}

/// One object of a configuration: a mesh, its RWG basis and a placement.
///
/// The basis is built on the untransformed mesh; [`ObjectInstance::placed`]
/// holds the transformed copy used for geometry. Instances created with
/// [`ObjectInstance::with_transform`] share the base mesh and basis.
#[derive(Debug, Clone)]
pub struct ObjectInstance {
    label: String,
    basis: Arc<RwgBasisSet>,
    transform: RigidTransform,
    placed: Arc<TriangleMesh>,
}

impl ObjectInstance {
    pub fn new(label: impl Into<String>, basis: Arc<RwgBasisSet>, transform: RigidTransform) -> Self {
        let placed = Arc::new(basis.mesh().transformed(&transform));
        ObjectInstance {
            label: label.into(),
            basis,
            transform,
            placed,
        }
    }

    pub fn from_mesh(label: impl Into<String>, mesh: TriangleMesh, transform: RigidTransform) -> Self {
        Self::new(label, Arc::new(RwgBasisSet::new(Arc::new(mesh))), transform)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Untransformed mesh the basis refers to.
    pub fn mesh(&self) -> &Arc<TriangleMesh> {
        self.basis.mesh()
    }

    /// Mesh in world coordinates.
    pub fn placed(&self) -> &Arc<TriangleMesh> {
        &self.placed
    }

    pub fn basis(&self) -> &Arc<RwgBasisSet> {
        &self.basis
    }

    pub fn transform(&self) -> &RigidTransform {
        &self.transform
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn with_transform(&self, transform: RigidTransform) -> Self {
        Self::new(self.label.clone(), self.basis.clone(), transform)
    }
}

/// Ordered set of non-overlapping objects.
#[derive(Debug, Clone)]
pub struct Configuration {
    objects: Vec<ObjectInstance>,
    offsets: Vec<usize>,
    /// Row-major upper triangle of pairwise surface separations.
    separations: Vec<f64>,
}

impl Configuration {
    /// Fails with [`Error::Overlap`] if any two surfaces touch, intersect or
    /// nest.
    pub fn new(objects: Vec<ObjectInstance>) -> Result<Self> {
        if objects.is_empty() {
            return Err(Error::InvalidArgument("configuration has no objects".into()));
        }
        for (i, a) in objects.iter().enumerate() {
            if objects[..i].iter().any(|b| b.label == a.label) {
                return Err(Error::InvalidArgument(format!("duplicate object label `{}`", a.label)));
            }
        }
        let mut offsets = Vec::with_capacity(objects.len() + 1);
        offsets.push(0);
        for o in &objects {
            offsets.push(offsets.last().unwrap() + o.len());
        }
        let n = objects.len();
        let mut separations = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (objects[i].placed(), objects[j].placed());
                let mut d = mesh_distance(a, b);
                if d > 0.0 && (distance::contains(a, &b.vertices()[0]) || distance::contains(b, &a.vertices()[0])) {
                    d = 0.0;
                }
                if d <= 0.0 {
                    return Err(Error::Overlap { i, j, separation: d });
                }
                separations.push(d);
            }
        }
        Ok(Configuration {
            objects,
            offsets,
            separations,
        })
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Total number of basis functions.
    pub fn dimension(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// `(offset, size)` of object `i` in the blocked matrix layout.
    pub fn block(&self, i: usize) -> (usize, usize) {
        (self.offsets[i], self.offsets[i + 1] - self.offsets[i])
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.label == label)
    }

    /// Minimum surface-to-surface distance between objects `i` and `j`.
    pub fn min_separation(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.objects.len();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidArgument(format!(
                "separation requested for objects ({i}, {j}) of {n}"
            )));
        }
        let (i, j) = (i.min(j), i.max(j));
        Ok(self.separations[i * n - i * (i + 1) / 2 + (j - i - 1)])
    }

    /// Smallest pairwise separation, `None` for a single object.
    pub fn d_min(&self) -> Option<f64> {
        self.separations.iter().copied().reduce(f64::min)
    }

    /// Copy with object `i` given a new placement.
    pub fn with_object_transform(&self, i: usize, transform: RigidTransform) -> Result<Self> {
        let mut objects = self.objects.clone();
        objects[i] = objects[i].with_transform(transform);
        Configuration::new(objects)
    }

    /// Copy with object `i` moved by `offset`.
    pub fn displaced(&self, i: usize, offset: Vec3) -> Result<Self> {
        let t = compose(&RigidTransform::translation(offset), &self.objects[i].transform);
        self.with_object_transform(i, t)
    }

    /// Copy with `motion` applied to every object.
    pub fn moved(&self, motion: &RigidTransform) -> Result<Self> {
        let objects = self
            .objects
            .iter()
            .map(|o| o.with_transform(compose(motion, &o.transform)))
            .collect();
        Configuration::new(objects)
    }

    /// Copy with the objects reordered; `order[k]` is the old index of new object `k`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        Configuration::new(order.iter().map(|&k| self.objects[k].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshio::{generate_capsule, generate_sphere, generate_tetrahedron};
    use proptest::prelude::*;

    fn close(a: &RigidTransform, b: &RigidTransform, tol: f64) -> bool {
        (a.rotation - b.rotation).abs().max() < tol && (a.translation - b.translation).abs().max() < tol
    }

    fn sphere(label: &str, s: usize, center: Vec3) -> ObjectInstance {
        ObjectInstance::from_mesh(label, generate_sphere(1.0, s).unwrap(), RigidTransform::translation(center))
    }

    #[test]
    fn compose_with_identity_and_inverse_rotation() {
        let t = compose(&RigidTransform::translation(Vec3::new(1.0, 2.0, 3.0)), &RigidTransform::rot_x(33.0));
        assert_eq!(compose(&t, &RigidTransform::identity()), t);
        let r = compose(&RigidTransform::rot_z(60.0), &RigidTransform::rot_z(-60.0));
        assert!(close(&r, &RigidTransform::identity(), 1e-12));
    }

    #[test]
    fn protocol_rotates_about_z_first() {
        // a point on +x: z-rotation by 90 takes it to +y, which the y-rotation leaves alone
        let p = orientation(90.0, 90.0).apply(&Vec3::x());
        assert!((p - Vec3::y()).norm() < 1e-15);
        // the opposite order sends it to -z, where the z-rotation leaves it
        let q = compose(&RigidTransform::rot_z(90.0), &RigidTransform::rot_y(90.0)).apply(&Vec3::x());
        assert!((q + Vec3::z()).norm() < 1e-15);
    }

    #[test]
    fn tetrahedron_pivot_offsets() {
        let apex = |l: f64| generate_tetrahedron(l, 0).unwrap().vertices()[0].z;
        assert!((apex(1.0) - tetrahedron_pivot(1.0).z - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((apex(2.0) - tetrahedron_pivot(2.0).z - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(tetrahedron_pivot(0.0), Vec3::zeros());
    }

    #[test]
    fn protocol_at_zero_is_untransformed_placement() {
        let l = 1.0;
        let t = place_tetrahedron(l, 0.0, 0.0, Vec3::zeros());
        assert_eq!(t, RigidTransform::translation(-tetrahedron_pivot(l)));
    }

    #[test]
    fn sphere_separation() {
        let config = Configuration::new(vec![sphere("a", 2, Vec3::zeros()), sphere("b", 2, Vec3::new(0.0, 0.0, 4.0))]).unwrap();
        let d = config.min_separation(0, 1).unwrap();
        let diam = config.objects()[0].mesh().max_diameter();
        assert!(d >= 2.0 - 1e-12 && d <= 2.0 + diam, "{d}");
        assert_eq!(config.dimension(), 960);
        assert_eq!(config.block(1), (480, 480));
    }

    #[test]
    fn coincident_objects_overlap() {
        let err = Configuration::new(vec![sphere("a", 1, Vec3::zeros()), sphere("b", 1, Vec3::zeros())]).unwrap_err();
        assert!(matches!(err, Error::Overlap { i: 0, j: 1, .. }));
        let big = ObjectInstance::from_mesh("big", generate_sphere(3.0, 1).unwrap(), RigidTransform::identity());
        let err = Configuration::new(vec![big, sphere("small", 0, Vec3::zeros())]).unwrap_err();
        assert!(matches!(err, Error::Overlap { .. }));
    }

    #[test]
    fn crossed_capsule_separation() {
        let cap = generate_capsule(1.0, 6.0, 12).unwrap();
        let a = ObjectInstance::from_mesh("a", cap.clone(), RigidTransform::identity());
        let b = ObjectInstance::from_mesh(
            "b",
            cap,
            compose(&RigidTransform::translation(Vec3::new(0.0, 4.0, 0.0)), &RigidTransform::rot_y(90.0)),
        );
        let config = Configuration::new(vec![a, b]).unwrap();
        let d = config.min_separation(0, 1).unwrap();
        assert!((d - 2.0).abs() < config.objects()[0].mesh().max_diameter(), "{d}");
    }

    #[test]
    fn labels_and_permutation() {
        let config = Configuration::new(vec![sphere("a", 0, Vec3::zeros()), sphere("b", 1, Vec3::new(3.0, 0.0, 0.0))]).unwrap();
        assert_eq!(config.index_of("b"), Some(1));
        let p = config.permuted(&[1, 0]).unwrap();
        assert_eq!(p.block(0), (0, 120));
        assert_eq!(p.min_separation(1, 0).unwrap(), config.min_separation(0, 1).unwrap());
        assert!(Configuration::new(vec![sphere("a", 0, Vec3::zeros()), sphere("a", 0, Vec3::new(3.0, 0.0, 0.0))]).is_err());
    }

    fn transform_strategy() -> impl Strategy<Value = RigidTransform> {
        (-180.0..180.0f64, -180.0..180.0f64, -180.0..180.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64).prop_map(
            |(a, b, c, x, y, z)| {
                compose(
                    &RigidTransform::translation(Vec3::new(x, y, z)),
                    &compose(&RigidTransform::rot_z(a), &compose(&RigidTransform::rot_y(b), &RigidTransform::rot_x(c))),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn inverse_round_trip(t in transform_strategy(), p in prop::array::uniform3(-10.0..10.0f64)) {
            let p = Vec3::from(p);
            let back = t.inverse().apply(&t.apply(&p));
            prop_assert!((back - p).norm() <= 1e-12 * p.norm().max(1.0));
            prop_assert!(RigidTransform::new(t.rotation, t.translation).is_ok());
        }

        #[test]
        fn composition_is_associative(a in transform_strategy(), b in transform_strategy(), c in transform_strategy()) {
            let left = compose(&compose(&a, &b), &c);
            let right = compose(&a, &compose(&b, &c));
            prop_assert!(close(&left, &right, 1e-12));
        }

        #[test]
        fn global_motion_preserves_separation(t in transform_strategy()) {
            let config = Configuration::new(vec![
                sphere("a", 1, Vec3::zeros()),
                ObjectInstance::from_mesh("b", generate_tetrahedron(1.0, 0).unwrap(), RigidTransform::translation(Vec3::new(0.5, 2.5, 0.3))),
            ]).unwrap();
            let moved = config.moved(&t).unwrap();
            let (d0, d1) = (config.min_separation(0, 1).unwrap(), moved.min_separation(0, 1).unwrap());
            prop_assert!((d0 - d1).abs() <= 1e-12 * d0);
        }
    }
}
