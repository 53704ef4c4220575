//! Exact distances between triangulated surfaces.

use crate::meshio::{TriangleMesh, Vec3};

pub(crate) fn closest_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

fn segment_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let c = d1.dot(&r);
    let b = d1.dot(&d2);
    let denom = a * e - b * b;
    let mut s = if denom > 0.0 {
        ((b * f - c * e) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

fn segment_crosses_triangle(p: &Vec3, q: &Vec3, tri: &[Vec3; 3]) -> bool {
    let [a, b, c] = tri;
    let dir = q - p;
    let e1 = b - a;
    let e2 = c - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-300 {
        return false;
    }
    let inv = 1.0 / det;
    let s = p - a;
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = s.cross(&e1);
    let v = inv * dir.dot(&qv);
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let t = inv * e2.dot(&qv);
    (0.0..=1.0).contains(&t)
}

/// Euclidean distance between two closed triangles; zero if they intersect.
pub fn triangle_distance(a: &[Vec3; 3], b: &[Vec3; 3]) -> f64 {
    for k in 0..3 {
        if segment_crosses_triangle(&a[k], &a[(k + 1) % 3], b)
            || segment_crosses_triangle(&b[k], &b[(k + 1) % 3], a)
        {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for k in 0..3 {
        best = best.min((a[k] - closest_on_triangle(&a[k], &b[0], &b[1], &b[2])).norm());
        best = best.min((b[k] - closest_on_triangle(&b[k], &a[0], &a[1], &a[2])).norm());
        for m in 0..3 {
            best = best.min(segment_distance(&a[k], &a[(k + 1) % 3], &b[m], &b[(m + 1) % 3]));
        }
    }
    best
}

/// Minimum distance between two triangle surfaces, pruned by panel bounding
/// spheres.
pub fn mesh_distance(a: &TriangleMesh, b: &TriangleMesh) -> f64 {
    let radii = |m: &TriangleMesh| -> Vec<f64> { m.panels().iter().map(|p| p.radius(m.vertices())).collect() };
    let (ra, rb) = (radii(a), radii(b));
    let mut upper = f64::INFINITY;
    for pa in a.panels() {
        for pb in b.panels() {
            upper = upper.min((pa.centroid - pb.centroid).norm());
        }
    }
    let mut candidates = Vec::new();
    for (i, pa) in a.panels().iter().enumerate() {
        for (j, pb) in b.panels().iter().enumerate() {
            let lower = (pa.centroid - pb.centroid).norm() - ra[i] - rb[j];
            if lower < upper {
                candidates.push((lower, i, j));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0));
    let corners = |m: &TriangleMesh, p: usize| m.panels()[p].vertices.map(|v| m.vertices()[v]);
    let mut best = upper;
    for (lower, i, j) in candidates {
        if lower >= best {
            break;
        }
        best = best.min(triangle_distance(&corners(a, i), &corners(b, j)));
    }
    best
}

/// Whether `point` lies inside the closed surface, by generalized winding number.
pub(crate) fn contains(mesh: &TriangleMesh, point: &Vec3) -> bool {
    let v = mesh.vertices();
    let mut solid_angle = 0.0;
    for p in mesh.panels() {
        let [a, b, c] = p.vertices.map(|i| v[i] - point);
        let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
        let numer = a.dot(&b.cross(&c));
        let denom = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
        solid_angle += 2.0 * numer.atan2(denom);
    }
    solid_angle > 2.0 * std::f64::consts::PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshio::generate_sphere;
    use proptest::prelude::*;

    fn brute_force(a: &[Vec3; 3], b: &[Vec3; 3]) -> f64 {
        // dense barycentric sampling; an upper bound converging to the distance
        let n = 60;
        let sample = |t: &[Vec3; 3], i: usize, j: usize| {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v
        };
        let mut best = f64::INFINITY;
        let pts = |t: &[Vec3; 3]| {
            let mut out = Vec::new();
            for i in 0..=n {
                for j in 0..=n - i {
                    out.push(sample(t, i, j));
                }
            }
            out
        };
        let (pa, pb) = (pts(a), pts(b));
        for p in &pa {
            for q in &pb {
                best = best.min((p - q).norm());
            }
        }
        best
    }

    #[test]
    fn parallel_offset_triangles() {
        let a = [Vec3::zeros(), Vec3::x(), Vec3::y()];
        let b = a.map(|p| p + Vec3::new(0.2, 0.2, 0.5));
        assert!((triangle_distance(&a, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn piercing_triangles_touch() {
        let a = [Vec3::zeros(), Vec3::x(), Vec3::y()];
        let b = [Vec3::new(0.2, 0.2, -1.0), Vec3::new(0.2, 0.2, 1.0), Vec3::new(3.0, 3.0, 0.0)];
        assert_eq!(triangle_distance(&a, &b), 0.0);
    }

    #[test]
    fn winding_number_inside_outside() {
        let s = generate_sphere(1.0, 1).unwrap();
        assert!(contains(&s, &Vec3::new(0.1, -0.2, 0.3)));
        assert!(!contains(&s, &Vec3::new(1.5, 0.0, 0.0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn matches_sampling(a in prop::array::uniform9(-1.0..1.0f64), b in prop::array::uniform9(-1.0..1.0f64), shift in 0.0..2.0f64) {
            let ta = [Vec3::new(a[0], a[1], a[2]), Vec3::new(a[3], a[4], a[5]), Vec3::new(a[6], a[7], a[8])];
            let tb = [Vec3::new(b[0], b[1], b[2] + shift), Vec3::new(b[3], b[4], b[5] + shift), Vec3::new(b[6], b[7], b[8] + shift)];
            let exact = triangle_distance(&ta, &tb);
            let sampled = brute_force(&ta, &tb);
            let scale = ta.iter().chain(tb.iter()).map(|p| p.norm()).fold(0.0, f64::max);
            prop_assert!(exact <= sampled + 1e-12);
            prop_assert!(sampled - exact <= 0.08 * scale + 1e-12, "exact {} sampled {}", exact, sampled);
        }
    }
}
