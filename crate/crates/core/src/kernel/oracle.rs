//! Independent reference quadrature for panel-pair moments.
//!
//! The inner integral over `Q` is done in polar coordinates centred on the
//! projection of `x` onto the plane of `Q`, parametrised along each edge of
//! `Q`, with composite Gauss-Legendre pieces graded geometrically towards the
//! near-singular points. The outer integral over `P` uses a collapsed square
//! with tensor Gauss-Legendre pieces graded towards every edge and vertex.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use super::{Kernel, PairMoments};
use crate::meshio::Vec3;

type V4 = [f64; 4];

const GRADING: f64 = 4.0;

fn unit_rule(n: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(n).unwrap())
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Breakpoints of `[lo, hi]` graded geometrically around `center` with
/// smallest piece `scale`.
fn graded(lo: f64, hi: f64, center: f64, scale: f64) -> Vec<f64> {
    let mut points = vec![lo, hi];
    if center > lo && center < hi {
        points.push(center);
    }
    if scale > 0.0 {
        let mut step = scale;
        while step < hi - lo {
            for p in [center - step, center + step] {
                if p > lo && p < hi {
                    points.push(p);
                }
            }
            step *= GRADING;
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

fn composite<F: FnMut(f64) -> V4>(breaks: &[f64], rule: &[(f64, f64)], mut f: F) -> V4 {
    let mut acc = [0.0; 4];
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        for &(t, wt) in rule {
            let v = f(w[0] + t * len);
            for i in 0..4 {
                acc[i] += wt * len * v[i];
            }
        }
    }
    acc
}

/// `∫_Q K(x - y) (1, y - c_Q) dy` for a point `x` anywhere.
fn inner(x: &Vec3, q: &[Vec3; 3], kernel: &Kernel, rule: &[(f64, f64)]) -> V4 {
    let centroid = (q[0] + q[1] + q[2]) / 3.0;
    let normal = (q[1] - q[0]).cross(&(q[2] - q[0])).normalize();
    let h = (x - q[0]).dot(&normal);
    let foot = x - normal * h;
    let size = (q[1] - q[0]).norm().max((q[2] - q[0]).norm());
    let h_scale = if h.abs() > 1e-14 * size { h.abs() } else { 0.0 };
    let mut total = [0.0; 4];
    for k in 0..3 {
        let (a, b) = (q[k], q[(k + 1) % 3]);
        let edge = b - a;
        let len = edge.norm();
        let u = edge / len;
        let along = (foot - a).dot(&u);
        let perp_vec = (a + u * along) - foot;
        let t = perp_vec.norm();
        if t < 1e-14 * len {
            continue;
        }
        let n_hat = perp_vec / t;
        // sign of the sub-triangle (foot, a, b) relative to Q
        let sign = (a - foot).cross(&(b - foot)).dot(&normal).signum();
        let (s0, s1) = (-along, len - along);
        let part = composite(&graded(s0, s1, 0.0, t), rule, |s| {
            let rho_max = (t * t + s * s).sqrt();
            let dir = (n_hat * t + u * s) / rho_max;
            let dtheta = t / (rho_max * rho_max);
            let radial = composite(&graded(0.0, rho_max, 0.0, h_scale), rule, |rho| {
                let y = foot + dir * rho;
                let value = kernel.eval(&(x - y)) * rho;
                let yc = y - centroid;
                [value, value * yc.x, value * yc.y, value * yc.z]
            });
            radial.map(|v| v * dtheta)
        });
        for i in 0..4 {
            total[i] += sign * part[i];
        }
    }
    total
}

/// Tuning of the reference quadrature.
#[derive(Debug, Clone, Copy)]
pub struct OracleRule {
    /// Gauss-Legendre points per graded piece.
    pub points: usize,
    /// Geometric levels of outer grading towards each edge of `P`.
    pub levels: i32,
}

impl Default for OracleRule {
    fn default() -> Self {
        OracleRule { points: 12, levels: 7 }
    }
}

/// Reference moments of `kernel` over the pair `(P, Q)`, slow but accurate
/// for every relative position including coincident panels.
pub fn reference_moments(p: &[Vec3; 3], q: &[Vec3; 3], kernel: &Kernel, tuning: OracleRule) -> PairMoments {
    let rule = unit_rule(tuning.points);
    let smallest = 0.5 * GRADING.powi(-tuning.levels);
    let mut breaks = vec![0.0];
    let mut step = smallest;
    while step < 0.5 {
        breaks.push(step);
        step *= GRADING;
    }
    breaks.push(0.5);
    let mirrored: Vec<f64> = breaks[..breaks.len() - 1].iter().rev().map(|b| 1.0 - b).collect();
    breaks.extend(mirrored);
    let cp = (p[0] + p[1] + p[2]) / 3.0;
    let twice_area = (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
    let mut r = [0.0; 8];
    for wu in breaks.windows(2) {
        for &(tu, wtu) in &rule {
            let uu = wu[0] + tu * (wu[1] - wu[0]);
            for wv in breaks.windows(2) {
                for &(tv, wtv) in &rule {
                    let vv = wv[0] + tv * (wv[1] - wv[0]);
                    let x = p[0] + (p[1] - p[0]) * uu + (p[2] - p[1]) * (uu * vv);
                    let weight = wtu * (wu[1] - wu[0]) * wtv * (wv[1] - wv[0]) * twice_area * uu;
                    let j = inner(&x, q, kernel, &rule);
                    let xc = x - cp;
                    let jy = Vec3::new(j[1], j[2], j[3]);
                    let v = [j[0], xc.x * j[0], xc.y * j[0], xc.z * j[0], j[1], j[2], j[3], xc.dot(&jy)];
                    for i in 0..8 {
                        r[i] += weight * v[i];
                    }
                }
            }
        }
    }
    PairMoments {
        i0: r[0],
        ix: Vec3::new(r[1], r[2], r[3]),
        iy: Vec3::new(r[4], r[5], r[6]),
        ixy: r[7],
    }
}
